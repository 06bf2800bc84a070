"""Ground truth for small instances: exhaustive search and naive move costing."""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .evaluation import MoveSpec
from .model import Instance, make_sequence, total_cost

MAX_BRUTEFORCE_N = 12


class OracleRefused(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    opt_cost: int
    opt_sequence: np.ndarray
    nodes_explored: int


@numba.njit(cache=True)
def _dfs(p, d, w, s, n, prune):
    # iterative depth-first enumeration in lexicographic job order
    order = np.zeros(n + 1, dtype=np.int64)
    used = np.zeros(n + 1, dtype=np.bool_)
    nxt = np.ones(n + 2, dtype=np.int64)
    t = np.zeros(n + 1, dtype=np.int64)
    acc = np.zeros(n + 1, dtype=np.int64)
    best = np.iinfo(np.int64).max
    best_order = np.zeros(n + 1, dtype=np.int64)
    nodes = 0
    depth = 1
    nxt[1] = 1
    while depth >= 1:
        job = nxt[depth]
        while job <= n and used[job]:
            job += 1
        if job > n:
            depth -= 1
            if depth >= 1:
                used[order[depth]] = False
            continue
        nxt[depth] = job + 1
        nodes += 1
        prev = order[depth - 1]
        ct = t[depth - 1] + s[prev, job] + p[job]
        c = acc[depth - 1]
        if ct > d[job]:
            c += w[job] * (ct - d[job])
        if prune and c >= best:
            continue
        order[depth] = job
        t[depth] = ct
        acc[depth] = c
        if depth == n:
            if c < best:
                best = c
                best_order[:] = order
            continue
        used[job] = True
        depth += 1
        nxt[depth] = 1
    return best, best_order, nodes


def exact_bruteforce(inst: Instance, prune: bool = True) -> OracleResult:
    """Optimal sequence by enumerating permutations in lexicographic order.

    With ``prune`` a branch is cut as soon as its partial tardiness reaches
    the incumbent.  Ties keep the lexicographically smallest optimum.
    """
    if inst.n > MAX_BRUTEFORCE_N:
        raise OracleRefused(f"exhaustive search is limited to n <= {MAX_BRUTEFORCE_N}, got n={inst.n}")
    p, d, w, s = inst.arrays
    best, order, nodes = _dfs(p, d, w, s, inst.n, prune)
    return OracleResult(int(best), order.copy(), int(nodes))


def candidate_order(seq, move: MoveSpec) -> list[int]:
    """Job order (without the dummy) of the neighbour described by ``move``."""
    jobs = [int(x) for x in seq]
    i, j, l = move.i, move.j, move.l
    if move.kind == "swap":
        jobs[i], jobs[j] = jobs[j], jobs[i]
        return jobs[1:]
    if move.kind == "lblock_fwd":
        block = jobs[i : i + l]
        rest = jobs[:i] + jobs[i + l :]
        # after removing the block, the old position j sits at j - l
        rest[j - l + 1 : j - l + 1] = block
        return rest[1:]
    block = jobs[i : i + l]
    rest = jobs[:i] + jobs[i + l :]
    rest[j:j] = block
    return rest[1:]


def naive_move_cost(inst: Instance, seq, move: MoveSpec) -> int:
    return total_cost(inst, make_sequence(candidate_order(seq, move)))
