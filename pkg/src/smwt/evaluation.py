"""Incremental move evaluation through block decomposition.

A neighbour of the current sequence is a concatenation of a few blocks of
consecutive jobs taken from the current sequence.  Its cost is the prefix
cost ``g[k]`` of the untouched head plus the tardiness of every following
block, computed while a running completion time is carried from block to
block.  Setup variations of every move touch at most eight matrix cells.

Numba kernels do the arithmetic; the functions without a leading underscore
are the Python-facing API and accept :class:`~smwt.model.Instance` objects.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numba
import numpy as np

from .model import EvalState, Instance

SWAP = 0
FWD = 1
BWD = 2

KIND_CODES = {"swap": SWAP, "lblock_fwd": FWD, "lblock_bwd": BWD}

# Costs are non-negative, so -1 marks an evaluation cut short by its cutoff.
PRUNED = -1
NO_CUTOFF = np.iinfo(np.int64).max


class InvalidMoveError(ValueError):
    pass


@dataclass(frozen=True)
class BlockSpan:
    pred_pos: int
    first_pos: int
    last_pos: int


@dataclass(frozen=True)
class MoveSpec:
    kind: Literal["swap", "lblock_fwd", "lblock_bwd"]
    i: int
    j: int
    l: int = 1

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    def is_valid(self, n: int) -> bool:
        i, j, l = self.i, self.j, self.l
        if self.kind == "swap":
            return l == 1 and 1 <= i < j <= n
        if self.kind == "lblock_fwd":
            return l >= 1 and i >= 1 and i + l <= j <= n
        if self.kind == "lblock_bwd":
            return l >= 1 and 2 <= i <= n - l + 1 and 1 <= j <= i - 1
        return False

    def check(self, n: int) -> None:
        if not self.is_valid(n):
            raise InvalidMoveError(f"{self} is not a valid move for n={n}")

    def first_touched(self) -> int:
        """Smallest position whose job changes."""
        return self.j if self.kind == "lblock_bwd" else self.i


def materialize(seq: np.ndarray, move: MoveSpec) -> np.ndarray:
    """Return the candidate sequence produced by ``move`` (``seq`` is untouched)."""
    i, j, l = move.i, move.j, move.l
    out = seq.copy()
    if move.kind == "swap":
        out[i], out[j] = seq[j], seq[i]
    elif move.kind == "lblock_fwd":
        out[i : j - l + 1] = seq[i + l : j + 1]
        out[j - l + 1 : j + 1] = seq[i : i + l]
    else:
        out[j : j + l] = seq[i : i + l]
        out[j + l : i + l] = seq[j:i]
    return out


# --------------------------------------------------------------------------
# kernels


@numba.njit(cache=True)
def _block(p, d, w, s, seq, prev, a, b, t, acc, cutoff):
    """Add the tardiness of positions ``a..b`` placed after job ``prev``.

    Returns ``(acc, t)``; ``acc`` is ``PRUNED`` once it reaches ``cutoff``.
    """
    for k in range(a, b + 1):
        job = seq[k]
        t += s[prev, job] + p[job]
        if t > d[job]:
            acc += w[job] * (t - d[job])
            if acc >= cutoff:
                return PRUNED, t
        prev = job
    return acc, t


@numba.njit(cache=True)
def _blocks(p, d, w, s, seq, C, g, h, head, nb, prevs, firsts, lasts, cutoff):
    """Cost of ``seq[1..head]`` followed by blocks ``firsts[q]..lasts[q]``,
    block ``q`` placed after job ``prevs[q]``; ``PRUNED`` once ``cutoff`` is reached.

    Every block keeps its original internal order, so after its first job
    all completions move by the same ``delta`` against ``C``.  Jobs that were
    late stay late by exactly ``delta`` more as long as they remain late,
    hence with ``rest = g[b] - g[a]`` and ``late = h[b] - h[a]`` the rest of
    the block costs at least ``rest + delta * late`` (and at least zero).
    The bound is exact when ``delta == 0`` or when ``delta < 0`` and
    ``rest == 0``.  A first O(nb) pass sums these bounds; the second pass
    walks the jobs of the inexact blocks.
    """
    acc = g[head]
    if acc >= cutoff:
        return PRUNED
    t = C[head]
    exact = True
    for q in range(nb):
        a = firsts[q]
        b = lasts[q]
        if a > b:
            continue
        job = seq[a]
        t += s[prevs[q], job] + p[job]
        if t > d[job]:
            acc += w[job] * (t - d[job])
        delta = t - C[a]
        rest = g[b] - g[a]
        if delta != 0:
            if delta > 0 or rest > 0:
                exact = False
            rest += delta * (h[b] - h[a])
        if rest > 0:
            acc += rest
        if acc >= cutoff:
            return PRUNED
        t = C[b] + delta
    if exact:
        return acc

    acc = g[head]
    t = C[head]
    for q in range(nb):
        a = firsts[q]
        b = lasts[q]
        if a > b:
            continue
        job = seq[a]
        t += s[prevs[q], job] + p[job]
        if t > d[job]:
            acc += w[job] * (t - d[job])
            if acc >= cutoff:
                return PRUNED
        delta = t - C[a]
        rest = g[b] - g[a]
        if delta == 0 or (delta < 0 and rest == 0):
            acc += rest
            if acc >= cutoff:
                return PRUNED
            t = C[b] + delta
            continue
        prev = job
        for k in range(a + 1, b + 1):
            job = seq[k]
            t += s[prev, job] + p[job]
            if t > d[job]:
                acc += w[job] * (t - d[job])
                if acc >= cutoff:
                    return PRUNED
            prev = job
    return acc


@numba.njit(cache=True)
def _swap_cost(p, d, w, s, seq, C, g, h, i, j, cutoff):
    n = seq.shape[0] - 1
    # the job now ahead of position j is seq[j-1], or seq[j] itself when adjacent
    before_i = seq[j - 1] if j > i + 1 else seq[j]
    return _blocks(
        p, d, w, s, seq, C, g, h, i - 1, 4,
        (seq[i - 1], seq[j], before_i, seq[i]),
        (j, i + 1, i, j + 1),
        (j, j - 1, i, n),
        cutoff,
    )


@numba.njit(cache=True)
def _fwd_cost(p, d, w, s, seq, C, g, h, i, j, l, cutoff):
    n = seq.shape[0] - 1
    return _blocks(
        p, d, w, s, seq, C, g, h, i - 1, 3,
        (seq[i - 1], seq[j], seq[i + l - 1]),
        (i + l, i, j + 1),
        (j, i + l - 1, n),
        cutoff,
    )


@numba.njit(cache=True)
def _bwd_cost(p, d, w, s, seq, C, g, h, i, j, l, cutoff):
    n = seq.shape[0] - 1
    return _blocks(
        p, d, w, s, seq, C, g, h, j - 1, 3,
        (seq[j - 1], seq[i + l - 1], seq[i - 1]),
        (i, j, i + l),
        (i + l - 1, i - 1, n),
        cutoff,
    )


@numba.njit(cache=True)
def _edge(s, a, b):
    # b < 0 stands for "no successor" past the end of the sequence
    if b < 0:
        return 0
    return s[a, b]


@numba.njit(cache=True)
def _at(seq, n, k):
    if k > n:
        return -1
    return seq[k]


@numba.njit(cache=True)
def _swap_delta(s, seq, n, i, j):
    a = seq[i - 1]
    x = seq[i]
    z = seq[j]
    v = _at(seq, n, j + 1)
    if j == i + 1:
        return (
            -s[a, x] - s[x, z] - _edge(s, z, v)
            + s[a, z] + s[z, x] + _edge(s, x, v)
        )
    y = seq[i + 1]
    u = seq[j - 1]
    return (
        -s[a, x] - s[x, y] - s[u, z] - _edge(s, z, v)
        + s[a, z] + s[z, y] + s[u, x] + _edge(s, x, v)
    )


@numba.njit(cache=True)
def _fwd_delta(s, seq, n, i, j, l):
    a = seq[i - 1]
    x = seq[i]
    e = seq[i + l - 1]
    f = seq[i + l]
    z = seq[j]
    v = _at(seq, n, j + 1)
    return -s[a, x] - s[e, f] - _edge(s, z, v) + s[a, f] + s[z, x] + _edge(s, e, v)


@numba.njit(cache=True)
def _bwd_delta(s, seq, n, i, j, l):
    u = seq[j - 1]
    y = seq[j]
    c = seq[i - 1]
    x = seq[i]
    e = seq[i + l - 1]
    f = _at(seq, n, i + l)
    return -s[u, y] - s[c, x] - _edge(s, e, f) + s[u, x] + s[e, y] + _edge(s, c, f)


@numba.njit(cache=True)
def _move_delta(s, seq, kind, i, j, l):
    n = seq.shape[0] - 1
    if kind == SWAP:
        return _swap_delta(s, seq, n, i, j)
    if kind == FWD:
        return _fwd_delta(s, seq, n, i, j, l)
    return _bwd_delta(s, seq, n, i, j, l)


@numba.njit(cache=True)
def _move_cost(p, d, w, s, seq, C, g, h, kind, i, j, l, cutoff):
    if kind == SWAP:
        return _swap_cost(p, d, w, s, seq, C, g, h, i, j, cutoff)
    if kind == FWD:
        return _fwd_cost(p, d, w, s, seq, C, g, h, i, j, l, cutoff)
    return _bwd_cost(p, d, w, s, seq, C, g, h, i, j, l, cutoff)


@numba.njit(cache=True)
def _span_cost(p, d, w, s, seq, pred_pos, a, b, t):
    return _block(p, d, w, s, seq, seq[pred_pos], a, b, t, 0, NO_CUTOFF)


# --------------------------------------------------------------------------
# Python API


def comp_cost_block(inst: Instance, seq: np.ndarray, span: BlockSpan, running_completion: int) -> tuple[int, int]:
    """Weighted tardiness of ``span`` when it follows ``seq[span.pred_pos]``.

    ``running_completion`` is the completion time of that predecessor.
    Returns ``(cost, completion time of the last job of the span)``; an
    empty span returns ``(0, running_completion)``.
    """
    p, d, w, s = inst.arrays
    cost, t = _span_cost(p, d, w, s, seq, span.pred_pos, span.first_pos, span.last_pos, running_completion)
    return int(cost), int(t)


def comp_cost_swap(inst: Instance, seq: np.ndarray, state: EvalState, i: int, j: int) -> int:
    p, d, w, s = inst.arrays
    return int(_swap_cost(p, d, w, s, seq, state.C, state.g, state.h, i, j, NO_CUTOFF))


def comp_cost_lblock_fwd(inst: Instance, seq: np.ndarray, state: EvalState, i: int, j: int, l: int) -> int:
    p, d, w, s = inst.arrays
    return int(_fwd_cost(p, d, w, s, seq, state.C, state.g, state.h, i, j, l, NO_CUTOFF))


def comp_cost_lblock_bwd(inst: Instance, seq: np.ndarray, state: EvalState, i: int, j: int, l: int) -> int:
    p, d, w, s = inst.arrays
    return int(_bwd_cost(p, d, w, s, seq, state.C, state.g, state.h, i, j, l, NO_CUTOFF))


def move_cost(inst: Instance, seq: np.ndarray, state: EvalState, move: MoveSpec) -> int:
    p, d, w, s = inst.arrays
    return int(_move_cost(p, d, w, s, seq, state.C, state.g, state.h, move.code, move.i, move.j, move.l, NO_CUTOFF))


def cost_with_cutoff(inst: Instance, seq: np.ndarray, state: EvalState, move: MoveSpec, cutoff: int | float) -> int | None:
    """Like :func:`move_cost` but gives up (returns ``None``) once the
    partial cost reaches ``cutoff``.  A returned number is always exact."""
    if cutoff == float("inf") or cutoff >= NO_CUTOFF:
        cut = NO_CUTOFF
    else:
        cut = int(cutoff)
    p, d, w, s = inst.arrays
    res = _move_cost(p, d, w, s, seq, state.C, state.g, state.h, move.code, move.i, move.j, move.l, cut)
    return None if res == PRUNED else int(res)


def setup_variation(inst: Instance, seq: np.ndarray, move: MoveSpec) -> int:
    """Total setup of the candidate minus total setup of ``seq``."""
    return int(_move_delta(inst.arrays[3], seq, move.code, move.i, move.j, move.l))
