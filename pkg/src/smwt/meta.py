"""ILS-RVND, GRASP and VNS drivers, with and without the move filter."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Literal

import numpy as np

from .evaluation import MoveSpec
from .model import EvalState, Instance, make_sequence, recompute_prefixes, total_cost
from .movefilter import (
    FilterState,
    NeighborhoodId,
    build_neighborhoods,
    filter_stats,
    finalize_thresholds,
)
from .search import UniformStream, apply_move, rvnd

GRASP_ALPHAS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)

Mode = Literal["budget", "target", "time_limit"]


@dataclass(frozen=True)
class SearchConfig:
    """Run parameters shared by the three metaheuristics.

    ``ils_iters`` defaults to ``4 n``.  ``restarts`` drives ILS and GRASP,
    ``iterations`` drives VNS.  ``learning_fraction`` is the share of GRASP
    restarts or VNS iterations spent learning; ILS always learns during its
    first restart, which runs ``learning_budget * ils_iters`` iterations.
    """

    theta: float = 0.90
    lengths: tuple[int, ...] = tuple(range(1, 14))
    use_swap: bool = True
    restarts: int = 20
    ils_iters: int | None = None
    iterations: int = 1000
    seed: int = 0
    mode: Mode = "budget"
    target: float | None = None
    time_limit: float | None = None
    fast: bool = True
    diagnostic: bool = False
    learning_fraction: float = 0.05
    learning_budget: float = 0.5
    # keep every threshold at M after learning (soundness checks only)
    force_unfiltered: bool = False
    # time every neighbourhood scan (slower Python loop, same trajectory)
    profile: bool = False

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.ils_iters is not None and self.ils_iters < 1:
            raise ValueError("ils_iters must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.lengths and not self.use_swap:
            raise ValueError("need at least one neighbourhood")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.mode == "target" and self.target is None:
            raise ValueError("target mode needs a target value")
        if self.mode == "time_limit" and self.time_limit is None:
            raise ValueError("time_limit mode needs a time limit")

    @classmethod
    def weighted(cls, **kw) -> "SearchConfig":
        return cls(**kw)

    @classmethod
    def unweighted(cls, **kw) -> "SearchConfig":
        kw.setdefault("theta", 0.75)
        return cls(**kw)

    def budget_iters(self, n: int) -> int:
        return self.ils_iters if self.ils_iters is not None else 4 * n


@dataclass
class RunReport:
    algorithm: str
    best_cost: int
    best_sequence: list[int]
    elapsed: float
    iterations: int
    restarts: int
    time_to_best: float
    filter_stats: list[dict]
    neighborhood_seconds: dict[str, float]
    thresholds: dict[str, int | None]
    history: list[tuple[int, int]] = field(default_factory=list)
    seed: int = 0
    # counters from the moment the thresholds were frozen (empty when never frozen)
    filtered_phase_stats: list[dict] = field(default_factory=list)

    def counters(self) -> dict[str, dict]:
        return {row["neighborhood"]: row for row in self.filter_stats}

    def evaluated_moves(self) -> int:
        return sum(row["admitted"] for row in self.filter_stats)


class _Run:
    """Book-keeping common to all drivers: incumbent, stop rules, timing."""

    def __init__(self, name: str, inst: Instance, cfg: SearchConfig):
        self.name = name
        self.inst = inst
        self.cfg = cfg
        self.hoods = build_neighborhoods(inst.n, cfg.lengths, cfg.use_swap)
        if cfg.fast:
            self.fs = FilterState(self.hoods, learning=True, diagnostic=cfg.diagnostic)
        else:
            self.fs = FilterState.unfiltered(self.hoods, diagnostic=cfg.diagnostic)
        self.start = time.perf_counter()
        self.best_cost: int | None = None
        self.best_seq: np.ndarray | None = None
        self.time_to_best = 0.0
        self.iterations = 0
        self.restarts = 0
        self.history: list[tuple[int, int]] = []
        self.stream: UniformStream | None = None

    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def local_search(self, seq: np.ndarray, state: EvalState, rng) -> None:
        if self.hoods:
            if self.stream is None or self.stream.rng is not rng:
                self.stream = UniformStream(rng)
            rvnd(self.inst, seq, state, self.fs, self.hoods, self.stream, timed=self.cfg.profile)
        self.iterations += 1
        cost = int(state.g[-1])
        if self.best_cost is None or cost < self.best_cost:
            self.best_cost = cost
            self.best_seq = seq.copy()
            self.time_to_best = self.elapsed()
            self.history.append((self.iterations, cost))

    def finish_learning(self) -> None:
        if self.cfg.fast and self.fs.learning:
            finalize_thresholds(self.fs, self.cfg.theta)
            if self.cfg.force_unfiltered:
                self.fs.reset_to_unfiltered()

    def should_stop(self) -> bool:
        if self.best_cost == 0:
            return True
        cfg = self.cfg
        if cfg.mode == "target" and self.best_cost is not None and self.best_cost <= cfg.target:
            return True
        if cfg.time_limit is not None and self.elapsed() >= cfg.time_limit:
            return True
        return False

    def out_of_restarts(self, done: int, limit: int) -> bool:
        # target mode ignores the restart budget unless there is no clock to stop it
        if self.cfg.mode == "target" and self.cfg.time_limit is not None:
            return False
        if self.cfg.mode == "time_limit":
            return False
        return done >= limit

    def report(self) -> RunReport:
        stats = filter_stats(self.fs)
        thresholds = {}
        for v in self.hoods:
            thr = self.fs.thresholds[v]
            thresholds[str(v)] = thr if isinstance(thr, int) else None
        assert self.best_seq is not None
        assert total_cost(self.inst, self.best_seq) == self.best_cost
        return RunReport(
            algorithm=self.name,
            best_cost=int(self.best_cost),
            best_sequence=[int(x) for x in self.best_seq[1:]],
            elapsed=self.elapsed(),
            iterations=self.iterations,
            restarts=self.restarts,
            time_to_best=self.time_to_best,
            filter_stats=[s.as_dict() for s in stats],
            neighborhood_seconds={s.neighborhood: s.seconds for s in stats},
            thresholds=thresholds,
            history=self.history,
            seed=self.cfg.seed,
            filtered_phase_stats=(
                [s.as_dict() for s in filter_stats(self.fs, "filtered")] if self.fs.finalized else []
            ),
        )


# --------------------------------------------------------------------------
# constructions and perturbations


def construct_randomized_insertion(inst: Instance, rng: np.random.Generator, k: int = 3) -> np.ndarray:
    """Append jobs one at a time, each drawn among the ``k`` unscheduled jobs
    with the earliest due dates (ties broken by job id)."""
    remaining = sorted(range(1, inst.n + 1), key=lambda j: (int(inst.d[j - 1]), j))
    order = []
    while remaining:
        pick = int(rng.integers(min(k, len(remaining))))
        order.append(remaining.pop(pick))
    return make_sequence(order)


def construct_grasp(inst: Instance, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Greedy randomized construction.

    The cost increment of a candidate is its weighted tardiness when appended
    after the last scheduled job; the restricted candidate list keeps the
    candidates within ``alpha`` of the cheapest.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    p, d, w, s = inst.arrays
    remaining = np.arange(1, inst.n + 1)
    order = []
    last = 0
    t = 0
    while remaining.size:
        finish = t + s[last, remaining] + p[remaining]
        incr = w[remaining] * np.maximum(finish - d[remaining], 0)
        lo, hi = incr.min(), incr.max()
        rcl = np.flatnonzero(incr <= lo + alpha * (hi - lo))
        pick = rcl[int(rng.integers(rcl.size))]
        last = int(remaining[pick])
        t = int(finish[pick])
        order.append(last)
        remaining = np.delete(remaining, pick)
    return make_sequence(order)


def perturb_double_bridge(seq: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Split positions ``1..n`` as A|B|C|D (B, C non-empty) and return A C B D."""
    n = len(seq) - 1
    out = seq.copy()
    if n < 4:
        if n >= 2:
            k = int(rng.integers(1, n))
            out[k], out[k + 1] = seq[k + 1], seq[k]
        return out
    x, y, z = np.sort(rng.choice(np.arange(1, n + 2), size=3, replace=False))
    out[x:z] = np.concatenate((seq[y:z], seq[x:y]))
    return out


def random_move(n: int, v: NeighborhoodId, rng: np.random.Generator) -> MoveSpec:
    """A uniformly random move of neighbourhood ``v``."""
    if v.kind == "swap":
        i, j = sorted(int(x) for x in rng.choice(np.arange(1, n + 1), size=2, replace=False))
        return MoveSpec("swap", i, j)
    l = v.l
    m = n - l
    # both directions have m (m + 1) / 2 moves; draw a pair a <= b in 1..m
    while True:
        a, b = (int(x) for x in rng.integers(1, m + 1, size=2))
        if a <= b:
            break
    if rng.integers(2) == 0:
        return MoveSpec("lblock_fwd", a, b + l, l)
    return MoveSpec("lblock_bwd", b + 1, a, l)


# --------------------------------------------------------------------------
# drivers


def ils_rvnd(inst: Instance, cfg: SearchConfig, rng: np.random.Generator | None = None) -> RunReport:
    """Multi-restart iterated local search with RVND (filtered when ``cfg.fast``)."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    run = _Run("ils", inst, cfg)
    budget = cfg.budget_iters(inst.n)
    restart = 0
    while not run.out_of_restarts(restart, cfg.restarts):
        learning = cfg.fast and restart == 0
        limit = int(budget * cfg.learning_budget) if learning else budget
        restart += 1
        run.restarts = restart
        seq = construct_randomized_insertion(inst, rng)
        state = recompute_prefixes(inst, seq)
        inc_seq, inc_state = seq.copy(), state.copy()
        stall = 0
        while stall <= limit:
            run.local_search(seq, state, rng)
            if state.g[-1] < inc_state.g[-1]:
                inc_seq, inc_state = seq.copy(), state.copy()
                stall = 0
            if run.should_stop():
                return run.report()
            seq = perturb_double_bridge(inc_seq, rng)
            state = recompute_prefixes(inst, seq)
            stall += 1
        if learning:
            run.finish_learning()
    return run.report()


def grasp(inst: Instance, cfg: SearchConfig, rng: np.random.Generator | None = None) -> RunReport:
    """GRASP with RVND; the first ``learning_fraction`` of restarts learn."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    run = _Run("grasp", inst, cfg)
    learn = max(1, round(cfg.learning_fraction * cfg.restarts))
    restart = 0
    while not run.out_of_restarts(restart, cfg.restarts):
        if restart == learn:
            run.finish_learning()
        restart += 1
        run.restarts = restart
        alpha = GRASP_ALPHAS[int(rng.integers(len(GRASP_ALPHAS)))]
        seq = construct_grasp(inst, alpha, rng)
        state = recompute_prefixes(inst, seq)
        run.local_search(seq, state, rng)
        if run.should_stop():
            break
    return run.report()


def vns(inst: Instance, cfg: SearchConfig, rng: np.random.Generator | None = None) -> RunReport:
    """Basic VNS: shake the incumbent with one random move of neighbourhood
    ``k``, descend with RVND, move on to the next ``k`` when nothing improves."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    run = _Run("vns", inst, cfg)
    learn = max(1, round(cfg.learning_fraction * cfg.iterations))
    seq = construct_randomized_insertion(inst, rng)
    state = recompute_prefixes(inst, seq)
    run.local_search(seq, state, rng)
    inc_seq, inc_state = seq, state
    run.restarts = 1
    k = 0
    it = 1
    hoods = run.hoods
    while not run.should_stop() and not run.out_of_restarts(it, cfg.iterations) and hoods:
        if it == learn:
            run.finish_learning()
        it += 1
        seq = inc_seq.copy()
        state = inc_state.copy()
        apply_move(seq, state, random_move(inst.n, hoods[k], rng), inst)
        run.local_search(seq, state, rng)
        if state.g[-1] < inc_state.g[-1]:
            inc_seq, inc_state = seq, state
            k = 0
        else:
            k = (k + 1) % len(hoods)
    return run.report()


ALGORITHMS = {"ils": ils_rvnd, "grasp": grasp, "vns": vns}


def solve(inst: Instance, algo: str, cfg: SearchConfig, rng: np.random.Generator | None = None) -> RunReport:
    try:
        fn = ALGORITHMS[algo]
    except KeyError:
        raise ValueError(f"unknown algorithm {algo!r}; choose from {sorted(ALGORITHMS)}") from None
    return fn(inst, cfg, rng)


def config_dict(cfg: SearchConfig) -> dict:
    out = asdict(cfg)
    out["lengths"] = list(cfg.lengths)
    return out


def with_seed(cfg: SearchConfig, seed: int) -> SearchConfig:
    return replace(cfg, seed=seed)
