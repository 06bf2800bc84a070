"""Setup-variation move filter.

Every neighbourhood ``v`` gets a threshold on the setup variation of its
moves.  While learning, no threshold applies and the setup variation of each
move that improves the best candidate of a scan is stored.  Finalizing sorts
each list and picks the element at 1-based position ``floor(theta * len)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np


class _NoLimit:
    """Threshold sentinel meaning "evaluate every move"."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "M"

    def __reduce__(self):
        return (_NoLimit, ())


M = _NoLimit()


class FilterConfigError(KeyError):
    pass


class FilterStateError(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class NeighborhoodId:
    """``swap`` or ``lblock`` with block length ``l``."""

    kind: str
    l: int = 0

    @classmethod
    def swap(cls) -> "NeighborhoodId":
        return cls("swap", 0)

    @classmethod
    def lblock(cls, l: int) -> "NeighborhoodId":
        return cls("lblock", l)

    def __str__(self) -> str:
        return "swap" if self.kind == "swap" else f"lblock{self.l}"


SWAP_ID = NeighborhoodId.swap()

# counter columns
SEEN, ADMITTED, REJECTED, ADMITTED_IMPROVING, REJECTED_IMPROVING = range(5)


def build_neighborhoods(n: int, lengths: Iterable[int], use_swap: bool = True) -> list[NeighborhoodId]:
    """Neighbourhood list in the fixed order swap, lblock(1), lblock(2), ...

    Block lengths that leave no legal move for ``n`` jobs are dropped.
    """
    hoods = [SWAP_ID] if use_swap and n >= 2 else []
    hoods += [NeighborhoodId.lblock(l) for l in sorted(set(lengths)) if 1 <= l <= n - 1]
    return hoods


@dataclass
class FilterState:
    neighborhoods: list[NeighborhoodId]
    learning: bool = True
    diagnostic: bool = False
    delta_lists: dict[NeighborhoodId, list[int]] = field(default_factory=dict)
    thresholds: dict[NeighborhoodId, object] = field(default_factory=dict)
    finalized: bool = False

    def __post_init__(self):
        self.index = {v: k for k, v in enumerate(self.neighborhoods)}
        for v in self.neighborhoods:
            self.delta_lists.setdefault(v, [])
            self.thresholds.setdefault(v, M)
        self.counters = np.zeros((len(self.neighborhoods), 5), dtype=np.int64)
        self.seconds = np.zeros(len(self.neighborhoods))
        # counters and seconds as they stood when the thresholds were frozen
        self.learning_counters: np.ndarray | None = None
        self.learning_seconds: np.ndarray | None = None

    @classmethod
    def unfiltered(cls, neighborhoods, diagnostic: bool = False) -> "FilterState":
        """Thresholds fixed at ``M`` and nothing is ever recorded."""
        return cls(list(neighborhoods), learning=False, diagnostic=diagnostic)

    def _require(self, v: NeighborhoodId) -> int:
        try:
            return self.index[v]
        except KeyError:
            raise FilterConfigError(f"neighbourhood {v} is not configured") from None

    def limit(self, v: NeighborhoodId) -> tuple[bool, int]:
        """``(limited, threshold)`` in the form the scan kernels take."""
        thr = self.thresholds[v]
        if self.learning or thr is M:
            return False, 0
        return True, int(thr)

    def reset_to_unfiltered(self) -> None:
        for v in self.neighborhoods:
            self.thresholds[v] = M


def admits(fs: FilterState, v: NeighborhoodId, delta_s: int) -> bool:
    fs._require(v)
    thr = fs.thresholds[v]
    if fs.learning or thr is M:
        return True
    return delta_s <= thr


def record_improvement(fs: FilterState, v: NeighborhoodId, delta_s: int) -> None:
    fs._require(v)
    if not fs.learning:
        raise FilterStateError("setup variations can only be recorded while learning")
    fs.delta_lists[v].append(int(delta_s))


def record_many(fs: FilterState, v: NeighborhoodId, deltas: np.ndarray) -> None:
    if len(deltas):
        if not fs.learning:
            raise FilterStateError("setup variations can only be recorded while learning")
        fs.delta_lists[v].extend(int(x) for x in deltas)


def threshold_position(theta: float, size: int) -> int:
    """1-based position ``floor(theta * size)`` clamped to ``[1, size]``."""
    pos = math.floor(Fraction(repr(float(theta))) * size)
    return min(max(pos, 1), size)


def finalize_thresholds(fs: FilterState, theta: float) -> None:
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if fs.finalized or not fs.learning:
        raise FilterStateError("thresholds are already frozen")
    for v in fs.neighborhoods:
        deltas = sorted(fs.delta_lists[v])
        fs.delta_lists[v] = deltas
        if deltas:
            fs.thresholds[v] = deltas[threshold_position(theta, len(deltas)) - 1]
    fs.learning = False
    fs.finalized = True
    fs.learning_counters = fs.counters.copy()
    fs.learning_seconds = fs.seconds.copy()


@dataclass(frozen=True)
class NeighborhoodStats:
    neighborhood: str
    seen: int
    admitted: int
    rejected: int
    admitted_improving: int
    rejected_improving: int
    seconds: float

    @property
    def skipped_pct(self) -> float:
        return 100.0 * self.rejected / self.seen if self.seen else 0.0

    @property
    def lost_improving_pct(self) -> float | None:
        improving = self.admitted_improving + self.rejected_improving
        return 100.0 * self.rejected_improving / improving if improving else None

    def as_dict(self) -> dict:
        return {
            "neighborhood": self.neighborhood,
            "seen": self.seen,
            "admitted": self.admitted,
            "rejected": self.rejected,
            "admitted_improving": self.admitted_improving,
            "rejected_improving": self.rejected_improving,
            "skipped_pct": self.skipped_pct,
            "lost_improving_pct": self.lost_improving_pct,
        }


def _stats_row(name: str, row, seconds: float) -> NeighborhoodStats:
    return NeighborhoodStats(name, *(int(x) for x in row), seconds=float(seconds))


def _phase(fs: FilterState, phase: str) -> tuple[np.ndarray, np.ndarray]:
    if phase == "all":
        return fs.counters, fs.seconds
    if phase == "filtered":
        if fs.learning_counters is None:
            return np.zeros_like(fs.counters), np.zeros_like(fs.seconds)
        return fs.counters - fs.learning_counters, fs.seconds - fs.learning_seconds
    raise ValueError(f"phase must be 'all' or 'filtered', got {phase!r}")


def filter_stats(fs: FilterState, phase: str = "all") -> list[NeighborhoodStats]:
    """Per-neighbourhood counters; ``phase="filtered"`` counts only what
    happened after the thresholds were frozen."""
    counters, seconds = _phase(fs, phase)
    return [_stats_row(str(v), counters[k], seconds[k]) for k, v in enumerate(fs.neighborhoods)]


def total_stats(fs: FilterState, phase: str = "all") -> NeighborhoodStats:
    counters, seconds = _phase(fs, phase)
    return _stats_row("all", counters.sum(axis=0), seconds.sum())
