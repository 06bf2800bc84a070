"""Problem data for 1|s_ij|sum w_j T_j: instances, sequences and prefix arrays.

A sequence is an ``int64`` array of length ``n + 1`` whose entry 0 is the
dummy job 0; entries ``1..n`` are a permutation of the job ids ``1..n``.
Everything is integer valued, so costs are compared exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence as Seq

import numba
import numpy as np


class InvalidInstanceError(ValueError):
    """Raised by :meth:`Instance.checked` when validation fails."""

    def __init__(self, report: "ValidationReport"):
        super().__init__("; ".join(report.errors))
        self.report = report


def _as_int_array(values):
    try:
        return np.asarray(values, dtype=np.int64)
    except (ValueError, TypeError):
        return values


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable problem instance.

    ``p``, ``d`` and ``w`` hold the data of jobs ``1..n`` (so ``p[0]`` is
    job 1). ``s[i][j]`` is the setup incurred when job ``j`` directly
    follows job ``i``; row 0 is the dummy job that starts the schedule.
    """

    n: int
    p: np.ndarray
    d: np.ndarray
    w: np.ndarray
    s: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for attr in ("p", "d", "w", "s"):
            object.__setattr__(self, attr, _as_int_array(getattr(self, attr)))

    @classmethod
    def checked(cls, p, d, w, s, name: str = "") -> "Instance":
        inst = cls(len(p), p, d, w, s, name=name)
        report = validate_instance(inst)
        if not report.ok:
            raise InvalidInstanceError(report)
        return inst

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.p, other.p)
            and np.array_equal(self.d, other.d)
            and np.array_equal(self.w, other.w)
            and np.array_equal(self.s, other.s)
        )

    __hash__ = None

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``(p, d, w, s)`` indexed by job id, with a zero entry for the dummy."""
        pad = np.zeros(1, dtype=np.int64)
        p1 = np.ascontiguousarray(np.concatenate((pad, self.p)))
        d1 = np.ascontiguousarray(np.concatenate((pad, self.d)))
        w1 = np.ascontiguousarray(np.concatenate((pad, self.w)))
        return p1, d1, w1, np.ascontiguousarray(self.s)

    def with_unit_weights(self) -> "Instance":
        return Instance(self.n, self.p, self.d, np.ones(self.n, dtype=np.int64), self.s, name=self.name)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok


def validate_instance(inst: Instance) -> ValidationReport:
    """Check dimensions and non-negativity; collects every violation."""
    report = ValidationReport()
    n = inst.n
    if not isinstance(n, (int, np.integer)) or n < 1:
        report.errors.append(f"n must be a positive integer, got {n!r}")
        return report
    for name in ("p", "d", "w"):
        arr = getattr(inst, name)
        if not isinstance(arr, np.ndarray) or arr.ndim != 1:
            report.errors.append(f"{name}: expected a flat integer vector")
            continue
        if arr.shape[0] != n:
            report.errors.append(f"{name}: expected {n} entries, got {arr.shape[0]}")
        for idx in np.flatnonzero(arr < 0):
            report.errors.append(f"{name}[{idx + 1}] is negative ({arr[idx]})")
    s = inst.s
    if not isinstance(s, np.ndarray) or s.ndim != 2:
        rows = len(s) if hasattr(s, "__len__") else "?"
        report.errors.append(f"s: setup matrix must be rectangular (n+1)x(n+1), got {rows} ragged rows")
    else:
        if s.shape != (n + 1, n + 1):
            report.errors.append(
                f"s: setup matrix must be {n + 1}x{n + 1}, got {s.shape[0]}x{s.shape[1]}"
            )
        for i, j in zip(*np.nonzero(s < 0)):
            report.errors.append(f"s[{i}][{j}] is negative ({s[i, j]})")
    return report


def make_sequence(order: Seq[int]) -> np.ndarray:
    """Prefix the dummy job to a job order."""
    seq = np.zeros(len(order) + 1, dtype=np.int64)
    seq[1:] = order
    return seq


def is_valid_sequence(inst: Instance, seq: np.ndarray) -> bool:
    return (
        len(seq) == inst.n + 1
        and seq[0] == 0
        and np.array_equal(np.sort(seq[1:]), np.arange(1, inst.n + 1))
    )


def total_cost(inst: Instance, seq: Seq[int]) -> int:
    """Total weighted tardiness by a plain left-to-right pass."""
    p, d, w, s = inst.p, inst.d, inst.w, inst.s
    t = 0
    cost = 0
    prev = 0
    for job in seq[1:]:
        job = int(job)
        t += int(s[prev, job]) + int(p[job - 1])
        late = t - int(d[job - 1])
        if late > 0:
            cost += int(w[job - 1]) * late
        prev = job
    return cost


def total_setup(inst: Instance, seq: Seq[int]) -> int:
    return sum(int(inst.s[seq[k - 1], seq[k]]) for k in range(1, len(seq)))


@dataclass
class EvalState:
    """Per-position prefix arrays of the current sequence.

    ``C`` holds completion times, ``g`` the cumulated weighted tardiness and
    ``h`` the cumulated weight of the late jobs (used for lower bounds).
    """

    C: np.ndarray
    g: np.ndarray
    h: np.ndarray

    @property
    def cost(self) -> int:
        return int(self.g[-1])

    def copy(self) -> "EvalState":
        return EvalState(self.C.copy(), self.g.copy(), self.h.copy())


@numba.njit(cache=True)
def fill_prefixes(p, d, w, s, seq, C, g, h, start):
    """Recompute ``C[k]``, ``g[k]`` and ``h[k]`` for ``k >= start`` from position ``start - 1``."""
    n = seq.shape[0] - 1
    if start < 1:
        start = 1
    t = C[start - 1]
    acc = g[start - 1]
    late = h[start - 1]
    for k in range(start, n + 1):
        job = seq[k]
        t += s[seq[k - 1], job] + p[job]
        if t > d[job]:
            acc += w[job] * (t - d[job])
            late += w[job]
        C[k] = t
        g[k] = acc
        h[k] = late


def recompute_prefixes(inst: Instance, seq: np.ndarray) -> EvalState:
    n = len(seq) - 1
    C = np.zeros(n + 1, dtype=np.int64)
    g = np.zeros(n + 1, dtype=np.int64)
    h = np.zeros(n + 1, dtype=np.int64)
    p, d, w, s = inst.arrays
    fill_prefixes(p, d, w, s, np.ascontiguousarray(seq, dtype=np.int64), C, g, h, 1)
    return EvalState(C, g, h)
