"""Gaps to reference values and their aggregation over a benchmark set."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence


@dataclass(frozen=True)
class InstanceGap:
    instance: str
    reference: int | None
    best_cost: int
    avg_cost: float
    worst_cost: int
    # percent; None when the reference is missing or zero
    best_gap: float | None
    avg_gap: float | None
    worst_gap: float | None
    avg_time: float | None = None
    excluded: str | None = None


@dataclass
class GapStats:
    instances: list[InstanceGap]
    mean_best_gap: float | None
    geo_avg_gap: float | None
    geo_worst_gap: float | None
    # zero gaps left out of the geometric means
    zero_avg_gaps: int
    zero_worst_gaps: int
    mean_time: float | None
    excluded: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


def gap(cost: float, reference: int) -> float:
    return 100.0 * (cost - reference) / reference


def geometric_mean(values: Sequence[float]) -> float | None:
    """Geometric mean of the strictly positive entries; zeros are skipped."""
    pos = [float(v) for v in values if v > 0]
    if not pos:
        return None
    prod = math.prod(pos)
    if prod == 0.0 or math.isinf(prod):
        return math.exp(math.fsum(math.log(v) for v in pos) / len(pos))
    return prod ** (1.0 / len(pos))


def compute_gaps(
    results: Mapping[str, Sequence[int]],
    reference: Mapping[str, int | None],
    times: Mapping[str, Sequence[float]] | None = None,
) -> GapStats:
    """Per-instance best, average and worst gaps plus their aggregates.

    The best gaps are averaged arithmetically; average and worst gaps use a
    geometric mean over the strictly positive values.  An instance whose
    reference is missing or zero has no percentage gap and is listed in
    ``excluded``.
    """
    rows: list[InstanceGap] = []
    excluded: list[str] = []
    for name, costs in results.items():
        if not costs:
            raise ValueError(f"no runs for instance {name!r}")
        best, worst = min(costs), max(costs)
        avg = math.fsum(costs) / len(costs)
        ref = reference.get(name)
        t = None
        if times is not None and times.get(name):
            t = math.fsum(times[name]) / len(times[name])
        if ref is None or ref == 0:
            why = "missing reference" if ref is None else "zero reference"
            excluded.append(name)
            rows.append(InstanceGap(name, ref, best, avg, worst, None, None, None, t, why))
            continue
        rows.append(InstanceGap(name, ref, best, avg, worst, gap(best, ref), gap(avg, ref), gap(worst, ref), t))

    kept = [r for r in rows if r.excluded is None]
    avg_gaps = [r.avg_gap for r in kept]
    worst_gaps = [r.worst_gap for r in kept]
    timed = [r.avg_time for r in rows if r.avg_time is not None]
    return GapStats(
        instances=rows,
        mean_best_gap=math.fsum(r.best_gap for r in kept) / len(kept) if kept else None,
        geo_avg_gap=geometric_mean(avg_gaps),
        geo_worst_gap=geometric_mean(worst_gaps),
        zero_avg_gaps=sum(1 for g in avg_gaps if g <= 0),
        zero_worst_gaps=sum(1 for g in worst_gaps if g <= 0),
        mean_time=math.fsum(timed) / len(timed) if timed else None,
        excluded=excluded,
    )
