"""Seeded batch runs described by a JSON manifest.

Example manifest::

    {
      "name": "small",
      "algorithm": "ils",
      "seeds": [1, 2, 3],
      "config": {"theta": 0.9, "lmax": 13, "restarts": 5, "mode": "budget"},
      "instances": [
        {"path": "inst/a.txt", "dialect": "canonical", "reference": 1234},
        {"generate": {"n": 30, "tau": 0.6, "r": 0.25, "eta": 0.25, "seed": 7}}
      ],
      "output": "out/small"
    }

``config.target`` may be a number, ``"inf"``, or ``"reference"`` (the
instance's reference value).  Relative paths are resolved against the
manifest's directory.  ``results.json`` holds everything that is a function
of the seeds only; wall-clock figures go to ``timings.json`` and the CSV
summaries.
"""
from __future__ import annotations

import csv
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .io import GeneratorConfig, InstanceParseError, generate_instance, read_instance
from .meta import ALGORITHMS, RunReport, SearchConfig, config_dict, solve
from .model import Instance, InvalidInstanceError, make_sequence, total_cost, validate_instance
from .stats import compute_gaps

SCHEMA_VERSION = 1


class ManifestError(ValueError):
    pass


@dataclass
class InstanceEntry:
    name: str
    instance: Instance
    reference: int | None = None


@dataclass
class Manifest:
    name: str
    algorithm: str
    seeds: list[int]
    config: SearchConfig
    instances: list[InstanceEntry]
    output: Path | None
    target: str | float | None = None
    jobs: int = 1
    raw: dict[str, Any] = field(default_factory=dict)


_CONFIG_KEYS = {f.name for f in fields(SearchConfig)} | {"lmax"}
_TOP_KEYS = {"name", "algorithm", "seeds", "runs", "config", "instances", "output", "jobs"}


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})") from None
    return parse_manifest(raw, base=path.parent)


def parse_manifest(raw: dict, base: Path | str = ".") -> Manifest:
    """Validate everything (including every instance file) before any run."""
    base = Path(base)
    if not isinstance(raw, dict):
        raise ManifestError("manifest must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ManifestError(f"unknown manifest fields: {sorted(unknown)}")

    algorithm = raw.get("algorithm", "ils")
    if algorithm not in ALGORITHMS:
        raise ManifestError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}")

    if "seeds" in raw and "runs" in raw:
        raise ManifestError("give either seeds or runs, not both")
    if "seeds" in raw:
        seeds = raw["seeds"]
        if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
            raise ManifestError("seeds must be a non-empty list of integers")
    else:
        runs = raw.get("runs", 10)
        if not isinstance(runs, int) or runs < 1:
            raise ManifestError("runs must be a positive integer")
        seeds = list(range(1, runs + 1))

    cfg_raw = dict(raw.get("config", {}))
    unknown = set(cfg_raw) - _CONFIG_KEYS
    if unknown:
        raise ManifestError(f"unknown config fields: {sorted(unknown)}")
    if "lmax" in cfg_raw:
        if "lengths" in cfg_raw:
            raise ManifestError("give either lmax or lengths, not both")
        cfg_raw["lengths"] = tuple(range(1, int(cfg_raw.pop("lmax")) + 1))
    elif "lengths" in cfg_raw:
        cfg_raw["lengths"] = tuple(cfg_raw["lengths"])
    target = cfg_raw.pop("target", None)
    if isinstance(target, str) and target not in ("inf", "reference"):
        raise ManifestError(f"target must be a number, 'inf' or 'reference', got {target!r}")
    if target is not None:
        cfg_raw["target"] = math.inf if isinstance(target, str) else float(target)
    cfg_raw.pop("seed", None)
    try:
        config = SearchConfig(**cfg_raw)
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"config: {exc}") from None

    entries = raw.get("instances")
    if not isinstance(entries, list) or not entries:
        raise ManifestError("instances must be a non-empty list")
    instances = [_load_entry(e, k, base) for k, e in enumerate(entries)]
    names = [e.name for e in instances]
    if len(set(names)) != len(names):
        raise ManifestError("instance names must be unique")
    if target == "reference":
        missing = [e.name for e in instances if e.reference is None]
        if missing:
            raise ManifestError(f"target 'reference' needs a reference for {missing}")

    jobs = raw.get("jobs", 1)
    if not isinstance(jobs, int) or jobs < 1:
        raise ManifestError("jobs must be a positive integer")
    out = raw.get("output")
    return Manifest(
        name=str(raw.get("name", "experiment")),
        algorithm=algorithm,
        seeds=seeds,
        config=config,
        instances=instances,
        output=(base / out) if out else None,
        target=target,
        jobs=jobs,
        raw=raw,
    )


def _load_entry(entry: Any, k: int, base: Path) -> InstanceEntry:
    where = f"instances[{k}]"
    if not isinstance(entry, dict):
        raise ManifestError(f"{where}: expected an object")
    ref = entry.get("reference")
    if ref is not None and (not isinstance(ref, int) or ref < 0):
        raise ManifestError(f"{where}: reference must be a non-negative integer")
    if "path" in entry:
        path = base / entry["path"]
        if not path.is_file():
            raise ManifestError(f"{where}: instance file not found: {path}")
        dialect = entry.get("dialect", "canonical")
        try:
            inst = read_instance(path, dialect)
        except (InstanceParseError, InvalidInstanceError, ValueError) as exc:
            raise ManifestError(f"{where}: {path}: {exc}") from None
        name = entry.get("name", inst.name)
    elif "generate" in entry:
        try:
            gc = GeneratorConfig(**entry["generate"])
        except (TypeError, ValueError) as exc:
            raise ManifestError(f"{where}: generate: {exc}") from None
        inst = generate_instance(gc)
        name = entry.get("name", inst.name)
    else:
        raise ManifestError(f"{where}: needs 'path' or 'generate'")
    report = validate_instance(inst)
    if not report.ok:
        raise ManifestError(f"{where}: {'; '.join(report.errors)}")
    return InstanceEntry(str(name), inst, ref)


def _run_one(args) -> tuple[str, RunReport]:
    name, inst, algorithm, cfg = args
    return name, solve(inst, algorithm, cfg)


def _config_for(m: Manifest, entry: InstanceEntry, seed: int) -> SearchConfig:
    cfg = replace(m.config, seed=seed)
    if m.target == "reference":
        cfg = replace(cfg, target=float(entry.reference))
    return cfg


def execute(m: Manifest) -> list[tuple[InstanceEntry, RunReport]]:
    tasks = [(e, _config_for(m, e, seed)) for e in m.instances for seed in m.seeds]
    payload = [(e.name, e.instance, m.algorithm, cfg) for e, cfg in tasks]
    if m.jobs > 1:
        with ProcessPoolExecutor(max_workers=m.jobs) as pool:
            reports = [r for _, r in pool.map(_run_one, payload)]
    else:
        reports = [_run_one(p)[1] for p in payload]
    out = []
    for (entry, _), rep in zip(tasks, reports):
        # every reported cost must re-verify from the reported sequence
        if total_cost(entry.instance, make_sequence(rep.best_sequence)) != rep.best_cost:
            raise RuntimeError(f"{entry.name}: reported cost does not match its sequence")
        out.append((entry, rep))
    return out


def results_document(m: Manifest, runs: list[tuple[InstanceEntry, RunReport]]) -> dict:
    cfg = config_dict(m.config)
    cfg.pop("seed")
    if m.target is not None:
        cfg["target"] = m.target
    return {
        "schema": SCHEMA_VERSION,
        "name": m.name,
        "algorithm": m.algorithm,
        "config": cfg,
        "seeds": m.seeds,
        "runs": [
            {
                "instance": e.name,
                "n": e.instance.n,
                "reference": e.reference,
                "seed": r.seed,
                "cost": r.best_cost,
                "sequence": r.best_sequence,
                "iterations": r.iterations,
                "restarts": r.restarts,
                "history": [list(h) for h in r.history],
                "thresholds": r.thresholds,
                "filter_stats": [_strip_time(row) for row in r.filter_stats],
            }
            for e, r in runs
        ],
    }


def _strip_time(row: dict) -> dict:
    return {k: v for k, v in row.items() if k != "seconds"}


def timings_document(runs: list[tuple[InstanceEntry, RunReport]]) -> dict:
    return {
        "runs": [
            {
                "instance": e.name,
                "seed": r.seed,
                "seconds": round(r.elapsed, 3),
                "time_to_best": round(r.time_to_best, 3),
                "neighborhood_seconds": {k: round(v, 3) for k, v in r.neighborhood_seconds.items()},
            }
            for e, r in runs
        ]
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


SUMMARY_FIELDS = [
    "instance", "n", "reference", "runs", "best", "avg", "worst", "best_gap", "avg_gap", "worst_gap",
    "time_mean", "time_median", "time_min", "time_max", "skipped_pct", "lost_improving_pct",
]
FILTER_FIELDS = ["neighborhood", "seen", "admitted", "rejected", "skipped_pct", "lost_improving_pct"]


def summary_rows(m: Manifest, runs: list[tuple[InstanceEntry, RunReport]]) -> list[dict]:
    by_name: dict[str, list[RunReport]] = {}
    for e, r in runs:
        by_name.setdefault(e.name, []).append(r)
    gaps = compute_gaps(
        {k: [r.best_cost for r in v] for k, v in by_name.items()},
        {e.name: e.reference for e in m.instances},
    )
    rows = []
    for entry, g in zip(m.instances, gaps.instances):
        reps = by_name[entry.name]
        times = [r.elapsed for r in reps]
        seen, rejected, adm_imp, rej_imp = 0, 0, 0, 0
        for r in reps:
            for row in r.filter_stats:
                seen += row["seen"]
                rejected += row["rejected"]
                adm_imp += row["admitted_improving"]
                rej_imp += row["rejected_improving"]
        rows.append(
            {
                "instance": entry.name,
                "n": entry.instance.n,
                "reference": entry.reference,
                "runs": len(reps),
                "best": g.best_cost,
                "avg": round(g.avg_cost, 2),
                "worst": g.worst_cost,
                "best_gap": _r(g.best_gap),
                "avg_gap": _r(g.avg_gap),
                "worst_gap": _r(g.worst_gap),
                "time_mean": round(statistics.fmean(times), 3),
                "time_median": round(statistics.median(times), 3),
                "time_min": round(min(times), 3),
                "time_max": round(max(times), 3),
                "skipped_pct": _r(100.0 * rejected / seen if seen else None),
                "lost_improving_pct": _r(
                    100.0 * rej_imp / (adm_imp + rej_imp) if m.config.diagnostic and adm_imp + rej_imp else None
                ),
            }
        )
    return rows


def filter_rows(m: Manifest, runs: list[tuple[InstanceEntry, RunReport]]) -> list[dict]:
    agg: dict[str, list[int]] = {}
    for _, r in runs:
        for row in r.filter_stats:
            acc = agg.setdefault(row["neighborhood"], [0, 0, 0, 0, 0])
            acc[0] += row["seen"]
            acc[1] += row["admitted"]
            acc[2] += row["rejected"]
            acc[3] += row["admitted_improving"]
            acc[4] += row["rejected_improving"]
    rows = []
    for hood, (seen, adm, rej, ai, ri) in agg.items():
        rows.append(
            {
                "neighborhood": hood,
                "seen": seen,
                "admitted": adm,
                "rejected": rej,
                "skipped_pct": _r(100.0 * rej / seen if seen else None),
                "lost_improving_pct": _r(100.0 * ri / (ai + ri) if m.config.diagnostic and ai + ri else None),
            }
        )
    return rows


def _r(x: float | None) -> float | None:
    return None if x is None else round(x, 4)


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def run_experiment(manifest: Manifest | dict | str | Path, output: str | Path | None = None) -> dict[str, Path]:
    """Run a manifest and write ``results.json``, ``timings.json``,
    ``summary.csv`` and ``filter.csv``; returns their paths."""
    if isinstance(manifest, Manifest):
        m = manifest
    elif isinstance(manifest, dict):
        m = parse_manifest(manifest)
    else:
        m = load_manifest(manifest)
    out_dir = Path(output) if output is not None else m.output
    if out_dir is None:
        raise ManifestError("no output directory given")
    runs = execute(m)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "results": out_dir / "results.json",
        "timings": out_dir / "timings.json",
        "summary": out_dir / "summary.csv",
        "filter": out_dir / "filter.csv",
    }
    paths["results"].write_text(dumps(results_document(m, runs)))
    paths["timings"].write_text(dumps(timings_document(runs)))
    _write_csv(paths["summary"], SUMMARY_FIELDS, summary_rows(m, runs))
    _write_csv(paths["filter"], FILTER_FIELDS, filter_rows(m, runs))
    return paths
