"""Command-line entry point: ``smwt {solve,generate,bench,diagnose-filter,oracle,stats}``."""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .experiment import ManifestError, dumps, load_manifest, run_experiment
from .io import DIALECTS, GeneratorConfig, InstanceParseError, generate_instance, read_instance, write_canonical
from .meta import ALGORITHMS, SearchConfig, solve
from .model import Instance, InvalidInstanceError, validate_instance
from .oracle import OracleRefused, exact_bruteforce
from .reference import REFERENCE_OPTIMA
from .stats import compute_gaps

EXIT_INPUT = 2


class CliError(Exception):
    pass


def _load(args) -> Instance:
    try:
        inst = read_instance(args.instance, args.dialect)
    except FileNotFoundError:
        raise CliError(f"instance file not found: {args.instance}") from None
    except (InstanceParseError, InvalidInstanceError) as exc:
        raise CliError(f"{args.instance}: {exc}") from None
    report = validate_instance(inst)
    if not report.ok:
        raise CliError(f"{args.instance}: " + "; ".join(report.errors))
    return inst


def _search_config(args, **extra) -> SearchConfig:
    theta = args.theta
    if theta is None:
        theta = 0.75 if args.dialect == "unweighted" else 0.90
    kw = dict(
        theta=theta,
        lengths=tuple(range(1, args.lmax + 1)),
        use_swap=args.swap,
        restarts=args.restarts,
        seed=args.seed,
        fast=args.fast,
        time_limit=args.time_limit,
    )
    if args.iters is not None:
        kw["ils_iters"] = args.iters
        kw["iterations"] = args.iters
    if args.target is not None:
        kw["mode"] = "target"
        kw["target"] = args.target
    elif args.time_limit is not None:
        kw["mode"] = "time_limit"
    kw.update(extra)
    try:
        return SearchConfig(**kw)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _add_instance(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, help="instance file")
    p.add_argument("--dialect", default="canonical", choices=("canonical",) + DIALECTS)


def _add_search(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", default="ils", choices=sorted(ALGORITHMS))
    p.add_argument("--fast", action=argparse.BooleanOptionalAction, default=True, help="use the move filter")
    p.add_argument("--theta", type=float, default=None, help="threshold quantile (default 0.90, 0.75 unweighted)")
    p.add_argument("--lmax", type=int, default=13, help="largest block length")
    p.add_argument("--swap", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--iters", type=int, default=None, help="ILS iterations without improvement (default 4n) or VNS iterations")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target", type=float, default=None, help="stop once this cost is reached")
    p.add_argument("--time-limit", type=float, default=None, help="wall-clock limit in seconds")


def cmd_solve(args) -> int:
    inst = _load(args)
    cfg = _search_config(args, diagnostic=args.diagnostic, profile=args.profile)
    rep = solve(inst, args.algo, cfg)
    if args.json:
        doc = {
            "instance": inst.name,
            "algorithm": rep.algorithm,
            "cost": rep.best_cost,
            "sequence": rep.best_sequence,
            "seconds": round(rep.elapsed, 3),
            "iterations": rep.iterations,
            "restarts": rep.restarts,
            "thresholds": rep.thresholds,
            "filter_stats": rep.filter_stats,
        }
        sys.stdout.write(dumps(doc))
    else:
        print(f"cost {rep.best_cost}")
        print("sequence " + " ".join(map(str, rep.best_sequence)))
        print(f"seconds {rep.elapsed:.3f}  iterations {rep.iterations}  restarts {rep.restarts}")
    return 0


def cmd_generate(args) -> int:
    try:
        gc = GeneratorConfig(args.n, args.tau, args.r, args.eta, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    text = write_canonical(generate_instance(gc))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    try:
        m = load_manifest(args.manifest)
        if args.jobs is not None:
            m.jobs = args.jobs
        paths = run_experiment(m, args.out)
    except ManifestError as exc:
        raise CliError(str(exc)) from None
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


def cmd_diagnose(args) -> int:
    inst = _load(args)
    cfg = _search_config(args, diagnostic=True, profile=True)
    rep = solve(inst, args.algo, cfg)
    print(f"cost {rep.best_cost}  seconds {rep.elapsed:.3f}")
    print(f"{'neighborhood':<14}{'threshold':>10}{'seen':>12}{'skipped%':>10}{'lost%':>8}{'seconds':>9}")
    for row in rep.filter_stats:
        name = row["neighborhood"]
        thr = rep.thresholds.get(name)
        lost = row["lost_improving_pct"]
        print(
            f"{name:<14}{'M' if thr is None else thr:>10}{row['seen']:>12}"
            f"{row['skipped_pct']:>10.2f}{'-' if lost is None else f'{lost:.2f}':>8}"
            f"{rep.neighborhood_seconds[name]:>9.3f}"
        )
    return 0


def cmd_oracle(args) -> int:
    inst = _load(args)
    try:
        res = exact_bruteforce(inst)
    except OracleRefused as exc:
        raise CliError(str(exc)) from None
    print(f"optimum {res.opt_cost}")
    print("sequence " + " ".join(str(int(x)) for x in res.opt_sequence[1:]))
    print(f"nodes {res.nodes_explored}")
    return 0


def _instance_id(name: str) -> int | None:
    m = re.search(r"(\d+)$", name)
    return int(m.group(1)) if m else None


def cmd_stats(args) -> int:
    try:
        doc = json.loads(Path(args.results).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"{args.results}: {exc}") from None
    costs: dict[str, list[int]] = {}
    refs: dict[str, int | None] = {}
    for run in doc.get("runs", []):
        costs.setdefault(run["instance"], []).append(run["cost"])
        refs[run["instance"]] = run.get("reference")
    if args.reference == "builtin":
        for name in costs:
            key = _instance_id(name)
            refs[name] = REFERENCE_OPTIMA[key][1] if key in REFERENCE_OPTIMA else None
    elif args.reference:
        try:
            table = json.loads(Path(args.reference).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"{args.reference}: {exc}") from None
        refs.update({k: (None if v is None else int(v)) for k, v in table.items()})
    times = None
    if args.timings:
        times = {}
        for run in json.loads(Path(args.timings).read_text()).get("runs", []):
            times.setdefault(run["instance"], []).append(run["seconds"])
    gs = compute_gaps(costs, refs, times)
    if args.json:
        sys.stdout.write(dumps(gs.as_dict()))
        return 0

    def fmt(x):
        return "-" if x is None else f"{x:.4f}"

    print(f"{'instance':<20}{'ref':>10}{'best':>10}{'best%':>10}{'avg%':>10}{'worst%':>10}")
    for g in gs.instances:
        ref = "-" if g.reference is None else g.reference
        print(f"{g.instance:<20}{ref:>10}{g.best_cost:>10}{fmt(g.best_gap):>10}{fmt(g.avg_gap):>10}{fmt(g.worst_gap):>10}")
    print(f"mean best gap {fmt(gs.mean_best_gap)}")
    print(f"geometric mean avg gap {fmt(gs.geo_avg_gap)} ({gs.zero_avg_gaps} zero gaps left out)")
    print(f"geometric mean worst gap {fmt(gs.geo_worst_gap)} ({gs.zero_worst_gaps} zero gaps left out)")
    if gs.mean_time is not None:
        print(f"mean time {gs.mean_time:.3f}")
    if gs.excluded:
        print("excluded (zero or missing reference): " + ", ".join(gs.excluded))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smwt", description="Weighted tardiness scheduling with setup times.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a metaheuristic on one instance")
    _add_instance(p)
    _add_search(p)
    p.add_argument("--diagnostic", action="store_true", help="also cost rejected moves to count lost improvements")
    p.add_argument("--profile", action="store_true", help="time every neighbourhood")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="write a random instance in canonical format")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", type=float, default=0.3)
    p.add_argument("--r", type=float, default=0.25)
    p.add_argument("--eta", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="run a JSON experiment manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None, help="output directory (overrides the manifest)")
    p.add_argument("--jobs", type=int, default=None, help="worker processes")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("diagnose-filter", help="per-neighbourhood filter counters on one instance")
    _add_instance(p)
    _add_search(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("oracle", help="exact optimum by exhaustive search (n <= 12)")
    _add_instance(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("stats", help="gap statistics of a results file")
    p.add_argument("--results", required=True)
    p.add_argument("--reference", default=None, help="JSON {instance: value} file, or 'builtin'")
    p.add_argument("--timings", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
