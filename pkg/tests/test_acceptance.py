"""End-to-end acceptance checks.

Each test prints one ``criterion N: PASS|FAIL ...`` line with its measured
figures before asserting.  Run with ``pytest -v -s tests/test_acceptance.py``
or ``python3 tests/test_acceptance.py``.
"""
import itertools
import json
import math
import os
import re
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from smwt.evaluation import comp_cost_lblock_bwd, comp_cost_lblock_fwd, comp_cost_swap, setup_variation
from smwt.experiment import load_manifest, run_experiment
from smwt.io import GeneratorConfig, generate_instance, read_instance
from smwt.meta import SearchConfig, grasp, ils_rvnd, vns
from smwt.model import make_sequence, recompute_prefixes, total_setup
from smwt.movefilter import FilterState, NeighborhoodId, finalize_thresholds, record_many
from smwt.oracle import candidate_order, exact_bruteforce, naive_move_cost
from smwt.reference import REFERENCE_OPTIMA
from smwt.stats import compute_gaps

from conftest import all_moves, random_instance, random_sequence

TAUS = (0.6, 0.9)
COMBOS = list(itertools.product(TAUS, (0.25, 0.75), (0.25, 0.75)))


def report(capsys, number: int, ok: bool, figures: str) -> None:
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} {figures}")
    assert ok, f"criterion {number}: {figures}"


def generated(n: int, k: int, base: int):
    return generate_instance(GeneratorConfig(n, *COMBOS[k % len(COMBOS)], seed=base + k))


def random_move(rng, n: int):
    moves = list(all_moves(n, 5))
    return moves[int(rng.integers(len(moves)))]


def incremental(inst, seq, state, mv) -> int:
    if mv.kind == "swap":
        return comp_cost_swap(inst, seq, state, mv.i, mv.j)
    if mv.kind == "lblock_fwd":
        return comp_cost_lblock_fwd(inst, seq, state, mv.i, mv.j, mv.l)
    return comp_cost_lblock_bwd(inst, seq, state, mv.i, mv.j, mv.l)


def test_criterion_1_move_costs_match_naive(capsys):
    rng = np.random.default_rng(1)
    cases = mismatches = 0
    while cases < 10_000:
        n = int(rng.integers(2, 13))
        inst = random_instance(rng, n)
        seq = random_sequence(rng, n)
        state = recompute_prefixes(inst, seq)
        for _ in range(5):
            mv = random_move(rng, n)
            cases += 1
            mismatches += incremental(inst, seq, state, mv) != naive_move_cost(inst, seq, mv)
    report(capsys, 1, mismatches == 0, f"{cases} triples, {mismatches} mismatches")


def test_criterion_2_setup_variation_identity(capsys):
    rng = np.random.default_rng(2)
    cases = mismatches = 0

    def check(inst, seq, mv):
        nonlocal cases, mismatches
        cand = make_sequence(candidate_order(seq, mv))
        cases += 1
        mismatches += setup_variation(inst, seq, mv) != total_setup(inst, cand) - total_setup(inst, seq)

    # every move, boundary and adjacent ones included, at small n
    for n in range(2, 9):
        for _ in range(6):
            inst = random_instance(rng, n)
            seq = random_sequence(rng, n)
            for mv in all_moves(n, 5):
                check(inst, seq, mv)
    while cases < 20_000:
        n = int(rng.integers(2, 13))
        inst = random_instance(rng, n)
        seq = random_sequence(rng, n)
        for _ in range(5):
            check(inst, seq, random_move(rng, n))
    report(capsys, 2, mismatches == 0, f"{cases} moves, {mismatches} mismatches")


def test_criterion_3_threshold_example(capsys):
    v = NeighborhoodId.swap()
    fs = FilterState([v])
    record_many(fs, v, np.array([-6, -4, -4, -2, 0, 1, 4, 7, 12, 20]))
    finalize_thresholds(fs, 0.95)
    thr = fs.thresholds[v]
    report(capsys, 3, thr == 12, f"threshold {thr} (expected 12)")


def test_criterion_4_unlimited_filter_is_sound(capsys):
    budget = dict(restarts=3, ils_iters=20)
    bad = []
    for k in range(20):
        n = 8 + k  # 8 .. 27
        inst = generated(n, k, 400)
        seed = 100 + k
        fast = ils_rvnd(inst, SearchConfig(seed=seed, force_unfiltered=True, learning_budget=1.0, **budget))
        slow = ils_rvnd(inst, SearchConfig(seed=seed, fast=False, **budget))
        if fast.best_cost != slow.best_cost or fast.filter_stats != slow.filter_stats:
            bad.append(inst.name)
    report(capsys, 4, not bad, f"20 instances, {len(bad)} differ {bad}")


def test_criterion_5_optimum_at_n10(capsys):
    warm = generated(10, 0, 5000)
    ils_rvnd(warm, SearchConfig(seed=0))  # load compiled kernels outside the timing
    hits = runs = 0
    slowest = 0.0
    for k in range(100):
        inst = generated(10, k, 5000)
        opt = exact_bruteforce(inst).opt_cost
        # seeds are independent, so stopping at the first hit gives the same best-of-10 verdict
        for seed in range(10):
            rep = ils_rvnd(inst, SearchConfig(seed=seed))
            runs += 1
            slowest = max(slowest, rep.elapsed)
            if rep.best_cost == opt:
                hits += 1
                break
    ok = hits >= 95 and slowest <= 1.0
    report(capsys, 5, ok, f"{hits}/100 optimal, {runs} runs, slowest run {slowest:.3f}s")


def rubin_files(root: Path) -> dict[int, Path]:
    found = {}
    for path in sorted(root.iterdir()):
        m = re.search(r"(\d+)\D*$", path.name)
        if path.is_file() and m and 401 <= int(m.group(1)) <= 408:
            found[int(m.group(1))] = path
    return found


def test_criterion_6_rubin_optima(capsys):
    root = os.environ.get("SMWT_RUBIN_DIR")
    if not root:
        with capsys.disabled():
            print("\ncriterion 6: SKIP SMWT_RUBIN_DIR not set")
        pytest.skip("SMWT_RUBIN_DIR not set")
    expected = {k: REFERENCE_OPTIMA[k][1] for k in (401, 402, 403, 404, 407, 408)}
    files = rubin_files(Path(root))
    missing = sorted(set(expected) - set(files))
    misses, times = [], []
    for key, opt in expected.items():
        if key not in files:
            continue
        inst = read_instance(files[key], dialect="unweighted")
        start = time.perf_counter()
        best = min(ils_rvnd(inst, SearchConfig.unweighted(seed=s)).best_cost for s in range(10))
        times.append((time.perf_counter() - start) / 10)
        if best != opt:
            misses.append((key, best, opt))
    mean_time = sum(times) / len(times) if times else math.inf
    ok = not missing and not misses and mean_time <= 5.0
    report(capsys, 6, ok, f"missing {missing}, misses {misses}, mean time {mean_time:.3f}s")


def totals(rows: list[dict]) -> tuple[int, int, int, int]:
    return (
        sum(r["seen"] for r in rows),
        sum(r["rejected"] for r in rows),
        sum(r["admitted_improving"] for r in rows),
        sum(r["rejected_improving"] for r in rows),
    )


def test_criterion_7_filter_speedup(capsys):
    budget = dict(restarts=3, ils_iters=120, seed=1, theta=0.90)
    filtered = np.zeros(4, dtype=np.int64)
    whole = np.zeros(4, dtype=np.int64)
    t_fast = t_slow = 0.0
    for k in range(10):
        inst = generated(60, k, 200)
        t_fast += ils_rvnd(inst, SearchConfig(**budget)).elapsed
        t_slow += ils_rvnd(inst, SearchConfig(fast=False, **budget)).elapsed
        diag = ils_rvnd(inst, SearchConfig(diagnostic=True, **budget))
        filtered += totals(diag.filtered_phase_stats)
        whole += totals(diag.filter_stats)

    def pct(c):
        return 100.0 * c[1] / c[0], 100.0 * c[3] / max(1, c[2] + c[3])

    skip, lost = pct(filtered)
    skip_all, lost_all = pct(whole)
    ratio = t_fast / t_slow
    ok = skip >= 40.0 and lost <= 20.0 and ratio <= 0.7
    report(
        capsys,
        7,
        ok,
        f"skipped {skip:.1f}%, lost improving {lost:.1f}% after learning "
        f"(whole run {skip_all:.1f}% / {lost_all:.1f}%), wall ratio {ratio:.2f} ({t_fast:.1f}s / {t_slow:.1f}s)",
    )


@pytest.mark.parametrize("algo", ["grasp", "vns"])
def test_criterion_8_grasp_vns(capsys, algo):
    fn, budget = {"grasp": (grasp, dict(restarts=100)), "vns": (vns, dict(iterations=100))}[algo]
    insts = [generated(30, k, 300) for k in range(20)]
    costs = {True: {}, False: {}}
    evaluated = {True: 0, False: 0}
    for inst in insts:
        for fast in (True, False):
            for seed in range(10):
                rep = fn(inst, SearchConfig(fast=fast, seed=seed, **budget))
                costs[fast].setdefault(inst.name, []).append(rep.best_cost)
                evaluated[fast] += rep.evaluated_moves()
    reference = {name: min(costs[True][name] + costs[False][name]) for name in costs[True]}
    gap_fast = compute_gaps(costs[True], reference).mean_best_gap or 0.0
    gap_slow = compute_gaps(costs[False], reference).mean_best_gap or 0.0
    ok = gap_fast <= gap_slow + 2.0 and evaluated[True] < evaluated[False]
    report(
        capsys,
        8,
        ok,
        f"{algo}: mean best gap {gap_fast:.3f} filtered vs {gap_slow:.3f} unfiltered, "
        f"evaluated moves {evaluated[True]} vs {evaluated[False]}",
    )


def test_criterion_9_gap_statistics(capsys):
    gs = compute_gaps(
        {"a": [102, 104, 106], "b": [50, 50, 54], "c": [200, 200], "d": [5, 7]},
        {"a": 100, "b": 50, "c": 200, "d": 0},
    )
    got = (gs.mean_best_gap, gs.geo_avg_gap, gs.geo_worst_gap, gs.zero_avg_gaps, gs.excluded)
    want = (2 / 3, math.sqrt(4 * 8 / 3), math.sqrt(48), 1, ["d"])
    ok = all(math.isclose(a, b, abs_tol=1e-12) for a, b in zip(got[:3], want[:3])) and got[3:] == want[3:]
    report(capsys, 9, ok, f"got {got}")


def test_criterion_10_bench_is_deterministic(capsys, tmp_path):
    raw = {
        "algorithm": "ils",
        "seeds": [1, 2, 3],
        "config": {"restarts": 3, "ils_iters": 30},
        "instances": [{"generate": {"n": 25, "tau": t, "r": 0.25, "eta": 0.75, "seed": 9}} for t in TAUS],
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(raw))
    first = run_experiment(load_manifest(path), tmp_path / "a")["results"].read_bytes()
    second = run_experiment(load_manifest(path), tmp_path / "b")["results"].read_bytes()
    path.write_text(json.dumps({**raw, "jobs": 2}))
    parallel = run_experiment(load_manifest(path), tmp_path / "c")["results"].read_bytes()
    ok = first == second == parallel
    report(capsys, 10, ok, f"results.json {len(first)} bytes, rerun identical {first == second}, jobs=2 identical {first == parallel}")


if __name__ == "__main__":
    sys.exit(pytest.main(["-v", "-s", __file__]))
