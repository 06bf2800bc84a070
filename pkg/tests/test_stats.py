import math

import pytest

from smwt.reference import REFERENCE_OPTIMA, UPPER_BOUND_ONLY, reference_cost
from smwt.stats import compute_gaps, gap, geometric_mean


def test_geometric_mean_fixtures():
    assert geometric_mean([2, 8]) == 4.0
    # zeros are left out, not multiplied in
    assert geometric_mean([0, 2, 8]) == 4.0
    assert geometric_mean([1, 3, 9]) == 3.0
    assert geometric_mean([0, 0]) is None
    assert geometric_mean([]) is None


def test_geometric_mean_extreme_values():
    assert geometric_mean([1e200, 1e200, 1e-100]) == pytest.approx(1e100)
    assert geometric_mean([1e-200] * 3) == pytest.approx(1e-200)


def test_gap():
    assert gap(110, 100) == pytest.approx(10.0)
    assert gap(100, 100) == 0.0


def test_compute_gaps_fixture():
    results = {
        "a": [102, 104, 106],  # gaps 2 / 4 / 6
        "b": [50, 50, 54],  # gaps 0 / 8/3 / 8
        "c": [200, 200],  # all zero
        "d": [5, 7],  # zero reference
        "e": [9],  # no reference
    }
    reference = {"a": 100, "b": 50, "c": 200, "d": 0}
    gs = compute_gaps(results, reference, times={"a": [1.0, 2.0, 3.0], "b": [4.0]})
    rows = {g.instance: g for g in gs.instances}
    assert (rows["a"].best_gap, rows["a"].avg_gap, rows["a"].worst_gap) == pytest.approx((2, 4, 6))
    assert rows["b"].avg_gap == pytest.approx(8 / 3)
    assert gs.mean_best_gap == pytest.approx(2 / 3)
    assert gs.geo_avg_gap == pytest.approx(math.sqrt(4 * 8 / 3))
    assert gs.geo_worst_gap == pytest.approx(math.sqrt(48))
    assert (gs.zero_avg_gaps, gs.zero_worst_gaps) == (1, 1)
    assert gs.excluded == ["d", "e"]
    assert rows["d"].excluded == "zero reference" and rows["e"].excluded == "missing reference"
    assert rows["d"].best_gap is None
    assert gs.mean_time == pytest.approx((2.0 + 4.0) / 2)
    assert gs.as_dict()["instances"][0]["instance"] == "a"


def test_compute_gaps_all_excluded():
    gs = compute_gaps({"x": [3]}, {"x": 0})
    assert gs.mean_best_gap is None and gs.geo_avg_gap is None and gs.mean_time is None


def test_compute_gaps_needs_runs():
    with pytest.raises(ValueError):
        compute_gaps({"x": []}, {"x": 1})


def test_reference_values():
    # [PAPER] optima of the n = 15 group
    expected = {401: 90, 402: 0, 403: 3418, 404: 1067, 407: 1861, 408: 5660}
    for key, value in expected.items():
        assert reference_cost(key) == value
        assert REFERENCE_OPTIMA[key][0] == 15
    assert UPPER_BOUND_ONLY <= set(REFERENCE_OPTIMA)
    with pytest.raises(KeyError):
        reference_cost(999)
