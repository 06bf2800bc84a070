import numpy as np
from hypothesis import given

from smwt.model import (
    Instance,
    InvalidInstanceError,
    is_valid_sequence,
    make_sequence,
    recompute_prefixes,
    total_cost,
    total_setup,
    validate_instance,
)

from conftest import instance_and_sequence

# n=7 fixture; values below were derived with a standalone itertools oracle
P7 = [131, 58, 68, 73, 68, 130, 137]
D7 = [365, 274, 310, 402, 405, 366, 229]
W7 = [6, 1, 1, 4, 5, 7, 5]
S7 = [
    [0, 8, 35, 37, 1, 5, 23, 19],
    [0, 0, 21, 21, 33, 29, 8, 37],
    [0, 48, 0, 14, 16, 33, 33, 35],
    [0, 14, 47, 0, 3, 49, 48, 15],
    [0, 16, 2, 45, 0, 29, 12, 24],
    [0, 39, 24, 1, 12, 0, 26, 19],
    [0, 4, 31, 33, 26, 47, 0, 10],
    [0, 32, 12, 15, 24, 37, 14, 0],
]


def fixture7():
    return Instance(7, P7, D7, W7, S7)


def test_single_job_on_time():
    inst = Instance(1, [3], [10], [5], [[0, 2], [0, 0]])
    assert total_cost(inst, make_sequence([1])) == 0


def test_single_job_tardy(tiny):
    assert total_cost(tiny, make_sequence([1])) == 20


def test_single_job_prefixes(tiny):
    st = recompute_prefixes(tiny, make_sequence([1]))
    assert st.C.tolist() == [0, 5]
    assert st.g.tolist() == [0, 20]
    assert st.h.tolist() == [0, 5]
    assert st.cost == 20


def test_loose_due_dates_give_zero(rng):
    p = rng.integers(0, 20, 6)
    s = rng.integers(0, 10, (7, 7))
    horizon = int(p.sum() + s.max(axis=1).sum())
    inst = Instance(6, p, [horizon] * 6, rng.integers(1, 5, 6), s)
    for _ in range(20):
        seq = make_sequence(rng.permutation(6) + 1)
        assert total_cost(inst, seq) == 0
        assert not recompute_prefixes(inst, seq).g.any()


def test_zero_weights_give_zero(rng):
    inst = Instance(5, rng.integers(1, 20, 5), [0] * 5, [0] * 5, rng.integers(0, 9, (6, 6)))
    for _ in range(10):
        assert total_cost(inst, make_sequence(rng.permutation(5) + 1)) == 0


def test_fixture_identity_cost():
    # [DERIVED] standalone oracle
    assert total_cost(fixture7(), make_sequence(range(1, 8))) == 4916


def test_cost_depends_on_order():
    inst = fixture7()
    assert total_cost(inst, make_sequence([5, 7, 6, 1, 4, 2, 3])) == 2601
    assert total_cost(inst, make_sequence([2, 1, 3, 4, 5, 6, 7])) != 4916


def test_diagonal_is_never_read():
    a = fixture7()
    s = np.array(S7)
    np.fill_diagonal(s, 999)
    b = Instance(7, P7, D7, W7, s)
    seq = make_sequence([3, 1, 2, 7, 5, 6, 4])
    assert total_cost(a, seq) == total_cost(b, seq)
    assert recompute_prefixes(a, seq).g.tolist() == recompute_prefixes(b, seq).g.tolist()


@given(instance_and_sequence(max_n=12))
def test_prefixes_follow_recurrences(case):
    inst, seq = case
    st = recompute_prefixes(inst, seq)
    assert st.C[0] == 0 and st.g[0] == 0 and st.h[0] == 0
    for k in range(1, inst.n + 1):
        job = seq[k]
        assert st.C[k] == st.C[k - 1] + inst.s[seq[k - 1], job] + inst.p[job - 1]
        late = max(int(st.C[k]) - int(inst.d[job - 1]), 0)
        assert st.g[k] == st.g[k - 1] + inst.w[job - 1] * late
        assert st.h[k] == st.h[k - 1] + (inst.w[job - 1] if late > 0 else 0)
    assert st.g[-1] == total_cost(inst, seq)


def test_state_copy_is_independent(tiny):
    st = recompute_prefixes(tiny, make_sequence([1]))
    cp = st.copy()
    cp.C[1] = 0
    cp.g[1] = 0
    cp.h[1] = 0
    assert st.C[1] == 5 and st.g[1] == 20 and st.h[1] == 5


def test_total_setup():
    inst = fixture7()
    assert total_setup(inst, make_sequence([1, 2, 3])) == 8 + 21 + 14


def test_validate_well_formed():
    assert validate_instance(Instance(3, [1, 2, 3], [0, 0, 0], [1, 1, 1], np.zeros((4, 4)))).ok


def test_validate_reports_setup_rows():
    report = validate_instance(Instance(3, [1, 2, 3], [0, 0, 0], [1, 1, 1], np.zeros((3, 4))))
    assert not report.ok
    assert any(e.startswith("s:") and "4x4" in e for e in report.errors)


def test_validate_reports_negative_weight():
    report = validate_instance(Instance(3, [1, 2, 3], [0, 0, 0], [1, -1, 1], np.zeros((4, 4))))
    assert report.errors == ["w[2] is negative (-1)"]


def test_validate_collects_every_violation():
    s = np.zeros((4, 4), dtype=int)
    s[1, 2] = -3
    report = validate_instance(Instance(3, [1, 2], [0, -1, 0], [1, 1, 1], s))
    assert len(report.errors) == 3
    assert any("p: expected 3" in e for e in report.errors)
    assert any("d[2]" in e for e in report.errors)
    assert any("s[1][2]" in e for e in report.errors)


def test_validate_ragged_setups():
    report = validate_instance(Instance(2, [1, 2], [0, 0], [1, 1], [[0, 1, 2], [0, 1], [0, 1, 2]]))
    assert not report.ok and "ragged" in report.errors[0]


def test_checked_raises():
    try:
        Instance.checked([1, 2], [0, 0], [1, -2], np.zeros((3, 3)))
    except InvalidInstanceError as exc:
        assert "w[2]" in str(exc)
        assert not exc.report.ok
    else:
        raise AssertionError("expected InvalidInstanceError")


def test_sequence_validity():
    inst = fixture7()
    assert is_valid_sequence(inst, make_sequence(range(1, 8)))
    assert not is_valid_sequence(inst, make_sequence([1, 1, 3, 4, 5, 6, 7]))
    assert not is_valid_sequence(inst, np.array([1, 0, 2, 3, 4, 5, 6, 7]))


def test_instance_equality_and_unit_weights():
    a = fixture7()
    assert a == fixture7()
    u = a.with_unit_weights()
    assert u != a and u.w.tolist() == [1] * 7
