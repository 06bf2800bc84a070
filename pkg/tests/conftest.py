from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from smwt.evaluation import MoveSpec
from smwt.model import Instance, make_sequence

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large]
)
settings.load_profile("default")


def random_instance(rng: np.random.Generator, n: int, pmax: int = 20, smax: int = 10, wmax: int = 6) -> Instance:
    p = rng.integers(0, pmax + 1, n)
    s = rng.integers(0, smax + 1, (n + 1, n + 1))
    d = rng.integers(0, int(p.sum()) + n * smax // 2 + 1, n)
    w = rng.integers(0, wmax + 1, n)
    return Instance(n, p, d, w, s)


def random_sequence(rng: np.random.Generator, n: int) -> np.ndarray:
    return make_sequence(rng.permutation(n) + 1)


def all_moves(n: int, lmax: int = 5):
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            yield MoveSpec("swap", i, j)
    for l in range(1, min(lmax, n - 1) + 1):
        for i in range(1, n - l + 1):
            for j in range(i + l, n + 1):
                yield MoveSpec("lblock_fwd", i, j, l)
        for i in range(2, n - l + 2):
            for j in range(1, i):
                yield MoveSpec("lblock_bwd", i, j, l)


@st.composite
def instances(draw, min_n: int = 1, max_n: int = 10):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_instance(np.random.default_rng(seed), n)


@st.composite
def instance_and_sequence(draw, min_n: int = 1, max_n: int = 10):
    inst = draw(instances(min_n, max_n))
    perm = draw(st.permutations(list(range(1, inst.n + 1))))
    return inst, make_sequence(perm)


@st.composite
def moves(draw, n: int, lmax: int = 5):
    kind = draw(st.sampled_from(["swap", "lblock_fwd", "lblock_bwd"]))
    if kind == "swap":
        i = draw(st.integers(1, n - 1))
        j = draw(st.integers(i + 1, n))
        return MoveSpec("swap", i, j)
    l = draw(st.integers(1, min(lmax, n - 1)))
    if kind == "lblock_fwd":
        i = draw(st.integers(1, n - l))
        j = draw(st.integers(i + l, n))
        return MoveSpec(kind, i, j, l)
    i = draw(st.integers(2, n - l + 1))
    j = draw(st.integers(1, i - 1))
    return MoveSpec(kind, i, j, l)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tiny():
    # n=1 tardy example: C = 2 + 3 = 5, tardiness (5 - 1) * 5 = 20
    return Instance(1, [3], [1], [5], [[0, 2], [0, 0]])
