import math

import numpy as np

from vqx.eval.metric import *


def test_pearson() -> None:
    a = [0.1, 0.5, 0.2, 0.9]
    b = [1.0, 2.0, 2.5, 4.0]
    assert np.isclose(pearson(a, b), np.corrcoef(a, b)[0, 1])
    assert np.isclose(pearson(a, [2 * x for x in a]), 1.0)
    assert math.isnan(pearson([1, 1, 1], [1, 2, 3]))


def test_average_ranks() -> None:
    assert average_ranks([3, 1, 2, 2]).tolist() == [4.0, 1.0, 2.5, 2.5]


def test_srocc_monotone_invariant() -> None:
    rng = np.random.default_rng(0)
    a, b = rng.random(20), rng.random(20)
    s = srocc(a, b)
    assert np.isclose(srocc(np.exp(a), b ** 3), s)
    assert np.isclose(srocc(-a, b), -s)
    assert srocc(a, np.log(a)) == 1.0


def test_srocc_ties() -> None:
    a, b = [1, 2, 2, 3], [1, 3, 2, 4]
    expect = np.corrcoef([1, 2.5, 2.5, 4], [1, 3, 2, 4])[0, 1]
    assert np.isclose(srocc(a, b), expect)


def test_bad_shape() -> None:
    for a, b in [([1, 2], [1, 2, 3]), ([1], [1])]:
        for fn in (pearson, srocc):
            try:
                fn(a, b)
                assert False
            except ShapeError:
                pass


def _pearson_loop(a: list[float], b: list[float]) -> float:
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = sum((x - ma) ** 2 for x in a)
    vb = sum((y - mb) ** 2 for y in b)
    return cov / math.sqrt(va * vb)


def _ranks_loop(a: list[float]) -> list[float]:
    return [
        1 + sum(y < x for y in a) + 0.5 * (sum(y == x for y in a) - 1)
        for x in a
    ]


def _not_constant(a: list[float]) -> bool:
    return len(set(a)) > 1


def test_random_vectors() -> None:
    rng = np.random.default_rng(4)
    n_checked = 0
    for _ in range(1000):
        n = int(rng.integers(3, 30))
        a, b = rng.standard_normal(n).tolist(), rng.standard_normal(n).tolist()
        assert np.isclose(pearson(a, b), _pearson_loop(a, b), rtol=0, atol=1e-12)

        s, t = float(rng.uniform(0.1, 10.0)), float(rng.uniform(-5.0, 5.0))
        assert np.isclose(pearson([s * x + t for x in a], b), pearson(a, b), rtol=0, atol=1e-10)

        # 整数取值, 制造并列
        ia, ib = rng.integers(0, 5, n).tolist(), rng.integers(0, 5, n).tolist()
        if _not_constant(ia) and _not_constant(ib):
            expect = _pearson_loop(_ranks_loop(ia), _ranks_loop(ib))
            assert np.isclose(srocc(ia, ib), expect, rtol=0, atol=1e-12)
            n_checked += 1
    assert n_checked > 900
