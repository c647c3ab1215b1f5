import numpy as np

from vqx.eval.wilcoxon import *


def test_exact_less() -> None:
    r = wilcoxon_rank_sum([1, 2, 3], [4, 5, 6], Alternative.LESS)
    assert r.exact and r.statistic == 6.0
    assert np.isclose(r.p_value, 0.05)
    assert np.isclose(wilcoxon_rank_sum([1, 2, 3], [4, 5, 6], "x>y").p_value, 1.0)
    assert np.isclose(wilcoxon_rank_sum([1, 2, 3], [4, 5, 6], "two_sided").p_value, 0.1)
    assert np.isclose(wilcoxon_rank_sum([4, 5, 6], [1, 2, 3], "greater").p_value, 0.05)


def test_identical_samples() -> None:
    r = wilcoxon_rank_sum([1, 2, 3], [1, 2, 3])
    assert r.statistic == 10.5
    assert r.p_value >= 0.5


def test_exact_distribution() -> None:
    d = exact_distribution(np.arange(1.0, 5.0), 2)
    assert sorted(d.tolist()) == [3, 4, 5, 5, 6, 7]


def test_exact_vs_normal() -> None:
    for x, y in [
        ([1, 3, 5, 7, 9, 11], [2, 4, 6, 8, 10, 12]),
        ([1, 2, 3, 5, 7, 8], [4, 6, 9, 10, 11, 12]),
    ]:
        exact = wilcoxon_rank_sum(x, y)
        approx = normal_rank_sum(x, y)
        assert exact.exact and not approx.exact
        assert abs(exact.p_value - approx.p_value) < 0.05


def test_large_sample_normal() -> None:
    rng = np.random.default_rng(0)
    r = wilcoxon_rank_sum(rng.random(10), rng.random(10) + 1.0)
    assert not r.exact
    assert r.p_value < 1e-3


def test_constant_samples() -> None:
    assert normal_rank_sum([1.0] * 8, [1.0] * 8).p_value == 1.0


def test_alternative_of() -> None:
    assert Alternative.of("x<y") == Alternative.LESS
    assert Alternative.of(Alternative.GREATER) == Alternative.GREATER
    assert Alternative.of("two-sided") == Alternative.TWO_SIDED


def test_empty() -> None:
    try:
        wilcoxon_rank_sum([], [1.0])
        assert False
    except ShapeError:
        pass
