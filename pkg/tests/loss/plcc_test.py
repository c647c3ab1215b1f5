import math

import numpy as np

from vqx.ad.check import grad_check
from vqx.loss.plcc import *


def test_plcc() -> None:
    a = np.array([0.1, 0.4, 0.2, 0.9])
    assert np.isclose(plcc(a, 3 * a + 1).item(), 1.0, atol=1e-6)
    assert np.isclose(plcc(a, -a).item(), -1.0, atol=1e-6)
    assert np.isclose(plcc(a, [1, 2, 3, 4]).item(), np.corrcoef(a, [1, 2, 3, 4])[0, 1], atol=1e-6)


def test_plcc_loss_range() -> None:
    rng = np.random.default_rng(0)
    for _ in range(5):
        v = plcc_loss(rng.standard_normal(8), rng.standard_normal(8)).item()
        assert 0.0 <= v <= 1.0
    assert np.isclose(plcc_loss([1, 2, 3], [3, 2, 1]).item(), 1.0, atol=1e-6)


def test_plcc_constant() -> None:
    assert plcc([1, 1, 1], [1, 2, 3]).item() == 0.0


def test_plcc_bad_shape() -> None:
    for a, b in [([1, 2, 3], [1, 2]), ([1], [2]), (np.zeros((2, 2)), np.zeros((2, 2)))]:
        try:
            plcc(a, b)
            assert False
        except ShapeError:
            pass


def test_plcc_grad() -> None:
    rng = np.random.default_rng(1)
    assert grad_check(lambda x: plcc_loss(x[0], x[1]), [rng.standard_normal(8), rng.standard_normal(8)]) < 1e-4


def _plcc_loop(a: list[float], b: list[float], eps: float = PLCC_EPS) -> float:
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b)) / n
    va = sum((x - ma) ** 2 for x in a) / n + eps
    vb = sum((y - mb) ** 2 for y in b) / n + eps
    return cov / math.sqrt(va * vb)


def test_plcc_random_vectors() -> None:
    rng = np.random.default_rng(9)
    for _ in range(1000):
        n = int(rng.integers(2, 20))
        a, b = rng.standard_normal(n), rng.standard_normal(n)
        if rng.random() < 0.1:
            b = np.full(n, float(b[0]))
        assert np.isclose(plcc(a, b).item(), _plcc_loop(a.tolist(), b.tolist()), rtol=0, atol=1e-12)
        v = plcc_loss(a, b).item()
        assert 0.0 <= v <= 1.0
