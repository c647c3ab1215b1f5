from vqx.ad.tensor import Tensor, ArrayLike, as_tensor, mean, sub, mul, div, sqrt, add
from vqx.util.err import ShapeError

PLCC_EPS = 1e-8
"""方差保护项"""


def _check_pair(a: Tensor, b: Tensor) -> None:
    if a.ndim != 1 or a.shape != b.shape:
        raise ShapeError(f"需要等长向量: {a.shape} vs {b.shape}")
    if a.size < 2:
        raise ShapeError(f"向量长度不足: {a.size}")


def plcc(a: ArrayLike, b: ArrayLike, eps: float = PLCC_EPS) -> Tensor:
    """批内Pearson线性相关: cov/sqrt((var_a+ε)(var_b+ε))"""
    a, b = as_tensor(a), as_tensor(b)
    _check_pair(a, b)
    ac = sub(a, mean(a))
    bc = sub(b, mean(b))
    cov = mean(mul(ac, bc))
    va = add(mean(mul(ac, ac)), eps)
    vb = add(mean(mul(bc, bc)), eps)
    return div(cov, sqrt(mul(va, vb)))


def plcc_loss(a: ArrayLike, b: ArrayLike) -> Tensor:
    """(1 - PLCC)/2, 取值[0,1]"""
    return mul(sub(1.0, plcc(a, b)), 0.5)
