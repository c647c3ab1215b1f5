"""网络与损失常用的复合原语"""

from typing import Optional

import numpy as np
from scipy.special import expit

from vqx.ad.tensor import (
    Tensor,
    ArrayLike,
    as_tensor,
    make_node,
    matmul,
    add,
    exp,
    log,
    sum_,
    stop_gradient,
)


def silu(a: ArrayLike) -> Tensor:
    """x·σ(x), 光滑非线性"""
    a = as_tensor(a)
    s = expit(a.data)
    return make_node(
        a.data * s, (a,), lambda g: (g * s * (1.0 + a.data * (1.0 - s)),), "silu"
    )


def affine(x: Tensor, w: Tensor, b: Optional[Tensor] = None) -> Tensor:
    """仿射层: x @ W + b"""
    y = matmul(x, w)
    return y if b is None else add(y, b)


def logsumexp(a: Tensor, axis: int) -> Tensor:
    """数值稳定的 log Σ exp, 平移量不求导"""
    m = stop_gradient(Tensor(np.max(a.data, axis=axis, keepdims=True)))
    s = sum_(exp(a - m), axis=axis, keepdims=True)
    return sum_(log(s) + m, axis=axis)


def guarded_sqrt(a: ArrayLike, floor: float = 1e-12) -> Tensor:
    """sqrt(max(a, 0)), a不超过floor时梯度为0"""
    a = as_tensor(a)
    y = np.sqrt(np.maximum(a.data, 0.0))
    live = a.data > floor

    def pullback(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.where(live, g / (2.0 * np.where(live, y, 1.0)), 0.0),)

    return make_node(y, (a,), pullback, "guarded_sqrt")
