"""对称正定求解原语: Cholesky + 对角抖动逐级放大"""

from typing import Any

import numpy as np
from loguru import logger
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from vqx.ad.tensor import Tensor, ArrayLike, as_tensor, make_node
from vqx.util.err import NumericError, ShapeError

JITTERS = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4]
"""抖动序列(相对对角均值)"""

Factor = tuple[Any, bool]


def symmetrize(s: np.ndarray) -> np.ndarray:
    """取对称部分"""
    return (s + s.T) * 0.5


def cho_factor_jitter(s: np.ndarray) -> Factor:
    """Cholesky分解, 失败时逐级加对角抖动"""
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ShapeError(f"需要方阵: {s.shape}")
    if not np.all(np.isfinite(s)):
        raise NumericError("矩阵含非有限值")
    try:
        return cho_factor(s, lower=True, check_finite=False)
    except LinAlgError:
        pass

    scale = float(np.mean(np.abs(np.diag(s)))) or 1.0
    eye = np.eye(s.shape[0])
    for j in JITTERS:
        try:
            f = cho_factor(s + j * scale * eye, lower=True, check_finite=False)
            logger.debug(f"Cholesky抖动: {j:.0e} x {scale:.3e}")
            return f
        except LinAlgError:
            continue
    raise NumericError(f"对称求解失败, 抖动已达 {JITTERS[-1]:.0e}")


def _check_rhs(s: Tensor, b: Tensor) -> None:
    if s.ndim != 2 or s.shape[0] != s.shape[1] or b.ndim not in (1, 2) or b.shape[0] != s.shape[0]:
        raise ShapeError(f"sym_solve: 形状不兼容 {s.shape}, {b.shape}")


def _outer_sym(gb: np.ndarray, x: np.ndarray) -> np.ndarray:
    """-(gb xᵀ + x gbᵀ)/2, 右端为矩阵时对列求和"""
    if x.ndim == 1:
        m = np.outer(gb, x)
    else:
        m = gb @ x.T
    return -0.5 * (m + m.T)


def sym_solve(s: ArrayLike, b: ArrayLike) -> Tensor:
    """求解 S x = b, S取对称部分"""
    s, b = as_tensor(s), as_tensor(b)
    _check_rhs(s, b)
    f = cho_factor_jitter(symmetrize(s.data))
    x = cho_solve(f, b.data, check_finite=False)

    def pullback(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        gb = cho_solve(f, g, check_finite=False)
        return _outer_sym(gb, x), gb

    return make_node(x, (s, b), pullback, "sym_solve")


def mahalanobis_sq(mu_a: ArrayLike, mu_b: ArrayLike, cov_a: ArrayLike, cov_b: ArrayLike) -> Tensor:
    """合并协方差下的马氏距离平方: δᵀS⁻¹δ, S=(Σa+Σb)/2, δ=μa-μb

    反向为闭式: ∂/∂μa = 2S⁻¹δ, ∂/∂μb = -2S⁻¹δ, ∂/∂Σa = ∂/∂Σb = -½S⁻¹δδᵀS⁻¹
    """
    mu_a, mu_b, cov_a, cov_b = (as_tensor(t) for t in (mu_a, mu_b, cov_a, cov_b))
    c = mu_a.size
    if mu_a.shape != (c,) or mu_b.shape != (c,) or cov_a.shape != (c, c) or cov_b.shape != (c, c):
        raise ShapeError(
            f"mahalanobis_sq: 形状不兼容 {mu_a.shape} {mu_b.shape} {cov_a.shape} {cov_b.shape}"
        )
    delta = mu_a.data - mu_b.data
    f = cho_factor_jitter(symmetrize((cov_a.data + cov_b.data) * 0.5))
    x = cho_solve(f, delta, check_finite=False)
    d2 = np.asarray(float(delta @ x))

    def pullback(g: np.ndarray) -> tuple[np.ndarray, ...]:
        gs = -0.5 * float(g) * np.outer(x, x)
        return 2.0 * float(g) * x, -2.0 * float(g) * x, gs, gs

    return make_node(d2, (mu_a, mu_b, cov_a, cov_b), pullback, "mahalanobis_sq")
