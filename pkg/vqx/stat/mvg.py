"""多元高斯(MVG)统计与统计质量距离

协方差使用Bessel修正(1/(N-1)), 并无条件加对角岭:
    ridge 缺省为 1e-6·trace(Σ)/C + 1e-12, 随z可微
"""

from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from vqx.ad.fun import guarded_sqrt
from vqx.ad.linalg import mahalanobis_sq
from vqx.ad.tensor import (
    Tensor,
    as_tensor,
    mean,
    sub,
    mul,
    sum_,
    add,
    div,
    exp,
    transpose,
    matmul,
    concat,
)
from vqx.util.err import ShapeError, DataError

RIDGE_REL = 1e-6
"""相对岭系数"""
RIDGE_FLOOR = 1e-12
"""绝对岭下限"""
DIST_FLOOR = 1e-12
"""d²小于此值时距离梯度为0"""
TAU = 10.0
"""距离温度系数"""

FeatureLike = Union[Tensor, np.ndarray]


class MvgStats(NamedTuple):
    """(μ, Σ)"""

    mu: Tensor
    cov: Tensor


class PristineModel(BaseModel):
    """原始语料库统计(常量)"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mu: np.ndarray
    """μ^r"""
    cov: np.ndarray
    """Σ^r"""
    n_source_clips: int
    """语料片段数N_p"""

    def stats(self) -> MvgStats:
        """作为常量参与计算"""
        return MvgStats(Tensor(self.mu), Tensor(self.cov))


def fit_mvg(z: FeatureLike, ridge: Optional[float] = None) -> MvgStats:
    """拟合多元高斯: μ为列均值, Σ为样本协方差 + ridge·I"""
    z = as_tensor(z)
    if z.ndim != 2:
        raise ShapeError(f"特征集必须为N×C: {z.shape}")
    n, c = z.shape
    if n < 2:
        raise ShapeError(f"特征集行数不足: N={n}")
    mu = mean(z, axis=0)
    zc = sub(z, mu)
    scatter = div(matmul(transpose(zc), zc), float(n - 1))
    eye = np.eye(c)
    if ridge is None:
        tr = div(sum_(mul(zc, zc)), float(n - 1))
        r = add(mul(tr, RIDGE_REL / c), RIDGE_FLOOR)
        cov = add(scatter, mul(r, eye))
    else:
        cov = add(scatter, ridge * eye)
    return MvgStats(mu, cov)


def stat_distance_sq(a: MvgStats, b: MvgStats) -> Tensor:
    """δᵀS⁻¹δ, S=(Σa+Σb)/2"""
    return mahalanobis_sq(a.mu, b.mu, a.cov, b.cov)


def stat_distance(a: MvgStats, b: MvgStats) -> Tensor:
    """统计质量距离 d = sqrt(δᵀS⁻¹δ)"""
    return guarded_sqrt(stat_distance_sq(a, b), DIST_FLOOR)


def feature_distance(za: FeatureLike, zb: FeatureLike, ridge: Optional[float] = None) -> Tensor:
    """两个特征集拟合后的距离"""
    return stat_distance(fit_mvg(za, ridge), fit_mvg(zb, ridge))


def fit_pristine_corpus(
    feature_sets: Sequence[FeatureLike], ridge: Optional[float] = None
) -> PristineModel:
    """拼接全部原始片段特征后拟合MVG"""
    if not feature_sets:
        raise DataError("原始语料库为空")
    rows = concat([Tensor(as_tensor(z).data) for z in feature_sets], axis=0)
    if rows.shape[0] < 2:
        raise DataError(f"原始语料库行数不足: {rows.shape[0]}")
    s = fit_mvg(rows, ridge)
    return PristineModel(mu=s.mu.data, cov=s.cov.data, n_source_clips=len(feature_sets))


def q_distance(
    z: FeatureLike, pristine: PristineModel, tau: float = TAU, ridge: Optional[float] = None
) -> Tensor:
    """距离模型质量 Q_D = exp(-d/τ), 原始统计不求导"""
    assert tau > 0
    d = stat_distance(fit_mvg(z, ridge), pristine.stats())
    return exp(mul(d, -1.0 / tau))
