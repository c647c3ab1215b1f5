"""统计对比预训练损失

对锚点视图′的第i个片段:
    l′_i = -log[ exp(-d(z′_i, z″_i)/τ) / Σ_j exp(-d(z′_i, z″_j)/τ) ]
视图″对称, 总损失为两者均值之和。
"""

from typing import Optional, Sequence

from vqx.ad.fun import logsumexp, guarded_sqrt
from vqx.ad.tensor import (
    Tensor,
    stack,
    mul,
    add,
    sub,
    mean,
    transpose,
    index,
    sum_,
    div,
    matmul,
)
from vqx.stat.mvg import fit_mvg, stat_distance, FeatureLike, TAU
from vqx.util.err import ShapeError

COSINE_TAU = 0.1
"""余弦相似度变体的温度"""


def distance_matrix(
    z1: Sequence[FeatureLike], z2: Sequence[FeatureLike], ridge: Optional[float] = None
) -> Tensor:
    """D_ij = d(z′_i, z″_j)"""
    if len(z1) != len(z2) or not z1:
        raise ShapeError(f"视图数量不匹配: {len(z1)} vs {len(z2)}")
    s1 = [fit_mvg(z, ridge) for z in z1]
    s2 = [fit_mvg(z, ridge) for z in z2]
    return stack([stack([stat_distance(a, b) for b in s2]) for a in s1])


def _anchor_loss(d: Tensor, tau: float) -> Tensor:
    """以行为锚点的平均softmax负对数似然"""
    k = d.shape[0]
    diag = index(d, (list(range(k)), list(range(k))))
    lse = logsumexp(mul(d, -1.0 / tau), axis=1)
    return mean(add(mul(diag, 1.0 / tau), lse))


def contrastive_from_distances(d: Tensor, tau: float = TAU) -> Tensor:
    """由K×K距离矩阵计算双向对比损失"""
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ShapeError(f"距离矩阵必须为方阵: {d.shape}")
    assert tau > 0
    return add(_anchor_loss(d, tau), _anchor_loss(transpose(d), tau))


def contrastive_pretrain_loss(
    z1: Sequence[FeatureLike],
    z2: Sequence[FeatureLike],
    tau: float = TAU,
    ridge: Optional[float] = None,
) -> Tensor:
    """K个片段两视图特征集的统计对比损失"""
    return contrastive_from_distances(distance_matrix(z1, z2, ridge), tau)


def _pooled_unit(z: FeatureLike) -> Tensor:
    p = mean(z if isinstance(z, Tensor) else Tensor(z), axis=0)
    return div(p, guarded_sqrt(add(sum_(mul(p, p)), 1e-12)))


def cosine_contrastive_loss(
    z1: Sequence[FeatureLike], z2: Sequence[FeatureLike], tau: float = COSINE_TAU
) -> Tensor:
    """相似度变体: 均值池化特征的余弦距离 1-cos 代替统计距离"""
    if len(z1) != len(z2) or not z1:
        raise ShapeError(f"视图数量不匹配: {len(z1)} vs {len(z2)}")
    u1 = stack([_pooled_unit(z) for z in z1])
    u2 = stack([_pooled_unit(z) for z in z2])
    d = sub(1.0, matmul(u1, transpose(u2)))
    return contrastive_from_distances(d, tau)
