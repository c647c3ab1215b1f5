"""评估指标: 不带保护项的PLCC与SROCC"""

import numpy as np
from numpy.typing import ArrayLike
from scipy.stats import rankdata

from vqx.util.err import ShapeError


def _pair(a: ArrayLike, b: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(a, dtype=np.float64).reshape(-1)
    y = np.asarray(b, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise ShapeError(f"需要等长向量: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ShapeError(f"向量长度不足: {x.size}")
    return x, y


def pearson(a: ArrayLike, b: ArrayLike) -> float:
    """Pearson线性相关, 常量向量为NaN"""
    x, y = _pair(a, b)
    xc, yc = x - x.mean(), y - y.mean()
    den = np.sqrt(np.dot(xc, xc) * np.dot(yc, yc))
    if den == 0:
        return float("nan")
    return float(np.clip(np.dot(xc, yc) / den, -1.0, 1.0))


def average_ranks(a: ArrayLike) -> np.ndarray:
    """平均秩, 并列取平均"""
    return rankdata(np.asarray(a, dtype=np.float64).reshape(-1), method="average")


def srocc(a: ArrayLike, b: ArrayLike) -> float:
    """Spearman秩相关: 平均秩上的Pearson"""
    x, y = _pair(a, b)
    return pearson(average_ranks(x), average_ranks(y))
