"""Wilcoxon秩和检验

统计量W为x在合并样本中的平均秩之和。
合并样本数不超过EXACT_MAX时枚举全部分配求精确p值,
否则用带并列修正方差与0.5连续性修正的正态近似。
"""

import itertools
import math
from enum import Enum
from typing import Union

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel
from scipy.stats import norm

from vqx.eval.metric import average_ranks
from vqx.util.err import ShapeError

EXACT_MAX = 12
"""精确枚举的合并样本数上限"""
TOL = 1e-9
"""秩和比较容差"""


class Alternative(str, Enum):
    """备择假设"""

    LESS = "less"
    """x 倾向小于 y"""
    GREATER = "greater"
    """x 倾向大于 y"""
    TWO_SIDED = "two-sided"

    @staticmethod
    def of(s: Union[str, "Alternative"]) -> "Alternative":
        aliases = {"x<y": "less", "x>y": "greater", "two_sided": "two-sided"}
        if isinstance(s, Alternative):
            return s
        return Alternative(aliases.get(s, s))


class RankSumResult(BaseModel):
    """检验结果"""

    statistic: float
    """W"""
    p_value: float
    exact: bool
    """是否为精确枚举"""


def _combine(p_less: float, p_greater: float, alt: Alternative) -> float:
    if alt == Alternative.LESS:
        return p_less
    if alt == Alternative.GREATER:
        return p_greater
    return min(1.0, 2.0 * min(p_less, p_greater))


def exact_distribution(ranks: np.ndarray, n: int) -> np.ndarray:
    """从合并秩中任取n个的全部秩和(等概率)"""
    return np.array([sum(c) for c in itertools.combinations(ranks.tolist(), n)])


def _exact_p(ranks: np.ndarray, n: int, w: float, alt: Alternative) -> float:
    dist = exact_distribution(ranks, n)
    p_less = float(np.count_nonzero(dist <= w + TOL)) / dist.size
    p_greater = float(np.count_nonzero(dist >= w - TOL)) / dist.size
    return _combine(p_less, p_greater, alt)


def _normal_p(ranks: np.ndarray, n: int, m: int, w: float, alt: Alternative) -> float:
    big_n = n + m
    expect = n * (big_n + 1) / 2.0
    _, counts = np.unique(ranks, return_counts=True)
    ties = float(np.sum(counts**3 - counts)) / (big_n * (big_n - 1))
    var = n * m / 12.0 * ((big_n + 1) - ties)
    if var <= 0:
        return 1.0
    sd = math.sqrt(var)
    p_less = float(norm.cdf((w - expect + 0.5) / sd))
    p_greater = float(norm.sf((w - expect - 0.5) / sd))
    return _combine(min(p_less, 1.0), min(p_greater, 1.0), alt)


def wilcoxon_rank_sum(
    x: ArrayLike, y: ArrayLike, alternative: Union[str, Alternative] = Alternative.LESS
) -> RankSumResult:
    """秩和检验, 返回W与p值"""
    a = np.asarray(x, dtype=np.float64).reshape(-1)
    b = np.asarray(y, dtype=np.float64).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise ShapeError(f"样本为空: n={a.size}, m={b.size}")
    alt = Alternative.of(alternative)
    ranks = average_ranks(np.concatenate([a, b]))
    n, m = a.size, b.size
    w = float(ranks[:n].sum())
    if n + m <= EXACT_MAX:
        return RankSumResult(statistic=w, p_value=_exact_p(ranks, n, w, alt), exact=True)
    return RankSumResult(statistic=w, p_value=_normal_p(ranks, n, m, w, alt), exact=False)


def normal_rank_sum(
    x: ArrayLike, y: ArrayLike, alternative: Union[str, Alternative] = Alternative.LESS
) -> RankSumResult:
    """强制使用正态近似, 用于与精确结果交叉核对"""
    a = np.asarray(x, dtype=np.float64).reshape(-1)
    b = np.asarray(y, dtype=np.float64).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise ShapeError(f"样本为空: n={a.size}, m={b.size}")
    ranks = average_ranks(np.concatenate([a, b]))
    w = float(ranks[: a.size].sum())
    p = _normal_p(ranks, a.size, b.size, w, Alternative.of(alternative))
    return RankSumResult(statistic=w, p_value=p, exact=False)
