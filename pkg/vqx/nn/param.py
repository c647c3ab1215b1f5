from typing import Mapping

import numpy as np

from vqx.ad.tensor import Tensor

Params = dict[str, np.ndarray]
"""参数集: 名称 => 数组"""

TParams = Mapping[str, Tensor]
"""参与计算图的参数集"""


def to_tensors(p: Params, requires_grad: bool = True) -> dict[str, Tensor]:
    """参数集转为张量"""
    return {k: Tensor(v, requires_grad=requires_grad) for k, v in p.items()}


def prefixed(p: Mapping[str, object], prefix: str) -> dict:
    """键加前缀"""
    return {f"{prefix}/{k}": v for k, v in p.items()}


def unprefixed(p: Mapping[str, object], prefix: str) -> dict:
    """取出指定前缀的键, 去掉前缀"""
    head = prefix + "/"
    return {k[len(head) :]: v for k, v in p.items() if k.startswith(head)}


def copy_params(p: Params) -> Params:
    """深拷贝"""
    return {k: v.copy() for k, v in p.items()}


def params_equal(a: Params, b: Params) -> bool:
    """逐位相同"""
    return a.keys() == b.keys() and all(np.array_equal(a[k], b[k]) for k in a)


def n_values(p: Params) -> int:
    """参数个数"""
    return sum(int(v.size) for v in p.values())


def all_finite(p: Mapping[str, np.ndarray]) -> bool:
    """是否全为有限值"""
    return all(bool(np.all(np.isfinite(v))) for v in p.values())
