from typing import Callable, Sequence

import numpy as np

from vqx.ad.tensor import Tensor, param, grad
from vqx.util.err import NumericError

ScalarFn = Callable[[list[Tensor]], Tensor]
"""标量函数: 输入张量列表 => 标量张量"""


def _eval(fn: ScalarFn, arrays: Sequence[np.ndarray]) -> float:
    y = fn([Tensor(a) for a in arrays])
    v = float(np.sum(y.data))
    if not np.isfinite(v):
        raise NumericError("grad_check: 函数值非有限")
    return v


def numeric_grad(fn: ScalarFn, inputs: Sequence[np.ndarray], eps: float = 1e-6) -> list[np.ndarray]:
    """中心差分梯度"""
    arrays = [np.array(a, dtype=np.float64) for a in inputs]
    grads = []
    for a in arrays:
        g = np.zeros_like(a)
        flat, gflat = a.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            v = flat[i]
            flat[i] = v + eps
            fp = _eval(fn, arrays)
            flat[i] = v - eps
            fm = _eval(fn, arrays)
            flat[i] = v
            gflat[i] = (fp - fm) / (2.0 * eps)
        grads.append(g)
    return grads


def analytic_grad(fn: ScalarFn, inputs: Sequence[np.ndarray]) -> list[np.ndarray]:
    """反向传播梯度"""
    params = [param(np.array(a, dtype=np.float64)) for a in inputs]
    y = fn(params)
    if not np.all(np.isfinite(y.data)):
        raise NumericError("grad_check: 函数值非有限")
    return grad(y, params)


REL_FLOOR = 1e-12
"""相对误差分母下限"""


def grad_check(
    fn: ScalarFn, inputs: Sequence[np.ndarray], eps: float = 1e-6, abs_tol: float = 0.0
) -> float:
    """逐坐标比较解析梯度与中心差分, 返回最大相对误差

    相对误差 = |a-n| / max(1e-12, |a|+|n|);
    |a-n| <= abs_tol 的坐标视为一致(差分舍入误差), 缺省不放宽。
    """
    assert eps > 0
    ga = analytic_grad(fn, inputs)
    gn = numeric_grad(fn, inputs, eps)
    err = 0.0
    for a, n in zip(ga, gn):
        if a.size == 0:
            continue
        diff = np.abs(a - n)
        rel = diff / np.maximum(REL_FLOOR, np.abs(a) + np.abs(n))
        rel[diff <= abs_tol] = 0.0
        err = max(err, float(np.max(rel)))
    return err
