from typing import Callable, Optional

import numpy as np
from loguru import logger

from vqx.ad.tensor import Tensor, grad
from vqx.nn.param import Params, to_tensors
from vqx.train.adamw import AdamWConfig, OptimState, adamw_step
from vqx.util.err import NumericError

LossFn = Callable[[dict[str, Tensor]], Tensor]
"""参数张量 => 标量损失"""


class RejectCounter:
    """拒绝步计数, 连续超过上限则中止"""

    def __init__(self, limit: int):
        self.limit = limit
        self.consecutive = 0
        self.total = 0

    def accept(self) -> None:
        self.consecutive = 0

    def reject(self, why: str) -> None:
        self.consecutive += 1
        self.total += 1
        logger.warning(f"跳过优化步: {why}")
        if self.consecutive >= self.limit:
            raise NumericError(f"连续{self.consecutive}步被拒绝, 中止训练")


def param_grads(params: Params, loss_fn: LossFn) -> tuple[Tensor, dict[str, np.ndarray]]:
    """前向并反向, 返回损失与各参数梯度"""
    tensors = to_tensors(params)
    loss = loss_fn(tensors)
    gs = grad(loss, tensors.values())
    return loss, dict(zip(tensors.keys(), gs))


def optimize_step(
    params: Params,
    state: OptimState,
    loss_fn: LossFn,
    cfg: AdamWConfig,
    counter: RejectCounter,
) -> tuple[Params, OptimState, Optional[Tensor]]:
    """一步优化; 数值失败或梯度非有限时跳过, 返回原参数与None"""
    try:
        loss, grads = param_grads(params, loss_fn)
    except NumericError as e:
        counter.reject(str(e))
        return params, state, None
    r = adamw_step(params, grads, state, cfg)
    if r.is_err():
        counter.reject(r.unwrap_err())
        return params, state, None
    counter.accept()
    new_params, new_state = r.unwrap()
    return new_params, new_state, loss
