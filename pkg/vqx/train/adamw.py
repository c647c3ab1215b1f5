"""AdamW: 偏差修正的自适应更新 + 解耦权重衰减

    p ← p·(1 - lr·wd)
    m ← β₁m + (1-β₁)g,  v ← β₂v + (1-β₂)g²
    p ← p - lr·m̂/(√v̂ + ε)
"""

from typing import Mapping

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from rustshed import Result, Ok, Err

from vqx.nn.param import Params, all_finite
from vqx.util.err import ShapeError


class AdamWConfig(BaseModel):
    """优化器超参数"""

    model_config = ConfigDict(extra="forbid")

    lr: float = Field(default=1e-4, gt=0)
    weight_decay: float = Field(default=0.05, ge=0)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


class OptimState(BaseModel):
    """一阶/二阶矩与步数"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    m: dict[str, np.ndarray] = {}
    v: dict[str, np.ndarray] = {}
    step: int = 0


def init_state(params: Params) -> OptimState:
    """全零矩"""
    return OptimState(
        m={k: np.zeros_like(p) for k, p in params.items()},
        v={k: np.zeros_like(p) for k, p in params.items()},
        step=0,
    )


def adamw_step(
    params: Params, grads: Mapping[str, np.ndarray], state: OptimState, cfg: AdamWConfig
) -> Result[tuple[Params, OptimState], str]:
    """一步更新; 梯度含非有限值时拒绝, 参数与状态不变"""
    if params.keys() != grads.keys() or params.keys() != state.m.keys():
        raise ShapeError("参数/梯度/状态的键不一致")
    for k, p in params.items():
        if grads[k].shape != p.shape:
            raise ShapeError(f"梯度形状不匹配: {k} {grads[k].shape} vs {p.shape}")
    if not all_finite(grads):
        return Err(f"梯度含非有限值, 拒绝第{state.step + 1}步")

    t = state.step + 1
    b1, b2 = cfg.beta1, cfg.beta2
    c1, c2 = 1.0 - b1**t, 1.0 - b2**t
    decay = 1.0 - cfg.lr * cfg.weight_decay
    new_p: Params = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for k, p in params.items():
        g = grads[k]
        m = b1 * state.m[k] + (1.0 - b1) * g
        v = b2 * state.v[k] + (1.0 - b2) * g * g
        new_p[k] = p * decay - cfg.lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps)
        new_m[k], new_v[k] = m, v
    return Ok((new_p, OptimState(m=new_m, v=new_v, step=t)))
