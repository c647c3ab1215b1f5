"""参数初始化: 权重 N(0, gain²/fan_in), 偏置为0"""

from typing import Union

import numpy as np

from vqx.m.rand import make_rng
from vqx.nn.encoder import EncoderConfig
from vqx.nn.head import HeadConfig
from vqx.nn.param import Params
from vqx.util.err import ConfigError

ArchConfig = Union[EncoderConfig, HeadConfig]


def _layer(rng: np.random.Generator, fan_in: int, fan_out: int, gain: float = 1.0) -> tuple:
    w = rng.standard_normal((fan_in, fan_out)) * (gain / np.sqrt(fan_in))
    return w, np.zeros(fan_out)


def init_encoder(cfg: EncoderConfig, seed: int) -> Params:
    """初始化骨干网络参数θ"""
    cfg.check()
    rng = make_rng(seed, 0)
    c = cfg.channels
    p: Params = {}
    p["embed.w"], p["embed.b"] = _layer(rng, cfg.voxel_dim, c, cfg.embed_gain)
    for name in ("mix1", "temporal", "mix2"):
        p[f"{name}.w"], p[f"{name}.b"] = _layer(rng, c, c)
    return p


def init_head(cfg: HeadConfig, seed: int) -> Params:
    """初始化回归头参数φ"""
    rng = make_rng(seed, 1)
    p: Params = {}
    p["fc1.w"], p["fc1.b"] = _layer(rng, cfg.channels, cfg.hidden)
    # 输出层无偏置: Q_R只经PLCC类损失使用, 常数平移不产生梯度
    p["fc2.w"], _ = _layer(rng, cfg.hidden, 1)
    return p


def init_params(cfg: ArchConfig, seed: int) -> Params:
    """按结构配置初始化"""
    if isinstance(cfg, EncoderConfig):
        return init_encoder(cfg, seed)
    if isinstance(cfg, HeadConfig):
        return init_head(cfg, seed)
    raise ConfigError(f"未知结构配置: {type(cfg).__name__}")
