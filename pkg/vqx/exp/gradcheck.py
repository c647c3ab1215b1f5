"""梯度检查套件: 各损失, 距离, 网络的解析梯度与中心差分比较"""

from typing import NamedTuple, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel

from vqx.ad.check import ScalarFn, grad_check
from vqx.ad.linalg import sym_solve, mahalanobis_sq
from vqx.ad.tensor import Tensor, mul, sum_
from vqx.loss.contrastive import contrastive_pretrain_loss
from vqx.loss.ssl import supervised_loss, intra_consistency_loss, knowledge_transfer_loss
from vqx.m.rand import make_rng
from vqx.nn.encoder import EncoderConfig, encode_frames
from vqx.nn.head import HeadConfig, regress_head
from vqx.nn.init import init_encoder, init_head
from vqx.sample.fragment import FragmentConfig
from vqx.stat.mvg import PristineModel, feature_distance, q_distance

MAX_REL_ERR = 1e-4
"""通过阈值"""
NET_ABS_TOL = 1e-7
"""网络参数: 差分舍入误差内的绝对容差"""
STAT_ABS_TOL = 1e-8
"""多坐标统计量与对比损失的绝对容差"""


class GradCase(NamedTuple):
    """检查项"""

    name: str
    fn: ScalarFn
    inputs: list[np.ndarray]
    abs_tol: float = 0.0
    """绝对容差, 0为严格相对误差"""


class GradRow(BaseModel):
    """结果行"""

    name: str
    max_rel_err: float
    passed: bool


def _spd(rng: np.random.Generator, c: int) -> np.ndarray:
    a = rng.standard_normal((c, c))
    return a @ a.T / c + np.eye(c)


def _tiny_encoder() -> EncoderConfig:
    frag = FragmentConfig(grid_h=2, grid_w=2, patch=2, n_frames=4)
    return EncoderConfig(fragment=frag, channels=3, t_stride=2, embed_gain=1.0)


def _transfer_case(rng: np.random.Generator, name: str, eps_r: float, eps_d: float) -> GradCase:
    """只对被指导的分支求导, 伪标签分支为常量"""
    other = rng.standard_normal(6)
    if eps_r > eps_d:
        fn: ScalarFn = lambda x: knowledge_transfer_loss(x[0], other, eps_r, eps_d)  # noqa: E731
    else:
        fn = lambda x: knowledge_transfer_loss(other, x[0], eps_r, eps_d)  # noqa: E731
    return GradCase(name, fn, [rng.standard_normal(6)])


def _encoder_case(rng: np.random.Generator) -> GradCase:
    enc = _tiny_encoder()
    theta = init_encoder(enc, int(rng.integers(1 << 31)))
    keys = list(theta)
    frames = rng.uniform(0, 1, size=(4, 4, 4, 3))
    w = rng.standard_normal((enc.n_tokens, enc.channels))

    def fn(x: list[Tensor]) -> Tensor:
        z = encode_frames(Tensor(frames), dict(zip(keys, x)), enc)
        return sum_(mul(z, w))

    return GradCase("encoder", fn, [theta[k] for k in keys], NET_ABS_TOL)


def _head_case(rng: np.random.Generator) -> GradCase:
    phi = init_head(HeadConfig(channels=4, hidden=5), int(rng.integers(1 << 31)))
    keys = list(phi)

    def fn(x: list[Tensor]) -> Tensor:
        _, q = regress_head(x[0], dict(zip(keys, x[1:])))
        return q

    return GradCase("head", fn, [rng.standard_normal((8, 4))] + [phi[k] for k in keys], NET_ABS_TOL)


def standard_cases(seed: int = 0) -> list[GradCase]:
    """全部标准检查项(C≤8, N≤32, 批≤8)"""
    rng = make_rng(seed)
    c = 3
    pz = rng.standard_normal((20, c))
    pristine = PristineModel(mu=pz.mean(axis=0), cov=np.cov(pz, rowvar=False), n_source_clips=1)
    labels = rng.standard_normal(6)
    wsolve = rng.standard_normal(c)

    cases = [
        GradCase(
            "sym_solve",
            lambda x: sum_(mul(sym_solve(x[0], x[1]), wsolve)),
            [_spd(rng, c), rng.standard_normal(c)],
        ),
        GradCase(
            "mahalanobis_sq",
            lambda x: mahalanobis_sq(x[0], x[1], x[2], x[3]),
            [rng.standard_normal(c), rng.standard_normal(c), _spd(rng, c), _spd(rng, c)],
        ),
        GradCase(
            "stat_distance",
            lambda x: feature_distance(x[0], x[1]),
            [rng.standard_normal((12, c)), rng.standard_normal((12, c)) + 0.5],
            STAT_ABS_TOL,
        ),
        GradCase(
            "contrastive",
            lambda x: contrastive_pretrain_loss(x[:3], x[3:]),
            [rng.standard_normal((10, c)) * (1 + i % 3) for i in range(6)],
            STAT_ABS_TOL,
        ),
        GradCase(
            "q_distance",
            lambda x: q_distance(x[0], pristine),
            [rng.standard_normal((10, c)) + 1.0],
            STAT_ABS_TOL,
        ),
        GradCase(
            "supervised",
            lambda x: supervised_loss(x[0], x[1], labels),
            [rng.standard_normal(6), rng.standard_normal(6)],
        ),
        GradCase(
            "consistency",
            lambda x: intra_consistency_loss(x[0], x[1], x[2], x[3]),
            [rng.standard_normal(6) for _ in range(4)],
        ),
        _transfer_case(rng, "transfer_m1", 0.5, 0.1),
        _transfer_case(rng, "transfer_m0", 0.1, 0.5),
        GradCase(
            "transfer_unmasked",
            lambda x: knowledge_transfer_loss(x[0], x[1], 0.0, 0.0, masked=False),
            [rng.standard_normal(6), rng.standard_normal(6)],
        ),
        _encoder_case(rng),
        _head_case(rng),
    ]
    return cases


def run_cases(cases: Sequence[GradCase], tol: float = MAX_REL_ERR) -> list[GradRow]:
    """逐项检查"""
    rows = []
    for case in cases:
        err = grad_check(case.fn, case.inputs, abs_tol=case.abs_tol)
        row = GradRow(name=case.name, max_rel_err=err, passed=err < tol)
        logger.debug(f"gradcheck {row.name}: {row.max_rel_err:.3e}")
        rows.append(row)
    return rows


def run_gradcheck(seed: int = 0, cases: Optional[Sequence[GradCase]] = None) -> list[GradRow]:
    """运行检查套件"""
    return run_cases(standard_cases(seed) if cases is None else cases)


def gradcheck_lines(rows: Sequence[GradRow]) -> list[str]:
    """通过/失败表"""
    lines = [f"{'case':<20}{'max_rel_err':>14}  result"]
    for r in rows:
        lines.append(f"{r.name:<20}{r.max_rel_err:>14.3e}  {'PASS' if r.passed else 'FAIL'}")
    return lines
