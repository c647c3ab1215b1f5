"""推断: Q = (Q_R + Q_D)/2, 每个模型在相同的F个片段上取平均"""

from typing import Optional

import numpy as np
from pydantic import BaseModel

from vqx.ad.tensor import Tensor
from vqx.clip.codec import RawClip
from vqx.clip.manifest import DatasetManifest, ClipCache
from vqx.m.rand import derive_seed
from vqx.nn.encoder import encode
from vqx.nn.head import regress_head
from vqx.nn.param import Params, TParams
from vqx.sample.fragment import qcs_sample, Geometry
from vqx.stat.mvg import q_distance
from vqx.stat.qmap import project_quality_map
from vqx.train.cfg import RunConfig
from vqx.train.sslvqa import Models
from vqx.util.err import DataError

EVAL_KEY = 20
"""推断采样种子键"""


class Prediction(BaseModel):
    """单个片段的预测"""

    q_r: float
    q_d: float
    q: float
    """原始平均"""


def eval_seed(cfg: RunConfig) -> int:
    """缺省推断种子"""
    return derive_seed(cfg.seed, EVAL_KEY)


def _frozen(p: Params) -> TParams:
    return {k: Tensor(v) for k, v in p.items()}


def infer_quality(
    clip: RawClip, models: Models, cfg: RunConfig, seed: Optional[int] = None
) -> Prediction:
    """单个片段的 (Q_R, Q_D, Q)"""
    if models.pristine is None:
        raise DataError("模型缺少原始语料统计")
    seed = eval_seed(cfg) if seed is None else seed
    enc = cfg.encoder_config()
    frag = cfg.fragment_config()
    theta_r, theta_d, phi = _frozen(models.theta_r), _frozen(models.theta_d), _frozen(models.phi)
    qr, qd = [], []
    for f in range(cfg.n_fragments):
        x = qcs_sample(clip, frag, derive_seed(seed, f))
        qr.append(regress_head(encode(x, theta_r, enc), phi)[1].item())
        qd.append(q_distance(encode(x, theta_d, enc), models.pristine, cfg.tau, cfg.ridge).item())
    q_r, q_d = float(np.mean(qr)), float(np.mean(qd))
    return Prediction(q_r=q_r, q_d=q_d, q=(q_r + q_d) / 2.0)


def predict_manifest(
    manifest: DatasetManifest, models: Models, cfg: RunConfig, seed: Optional[int] = None
) -> list[Prediction]:
    """清单中每个片段的预测, 第i个片段用派生种子(seed, i)"""
    seed = eval_seed(cfg) if seed is None else seed
    cache = ClipCache(manifest)
    return [
        infer_quality(cache.get(r), models, cfg, derive_seed(seed, i))
        for i, r in enumerate(manifest.records)
    ]


def znormalize(v: np.ndarray) -> np.ndarray:
    """零均值单位方差, 常量向量归零"""
    sd = float(np.std(v))
    if sd == 0:
        return np.zeros_like(v)
    return (v - np.mean(v)) / sd


def combine_scores(q_r: np.ndarray, q_d: np.ndarray, znorm: bool = False) -> np.ndarray:
    """合并两模型分数; znorm时先在整个集合上各自z归一化"""
    q_r = np.asarray(q_r, dtype=np.float64)
    q_d = np.asarray(q_d, dtype=np.float64)
    if znorm:
        q_r, q_d = znormalize(q_r), znormalize(q_d)
    return (q_r + q_d) / 2.0


def quality_map(
    clip: RawClip, models: Models, cfg: RunConfig, seed: Optional[int] = None
) -> tuple[np.ndarray, Geometry]:
    """回归模型逐令牌质量重投影到源分辨率, 返回 (n_frames×H×W, 几何)"""
    seed = eval_seed(cfg) if seed is None else seed
    x = qcs_sample(clip, cfg.fragment_config(), seed)
    z = encode(x, _frozen(models.theta_r), cfg.encoder_config())
    token_map, _ = regress_head(z, _frozen(models.phi))
    t, h, w, _ = clip.shape
    return project_quality_map(token_map.data, x.geometry, (t, h, w), cfg.t_stride), x.geometry
