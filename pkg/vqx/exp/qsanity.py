"""质量图定位检查: 一半区域失真的片段, 失真半区的平均图质量应更低"""

import numpy as np
from pydantic import BaseModel

from vqx.clip.codec import RawClip
from vqx.clip.distort import DistortionSpec, distort_region
from vqx.clip.manifest import DatasetManifest, labels_of
from vqx.eval.infer import predict_manifest, quality_map
from vqx.eval.metric import srocc
from vqx.train.cfg import RunConfig
from vqx.train.sslvqa import Models


class HalfContrast(BaseModel):
    """两个半区的平均图质量"""

    distorted: float
    clean: float

    @property
    def lower_on_distorted(self) -> bool:
        return self.distorted < self.clean


def half_mask(h: int, w: int, left: bool = True) -> np.ndarray:
    """左(或右)半区为True"""
    mask = np.zeros((h, w), dtype=bool)
    if left:
        mask[:, : w // 2] = True
    else:
        mask[:, w // 2 :] = True
    return mask


def orient_map(models: Models, labelled: DatasetManifest, cfg: RunConfig) -> float:
    """回归模型相对标签的方向: 与标签正相关为+1, 否则-1"""
    preds = predict_manifest(labelled, models, cfg)
    r = srocc([p.q_r for p in preds], labels_of(labelled))
    return -1.0 if r < 0 else 1.0


def half_contrast(
    clip: RawClip,
    spec: DistortionSpec,
    models: Models,
    cfg: RunConfig,
    seed: int,
    sign: float = 1.0,
    left: bool = True,
) -> HalfContrast:
    """只在一半区域施加失真, 比较两半区定向后的平均图质量"""
    _, h, w, _ = clip.shape
    mask = half_mask(h, w, left)
    damaged = distort_region(clip, spec, seed, mask)
    maps, _ = quality_map(damaged, models, cfg, seed)
    maps = maps * sign
    return HalfContrast(distorted=float(maps[:, mask].mean()), clean=float(maps[:, ~mask].mean()))
