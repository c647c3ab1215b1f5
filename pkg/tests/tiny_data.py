"""测试用小规模配置与合成数据集"""

import tempfile
from functools import lru_cache
from typing import Any

from vqx.clip.manifest import DatasetManifest
from vqx.exp.data import synthesize_dataset
from vqx.train.cfg import RunConfig, apply_overrides, preset_config

TINY: dict[str, Any] = {
    "n_scenes": 4,
    "scene_frames": 4,
    "scene_height": 16,
    "scene_width": 16,
    "kinds": "gaussian_blur,gaussian_noise",
    "levels": "1,2,3,4",
    "grid_h": 2,
    "grid_w": 2,
    "patch": 4,
    "n_frames": 4,
    "t_stride": 2,
    "channels": 4,
    "head_hidden": 4,
    "lr": 1e-3,
    "epochs": 1,
    "finetune_epochs": 1,
    "batch_labelled": 4,
    "batch_unlabelled": 4,
    "n_splits": 2,
    "n_fragments": 2,
}
"""4个场景 x 8个失真规格, 片段16x16x4帧"""


def tiny_config(**kv: Any) -> RunConfig:
    """小规模配置, 数据与输出目录为临时目录"""
    base = {**TINY, "data_dir": tempfile.mkdtemp(), "out_dir": tempfile.mkdtemp()}
    cfg = apply_overrides(preset_config("desk", seed=1), {**base, **kv})
    cfg.check()
    return cfg


@lru_cache(maxsize=None)
def tiny_dataset() -> tuple[RunConfig, DatasetManifest]:
    """合成一次, 各测试共享"""
    cfg = tiny_config()
    return cfg, synthesize_dataset(cfg)
