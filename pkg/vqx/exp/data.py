"""合成数据集: 程序化场景 + 失真版本 + 原始语料"""

from pathlib import Path
from typing import Optional

from rustshed import Result

from vqx.clip.manifest import (
    DatasetManifest,
    SplitTag,
    build_pretrain_set,
    load_manifest,
    save_manifest,
)
from vqx.clip.scene import make_scene
from vqx.m.rand import derive_seed
from vqx.sys.fs import StrPath
from vqx.train.cfg import RunConfig
from vqx.util.err import DataError

MANIFEST_NAME = "manifest.txt"
SCENE_KEY = 30
"""场景种子键"""


def synthesize_dataset(cfg: RunConfig, out_dir: Optional[StrPath] = None) -> DatasetManifest:
    """生成 n_scenes 个场景, 每个场景一个原始版本加全部失真规格, 写出清单"""
    root = Path(cfg.data_dir if out_dir is None else out_dir)
    scenes = [
        make_scene(
            derive_seed(cfg.seed, SCENE_KEY, i),
            cfg.scene_frames,
            cfg.scene_height,
            cfg.scene_width,
            cfg.frame_rate,
        )
        for i in range(cfg.n_scenes)
    ]
    manifest = build_pretrain_set(
        scenes,
        cfg.distortion_specs(),
        cfg.seed,
        root,
        label_noise=cfg.label_noise,
        with_pristine=True,
    )
    r = save_manifest(manifest, root / MANIFEST_NAME)
    if r.is_err():
        raise DataError(r.unwrap_err())
    return manifest


def dataset_manifest(data_dir: StrPath) -> Result[DatasetManifest, str]:
    """加载数据目录下的清单"""
    return load_manifest(Path(data_dir) / MANIFEST_NAME)


def pristine_of(manifest: DatasetManifest) -> DatasetManifest:
    return manifest.select(SplitTag.PRISTINE)


def distorted_of(manifest: DatasetManifest) -> DatasetManifest:
    """除原始语料外的全部记录"""
    return manifest.derive([r for r in manifest.records if r.split_tag != SplitTag.PRISTINE])
