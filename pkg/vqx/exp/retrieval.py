"""预训练信号检查: 最近邻失真级别检索

每个场景的每个失真类别, 用两组独立几何的内容对齐片段分别作查询与库,
按统计质量距离找最近的库片段, 级别相同即为命中。
"""

from typing import Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel

from vqx.ad.tensor import Tensor
from vqx.clip.manifest import DatasetManifest, ClipCache, ClipRecord
from vqx.m.rand import derive_seed
from vqx.nn.encoder import encode
from vqx.nn.param import Params
from vqx.sample.fragment import content_aligned_pair
from vqx.stat.mvg import feature_distance
from vqx.train.cfg import RunConfig
from vqx.util.err import DataError

RETRIEVAL_KEY = 50


class RetrievalResult(BaseModel):
    """检索结果"""

    accuracy: float
    n_queries: int
    chance: float
    """随机猜测的期望命中率"""


def retrieval_groups(manifest: DatasetManifest) -> list[list[ClipRecord]]:
    """(场景, 类别)分组, 每组至少2个不同级别"""
    groups: dict[tuple[int, str], list[ClipRecord]] = {}
    for r in manifest.records:
        if r.kind is not None:
            groups.setdefault((r.scene_id, r.kind.value), []).append(r)
    return [sorted(g, key=lambda r: r.level) for _, g in sorted(groups.items()) if len(g) >= 2]


def retrieval_accuracy(
    theta: Params, manifest: DatasetManifest, cfg: RunConfig, seed: Optional[int] = None
) -> RetrievalResult:
    """最近邻级别检索准确率"""
    seed = derive_seed(cfg.seed, RETRIEVAL_KEY) if seed is None else seed
    groups = retrieval_groups(manifest)
    if not groups:
        raise DataError("没有可检索的失真分组")
    enc, frag = cfg.encoder_config(), cfg.fragment_config()
    t = {k: Tensor(v) for k, v in theta.items()}
    cache = ClipCache(manifest)

    hits, total, chance = 0, 0, 0.0
    for gi, recs in enumerate(groups):
        clips = [cache.get(r) for r in recs]
        gallery, queries = content_aligned_pair(clips, frag, derive_seed(seed, gi))
        zg = [encode(f, t, enc).data for f in gallery]
        zq = [encode(f, t, enc).data for f in queries]
        for i, q in enumerate(zq):
            d = [feature_distance(q, g, cfg.ridge).item() for g in zg]
            hits += int(recs[int(np.argmin(d))].level == recs[i].level)
            total += 1
        levels = [r.level for r in recs]
        chance += sum(levels.count(lv) for lv in levels) / len(levels)
    result = RetrievalResult(accuracy=hits / total, n_queries=total, chance=chance / total)
    logger.info(f"级别检索: {result.accuracy:.3f} (随机 {result.chance:.3f}, {total}次查询)")
    return result
