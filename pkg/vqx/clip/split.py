from vqx.clip.manifest import DatasetManifest, ClipRecord, SplitTag
from vqx.data.split import random_split_array
from vqx.m.rand import make_rng
from vqx.util.err import DataError

SslSplit = tuple[DatasetManifest, DatasetManifest, DatasetManifest]
"""(有标签, 无标签, 测试)"""


def eligible_records(manifest: DatasetManifest) -> list[ClipRecord]:
    """可做标签集的记录: 有标签且非原始集"""
    return [
        r
        for r in manifest.records
        if r.split_tag != SplitTag.PRISTINE and r.eval_label() is not None
    ]


def _retag(rec: ClipRecord, tag: SplitTag, keep_label: bool) -> ClipRecord:
    y = rec.eval_label()
    if keep_label:
        return rec.model_copy(update={"split_tag": tag, "label": y, "hidden_label": None})
    return rec.model_copy(update={"split_tag": tag, "label": None, "hidden_label": y})


def build_ssl_split(
    manifest: DatasetManifest, n_labelled: int, n_unlabelled: int, seed: int
) -> SslSplit:
    """划分有标签/无标签/测试三个互斥集合, 无标签与测试集标签移入隐藏字段"""
    if n_labelled < 1:
        raise DataError("有标签集为空, 监督损失无定义")
    if n_unlabelled < 0:
        raise DataError(f"无标签数量无效: {n_unlabelled}")
    pool = eligible_records(manifest)
    if n_labelled + n_unlabelled > len(pool):
        raise DataError(f"记录不足: 需要{n_labelled + n_unlabelled}, 可用{len(pool)}")

    lab, unl, test = random_split_array(make_rng(seed), pool, [n_labelled, n_unlabelled])
    return (
        manifest.derive([_retag(r, SplitTag.LABELLED, True) for r in lab]),
        manifest.derive([_retag(r, SplitTag.UNLABELLED, False) for r in unl]),
        manifest.derive([_retag(r, SplitTag.TEST, False) for r in test]),
    )


def fraction_split(
    manifest: DatasetManifest, fractions: list[float], seed: int
) -> list[DatasetManifest]:
    """按比例划分互斥子集(如微调协议的20%/20%), 剩余部分为最后一份"""
    assert all(f >= 0 for f in fractions) and sum(fractions) <= 1.0
    pool = eligible_records(manifest)
    sizes = [int(round(f * len(pool))) for f in fractions]
    while sum(sizes) > len(pool):
        sizes[sizes.index(max(sizes))] -= 1
    parts = random_split_array(make_rng(seed), pool, sizes)
    return [manifest.derive(p) for p in parts]
