"""实验协议: 多次随机划分取中位数, 消融表, 标注预算扫描"""

from enum import Enum
from typing import Optional, Sequence

from loguru import logger
from pydantic import BaseModel

from vqx.clip.manifest import DatasetManifest
from vqx.clip.split import SslSplit, build_ssl_split, eligible_records, fraction_split
from vqx.eval.report import EvalReport, SplitSummary, evaluate, median_over_splits
from vqx.exp.data import pristine_of, distorted_of
from vqx.m.rand import derive_seed
from vqx.nn.param import Params
from vqx.train.cfg import RunConfig
from vqx.train.sslvqa import SslResult, train_sslvqa, train_labels_only

SPLIT_KEY = 40
"""划分种子键"""
FINETUNE_KEY = 60
"""微调划分种子键"""


class Variant(str, Enum):
    """训练变体"""

    FULL = "full"
    LABELS_ONLY = "labels_only"
    """只用有标签数据"""
    NO_CONSISTENCY = "no_consistency"
    NO_KNOWLEDGE = "no_knowledge"


ABLATION_VARIANTS = [
    Variant.FULL,
    Variant.NO_CONSISTENCY,
    Variant.NO_KNOWLEDGE,
    Variant.LABELS_ONLY,
]


class ProtocolResult(BaseModel):
    """一个变体的全部划分结果"""

    variant: Variant
    n_labelled: int
    n_unlabelled: int
    reports: list[EvalReport]
    summary: SplitSummary


class BudgetPoint(BaseModel):
    """预算扫描的一个点"""

    n_labelled: int
    n_unlabelled: int
    srocc: float
    """各划分中位数"""


def split_sizes(n_eligible: int, cfg: RunConfig) -> tuple[int, int]:
    """按比例计算有标签/无标签数量, 有标签至少2个"""
    n_l = max(2, int(round(cfg.labelled_frac * n_eligible)))
    n_u = min(int(round(cfg.unlabelled_frac * n_eligible)), n_eligible - n_l)
    return n_l, max(0, n_u)


def protocol_split(
    manifest: DatasetManifest,
    cfg: RunConfig,
    index: int,
    n_labelled: Optional[int] = None,
    n_unlabelled: Optional[int] = None,
) -> SslSplit:
    """第index次随机划分, 只依赖(seed, index)"""
    data = distorted_of(manifest)
    d_l, d_u = split_sizes(len(eligible_records(data)), cfg)
    n_l = d_l if n_labelled is None else n_labelled
    n_u = d_u if n_unlabelled is None else n_unlabelled
    return build_ssl_split(data, n_l, n_u, derive_seed(cfg.seed, SPLIT_KEY, index))


def finetune_split(
    manifest: DatasetManifest, cfg: RunConfig
) -> tuple[DatasetManifest, DatasetManifest]:
    """微调协议: 互斥的微调子集与测试子集, 各占finetune_frac"""
    frac = cfg.finetune_frac
    small, test, _ = fraction_split(
        distorted_of(manifest), [frac, frac], derive_seed(cfg.seed, FINETUNE_KEY)
    )
    return small, test


def eval_split(manifest: DatasetManifest, cfg: RunConfig) -> DatasetManifest:
    """检查点配置对应的测试集: 微调结果用微调测试子集, 否则用第split_index次划分"""
    if cfg.finetuned:
        return finetune_split(manifest, cfg)[1]
    return protocol_split(manifest, cfg, cfg.split_index)[2]


def variant_config(cfg: RunConfig, variant: Variant) -> RunConfig:
    """变体对应的消融开关"""
    return cfg.model_copy(
        update={
            "no_consistency": cfg.no_consistency or variant == Variant.NO_CONSISTENCY,
            "no_knowledge": cfg.no_knowledge or variant == Variant.NO_KNOWLEDGE,
        }
    )


def train_variant(
    variant: Variant,
    labelled: DatasetManifest,
    unlabelled: DatasetManifest,
    pristine: DatasetManifest,
    theta: Params,
    cfg: RunConfig,
) -> SslResult:
    """训练一个变体"""
    vcfg = variant_config(cfg, variant)
    if variant == Variant.LABELS_ONLY:
        return train_labels_only(labelled, pristine, theta, vcfg)
    return train_sslvqa(labelled, unlabelled, pristine, theta, vcfg)


def run_protocol(
    manifest: DatasetManifest,
    theta: Params,
    cfg: RunConfig,
    variant: Variant = Variant.FULL,
    n_labelled: Optional[int] = None,
    n_unlabelled: Optional[int] = None,
) -> ProtocolResult:
    """n_splits次随机划分, 每次训练并在测试集评估, 取中位数

    划分只依赖(seed, 划分序号), 不同变体共享同一组划分。
    """
    pristine = pristine_of(manifest)
    reports = []
    n_l, n_u = 0, 0
    for s in range(cfg.n_splits):
        lab, unl, test = protocol_split(manifest, cfg, s, n_labelled, n_unlabelled)
        n_l, n_u = len(lab), len(unl)
        result = train_variant(variant, lab, unl, pristine, theta, cfg)
        reports.append(evaluate(test, result.models, cfg, split=f"/{variant.value}/split{s}"))
    summary = median_over_splits(reports)
    logger.info(f"{variant.value}: 中位SROCC={summary.srocc:.4f} ({n_l}标签/{n_u}无标签)")
    return ProtocolResult(
        variant=variant, n_labelled=n_l, n_unlabelled=n_u, reports=reports, summary=summary
    )


def ablation_table(
    manifest: DatasetManifest,
    theta: Params,
    cfg: RunConfig,
    variants: Sequence[Variant] = ABLATION_VARIANTS,
) -> dict[Variant, ProtocolResult]:
    """同一协议下的各消融变体"""
    return {v: run_protocol(manifest, theta, cfg, v) for v in variants}


def ablation_lines(table: dict[Variant, ProtocolResult]) -> list[str]:
    """消融表文本"""
    lines = ["variant\tsrocc\tplcc\tsplits"]
    for v, r in table.items():
        s = r.summary
        splits = ",".join(f"{x:.4f}" for x in s.sroccs)
        lines.append(f"{v.value}\t{s.srocc:.4f}\t{s.plcc:.4f}\t{splits}")
    return lines


def budget_sweep(
    manifest: DatasetManifest,
    theta: Params,
    cfg: RunConfig,
    n_labelled_list: Sequence[int],
    n_unlabelled_list: Sequence[int],
) -> list[BudgetPoint]:
    """固定无标签数改变有标签数, 再固定有标签数改变无标签数"""
    d_l, d_u = split_sizes(len(eligible_records(distorted_of(manifest))), cfg)
    budgets = [(n, d_u) for n in n_labelled_list] + [(d_l, n) for n in n_unlabelled_list]
    points = []
    for n_l, n_u in budgets:
        r = run_protocol(manifest, theta, cfg, Variant.FULL, n_l, n_u)
        points.append(BudgetPoint(n_labelled=n_l, n_unlabelled=n_u, srocc=r.summary.srocc))
    return points
