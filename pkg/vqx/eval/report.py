"""评估报告

报告文件为逐行文本:
    # clip_path<TAB>label<TAB>q_r<TAB>q_d<TAB>q
    每个测试片段一行
    # summary {JSON}
"""

import itertools
import math
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel
from rustshed import Result

from vqx.clip.manifest import DatasetManifest, labels_of
from vqx.eval.infer import Prediction, predict_manifest, combine_scores
from vqx.eval.metric import pearson, srocc
from vqx.eval.wilcoxon import wilcoxon_rank_sum, Alternative
from vqx.sys.fs import StrPath
from vqx.text.io import save_lines
from vqx.text.txt_json import to_json
from vqx.train.cfg import RunConfig
from vqx.train.sslvqa import Models
from vqx.util.algo import lower_median
from vqx.util.err import DataError

REPORT_HEADER = "# clip_path\tlabel\tq_r\tq_d\tq"
SUMMARY_MARK = "# summary "


class ClipPrediction(BaseModel):
    """报告行"""

    clip_path: str
    label: float
    q_r: float
    q_d: float
    q: float


class EvalSummary(BaseModel):
    """报告摘要"""

    dataset: str = "synthetic"
    split: str = ""
    """划分描述"""
    seed: int = 0
    n: int = 0
    srocc: float = float("nan")
    plcc: float = float("nan")
    srocc_r: float = float("nan")
    """仅回归模型"""
    srocc_d: float = float("nan")
    """仅距离模型"""
    znorm: bool = False


class EvalReport(BaseModel):
    """评估报告"""

    summary: EvalSummary
    clips: list[ClipPrediction] = []

    def has_nan(self) -> bool:
        s = self.summary
        return any(math.isnan(v) for v in [s.srocc, s.plcc, s.srocc_r, s.srocc_d])


def report_from_predictions(
    manifest: DatasetManifest,
    preds: Sequence[Prediction],
    znorm: bool = False,
    dataset: str = "synthetic",
    split: str = "",
    seed: int = 0,
) -> EvalReport:
    """由预测与隐藏标签计算指标"""
    if len(manifest) < 2:
        raise DataError(f"测试集不足2个片段: {len(manifest)}")
    if len(preds) != len(manifest):
        raise DataError(f"预测数{len(preds)}与测试集{len(manifest)}不一致")
    labels = labels_of(manifest)
    q_r = np.array([p.q_r for p in preds])
    q_d = np.array([p.q_d for p in preds])
    q = combine_scores(q_r, q_d, znorm)
    summary = EvalSummary(
        dataset=dataset,
        split=split,
        seed=seed,
        n=len(preds),
        srocc=srocc(q, labels),
        plcc=pearson(q, labels),
        srocc_r=srocc(q_r, labels),
        srocc_d=srocc(q_d, labels),
        znorm=znorm,
    )
    clips = [
        ClipPrediction(clip_path=r.clip_path, label=float(y), q_r=p.q_r, q_d=p.q_d, q=float(v))
        for r, y, p, v in zip(manifest.records, labels, preds, q)
    ]
    report = EvalReport(summary=summary, clips=clips)
    if report.has_nan():
        logger.warning(f"评估指标含NaN: {to_json(summary, pretty=False)}")
    return report


def evaluate(
    test: DatasetManifest,
    models: Models,
    cfg: RunConfig,
    seed: Optional[int] = None,
    dataset: str = "synthetic",
    split: str = "",
) -> EvalReport:
    """测试集上预测并计算SROCC/PLCC"""
    preds = predict_manifest(test, models, cfg, seed)
    report = report_from_predictions(
        test, preds, cfg.znorm, dataset=dataset, split=split, seed=cfg.seed
    )
    s = report.summary
    logger.info(f"评估 {dataset}{split}: n={s.n} SROCC={s.srocc:.4f} PLCC={s.plcc:.4f}")
    return report


def report_lines(report: EvalReport) -> list[str]:
    lines = [REPORT_HEADER]
    lines += [
        f"{c.clip_path}\t{c.label!r}\t{c.q_r!r}\t{c.q_d!r}\t{c.q!r}" for c in report.clips
    ]
    lines.append(SUMMARY_MARK + to_json(report.summary, pretty=False))
    return lines


def save_report(report: EvalReport, file: StrPath) -> Result[bool, str]:
    """保存报告"""
    return save_lines(report_lines(report), file)


class SplitSummary(BaseModel):
    """多次随机划分的中位数"""

    n_splits: int
    srocc: float
    plcc: float
    srocc_r: float
    srocc_d: float
    sroccs: list[float]
    """各划分SROCC"""


def median_over_splits(reports: Sequence[EvalReport]) -> SplitSummary:
    """逐指标取中位数, 偶数个时取较小的中间值"""
    if not reports:
        raise DataError("没有评估报告")
    ss = [r.summary for r in reports]
    return SplitSummary(
        n_splits=len(ss),
        srocc=lower_median([s.srocc for s in ss]),
        plcc=lower_median([s.plcc for s in ss]),
        srocc_r=lower_median([s.srocc_r for s in ss]),
        srocc_d=lower_median([s.srocc_d for s in ss]),
        sroccs=[s.srocc for s in ss],
    )


def significance_code(row: Sequence[float], col: Sequence[float], alpha: float = 0.05) -> str:
    """单侧秩和检验: 1 行方法更优, 0 更差, - 无显著差异"""
    if wilcoxon_rank_sum(row, col, Alternative.GREATER).p_value <= alpha:
        return "1"
    if wilcoxon_rank_sum(row, col, Alternative.LESS).p_value <= alpha:
        return "0"
    return "-"


def significance_codes(
    srocc_by_method: dict[str, dict[str, list[float]]], alpha: float = 0.05
) -> dict[tuple[str, str], str]:
    """方法两两比较的码字, 字符按数据集名排序

    srocc_by_method: 方法 => 数据集 => 各划分SROCC
    """
    out = {}
    for a, b in itertools.permutations(srocc_by_method, 2):
        ra, rb = srocc_by_method[a], srocc_by_method[b]
        datasets = sorted(set(ra) & set(rb))
        out[(a, b)] = "".join(significance_code(ra[d], rb[d], alpha) for d in datasets)
    return out


def significance_lines(codes: dict[tuple[str, str], str]) -> list[str]:
    """码字表: 行方法 列方法 码字"""
    return [f"{a}\t{b}\t{c}" for (a, b), c in codes.items()]
