#!/usr/bin/env python3

"""vqx 命令行: 合成数据, 预训练, 半监督训练, 微调, 评估, 质量图, 梯度检查

退出码: 0 成功, 1 配置/数据错误, 2 数值中止, 3 校验失败
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Optional

from loguru import logger

from vqx.clip.codec import load_clip
from vqx.clip.manifest import DatasetManifest
from vqx.eval.infer import quality_map
from vqx.eval.report import EvalReport, evaluate, median_over_splits, save_report
from vqx.exp.data import synthesize_dataset, dataset_manifest, distorted_of, pristine_of
from vqx.exp.gradcheck import run_gradcheck, gradcheck_lines
from vqx.exp.protocol import eval_split, finetune_split, protocol_split
from vqx.stat.qmap import save_pgm, save_map_clip
from vqx.text.txt_json import save_json
from vqx.train.cfg import (
    ABLATIONS,
    PRESETS,
    RunConfig,
    apply_overrides,
    describe_keys,
    load_run_config,
    preset_config,
    save_run_config,
)
from vqx.train.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from vqx.train.pretrain import PretrainResult, pretrain_stvqrl
from vqx.train.sslvqa import SslResult, finetune, train_sslvqa, train_labels_only
from vqx.util.err import ConfigError, DataError, VerifyError, catch_show_err

CONFIG_NAME = "effective.cfg"


def resolve_config(opt: argparse.Namespace) -> RunConfig:
    """缺省 < 预设 < 文件 < --set < --ablate"""
    cfg = preset_config(opt.preset)
    if opt.config:
        r = load_run_config(opt.config, cfg)
        if r.is_err():
            raise ConfigError(r.unwrap_err())
        cfg = r.unwrap()
    kv = {}
    for s in opt.set or []:
        if "=" not in s:
            raise ConfigError(f"--set 需要 key=value: {s}")
        k, v = s.split("=", 1)
        kv[k.strip()] = v.strip()
    for a in opt.ablate or []:
        kv[a] = True
    cfg = apply_overrides(cfg, kv)
    cfg.check()
    return cfg


def write_config(cfg: RunConfig, folder: str) -> None:
    """有效配置写到输出目录"""
    r = save_run_config(cfg, Path(folder) / CONFIG_NAME)
    if r.is_err():
        raise DataError(r.unwrap_err())


def read_checkpoint(path: str) -> Checkpoint:
    r = load_checkpoint(path)
    if r.is_err():
        raise DataError(r.unwrap_err())
    return r.unwrap()


def write_checkpoint(ck: Checkpoint, path: Path) -> None:
    r = save_checkpoint(ck, path)
    if r.is_err():
        raise DataError(r.unwrap_err())
    logger.info(f"检查点: {path}")


def read_dataset(cfg: RunConfig) -> DatasetManifest:
    r = dataset_manifest(cfg.data_dir)
    if r.is_err():
        raise DataError(r.unwrap_err())
    return r.unwrap()


def cmd_synth(cfg: RunConfig, opt: argparse.Namespace) -> int:
    """合成场景, 失真版本, 原始语料与清单"""
    synthesize_dataset(cfg)
    write_config(cfg, cfg.data_dir)
    return 0


def cmd_pretrain(cfg: RunConfig, opt: argparse.Namespace) -> int:
    """统计对比预训练"""
    out = Path(cfg.out_dir)
    ck_file = out / "pretrain.ckpt"
    write_config(cfg, cfg.out_dir)
    resume = None
    if opt.resume:
        resume = PretrainResult.from_checkpoint(read_checkpoint(opt.resume))

    def on_epoch(r: PretrainResult) -> None:
        write_checkpoint(r.to_checkpoint(), ck_file)

    manifest = distorted_of(read_dataset(cfg))
    pretrain_stvqrl(
        manifest, cfg, resume=resume, log_file=str(out / "pretrain.log"), on_epoch=on_epoch
    )
    return 0


def _ssl_run(
    cfg: RunConfig,
    opt: argparse.Namespace,
    name: str,
    train: Callable[..., SslResult],
    with_unlabelled: bool,
) -> int:
    out = Path(cfg.out_dir)
    ck_file = out / f"{name}.ckpt"
    write_config(cfg, cfg.out_dir)
    manifest = read_dataset(cfg)
    lab, unl, _ = protocol_split(manifest, cfg, cfg.split_index)

    resume: Optional[SslResult] = None
    theta = None
    if opt.resume:
        resume = SslResult.from_checkpoint(read_checkpoint(opt.resume))
    elif opt.init:
        theta = PretrainResult.from_checkpoint(read_checkpoint(opt.init)).theta
    else:
        raise ConfigError("需要 --init 预训练检查点或 --resume")

    def on_epoch(r: SslResult) -> None:
        write_checkpoint(r.to_checkpoint(), ck_file)

    args = [lab, unl] if with_unlabelled else [lab]
    train(
        *args,
        pristine_of(manifest),
        theta,
        cfg,
        resume=resume,
        log_file=str(out / f"{name}.log"),
        on_epoch=on_epoch,
    )
    return 0


def cmd_train(cfg: RunConfig, opt: argparse.Namespace) -> int:
    """双模型半监督训练"""
    return _ssl_run(cfg, opt, "ssl", train_sslvqa, True)


def cmd_train_labels_only(cfg: RunConfig, opt: argparse.Namespace) -> int:
    """只用有标签数据训练"""
    return _ssl_run(cfg, opt, "labels_only", train_labels_only, False)


def cmd_finetune(cfg: RunConfig, opt: argparse.Namespace) -> int:
    """在小规模有标签子集上微调"""
    if not opt.checkpoint:
        raise ConfigError("需要 --checkpoint")
    write_config(cfg, cfg.out_dir)
    manifest = read_dataset(cfg)
    small, _ = finetune_split(manifest, cfg)
    r = finetune(read_checkpoint(opt.checkpoint[0]), small, pristine_of(manifest), cfg)
    write_checkpoint(r.to_checkpoint(), Path(cfg.out_dir) / "finetune.ckpt")
    return 0


def cmd_eval(cfg: RunConfig, opt: argparse.Namespace) -> int:
    """每个检查点在其划分的测试集上评估; 多个时另写中位数摘要"""
    if not opt.checkpoint:
        raise ConfigError("需要 --checkpoint")
    out = Path(cfg.out_dir)
    write_config(cfg, cfg.out_dir)
    manifest = read_dataset(cfg)
    reports: list[EvalReport] = []
    for i, path in enumerate(opt.checkpoint):
        ck = read_checkpoint(path)
        ck_cfg = ck.config.model_copy(
            update={"n_fragments": cfg.n_fragments, "znorm": cfg.znorm}
        )
        test = eval_split(manifest, ck_cfg)
        models = SslResult.from_checkpoint(ck).models
        split = "finetune" if ck_cfg.finetuned else f"split{ck_cfg.split_index}"
        report = evaluate(test, models, ck_cfg, split=split)
        r = save_report(report, out / f"report_{i}.txt")
        if r.is_err():
            raise DataError(r.unwrap_err())
        reports.append(report)
    if len(reports) > 1:
        r = save_json(median_over_splits(reports), out / "median.json")
        if r.is_err():
            raise DataError(r.unwrap_err())
    if any(r.has_nan() for r in reports):
        raise VerifyError("评估指标含NaN")
    return 0


def cmd_quality_map(cfg: RunConfig, opt: argparse.Namespace) -> int:
    """回归模型质量图, 每个采样帧一个PGM文件"""
    if not opt.checkpoint or not opt.clip:
        raise ConfigError("需要 --checkpoint 与 --clip")
    rc = load_clip(opt.clip)
    if rc.is_err():
        raise DataError(rc.unwrap_err())
    ck = read_checkpoint(opt.checkpoint[0])
    maps, _ = quality_map(rc.unwrap(), SslResult.from_checkpoint(ck).models, ck.config)
    out = Path(cfg.out_dir)
    for t, m in enumerate(maps):
        r = save_pgm(m, out / f"qmap_{t:03d}.pgm")
        if r.is_err():
            raise DataError(r.unwrap_err())
    r = save_map_clip(maps, out / "qmap.vqc")
    if r.is_err():
        raise DataError(r.unwrap_err())
    logger.info(f"质量图: {len(maps)}帧 -> {out}")
    return 0


def cmd_gradcheck(cfg: RunConfig, opt: argparse.Namespace) -> int:
    """梯度检查套件"""
    rows = run_gradcheck()
    for s in gradcheck_lines(rows):
        print(s)
    failed = [r.name for r in rows if not r.passed]
    if failed:
        raise VerifyError(f"梯度检查失败: {', '.join(failed)}")
    return 0


COMMANDS: dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "synth": cmd_synth,
    "pretrain": cmd_pretrain,
    "train": cmd_train,
    "train-labels-only": cmd_train_labels_only,
    "finetune": cmd_finetune,
    "eval": cmd_eval,
    "quality-map": cmd_quality_map,
    "gradcheck": cmd_gradcheck,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        "vqx",
        description="视频质量表示学习与双模型半监督质量评估",
        epilog=describe_keys(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=list(COMMANDS), help="子命令")
    parser.add_argument("-p", "--preset", choices=list(PRESETS), default="standard", help="预设")
    parser.add_argument("-c", "--config", type=str, help="配置文件(key = value)")
    parser.add_argument("-s", "--set", action="append", help="覆盖配置项 key=value")
    parser.add_argument("-a", "--ablate", action="append", choices=ABLATIONS, help="消融开关")
    parser.add_argument("--init", type=str, help="预训练检查点")
    parser.add_argument("--resume", type=str, help="继续训练的检查点")
    parser.add_argument("--checkpoint", action="append", help="模型检查点, eval可多个")
    parser.add_argument("--clip", type=str, help="质量图输入片段")
    parser.add_argument("-v", "--verbose", action="store_true", help="显示详细信息")
    return parser


def run(argv: Optional[list[str]] = None) -> int:
    """解析参数并执行, 返回退出码"""
    opt = make_parser().parse_args(argv)
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if opt.verbose else "INFO")

    def work() -> int:
        cfg = resolve_config(opt)
        return COMMANDS[opt.command](cfg, opt)

    return catch_show_err(work, opt.verbose)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
