"""第一阶段: 统计对比预训练

每步取一个场景(或 pretrain_scenes 个场景)的K个失真版本, 两视图各自内容对齐采样,
编码后最小化双向统计对比损失。
"""

from typing import Callable, Optional

from loguru import logger
from pydantic import BaseModel, ConfigDict

from vqx.ad.tensor import Tensor
from vqx.clip.manifest import DatasetManifest, ClipRecord, ClipCache
from vqx.data.split import group
from vqx.loss.contrastive import contrastive_pretrain_loss, cosine_contrastive_loss
from vqx.m.rand import make_rng, derive_seed, random_choices
from vqx.nn.encoder import encode
from vqx.nn.init import init_encoder
from vqx.nn.param import Params, copy_params
from vqx.sample.fragment import content_aligned_pair
from vqx.train.adamw import OptimState, init_state
from vqx.train.cfg import RunConfig
from vqx.train.checkpoint import Checkpoint
from vqx.train.log import StepLog, StepWriter, EpochMeters
from vqx.train.step import RejectCounter, optimize_step
from vqx.ui.progress_meter import ProgressMeter
from vqx.util.err import DataError

STAGE = "pretrain"


class PretrainResult(BaseModel):
    """预训练结果"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    theta: Params
    optim: OptimState
    history: list[float]
    """每轮平均对比损失"""
    epoch: int
    """已完成轮数"""
    config: RunConfig

    def to_checkpoint(self) -> Checkpoint:
        return Checkpoint(
            stage=STAGE,
            epoch=self.epoch,
            seed=self.config.seed,
            config=self.config,
            params={f"theta/{k}": v for k, v in self.theta.items()},
            optim=self.optim.model_copy(
                update={
                    "m": {f"theta/{k}": v for k, v in self.optim.m.items()},
                    "v": {f"theta/{k}": v for k, v in self.optim.v.items()},
                }
            ),
            history=self.history,
        )

    @staticmethod
    def from_checkpoint(ck: Checkpoint) -> "PretrainResult":
        def strip(d: dict) -> dict:
            return {k[len("theta/") :]: v for k, v in d.items() if k.startswith("theta/")}

        if ck.stage != STAGE:
            raise DataError(f"检查点阶段不符: {ck.stage}")
        return PretrainResult(
            theta=strip(ck.params),
            optim=OptimState(m=strip(ck.optim.m), v=strip(ck.optim.v), step=ck.optim.step),
            history=list(ck.history),
            epoch=ck.epoch,
            config=ck.config,
        )


def scene_versions(manifest: DatasetManifest) -> dict[int, list[ClipRecord]]:
    """每个场景的失真版本(含0级), 不含原始集记录; 少于2个的场景被忽略"""
    groups = {
        sid: [r for r in recs if r.kind is not None]
        for sid, recs in manifest.by_scene().items()
    }
    groups = {sid: rs for sid, rs in groups.items() if len(rs) >= 2}
    if not groups:
        raise DataError("清单中没有至少含2个失真版本的场景")
    return groups


def pretrain_batches(
    groups: dict[int, list[ClipRecord]], cfg: RunConfig, epoch: int
) -> list[list[ClipRecord]]:
    """一轮的批: 场景顺序随机, 每个场景随机取K个版本"""
    order = [int(s) for s in make_rng(cfg.seed, epoch, 0).permutation(sorted(groups))]
    batches = []
    for b, sids in enumerate(group(order, cfg.pretrain_scenes)):
        recs: list[ClipRecord] = []
        for sid in sids:
            recs += random_choices(make_rng(cfg.seed, epoch, b, sid), groups[sid], cfg.pretrain_k)
        batches.append(recs)
    return batches


def pretrain_stvqrl(
    manifest: DatasetManifest,
    cfg: RunConfig,
    resume: Optional[PretrainResult] = None,
    log_file: Optional[str] = None,
    on_epoch: Optional[Callable[[PretrainResult], None]] = None,
) -> PretrainResult:
    """统计对比预训练, 返回θ与损失曲线"""
    cfg.check()
    groups = scene_versions(manifest)
    cache = ClipCache(manifest)
    enc = cfg.encoder_config()
    frag = cfg.fragment_config()
    opt = cfg.adamw_config()

    if resume is None:
        theta = init_encoder(enc, cfg.seed)
        state = init_state(theta)
        history: list[float] = []
        start = 0
    else:
        theta, state = copy_params(resume.theta), resume.optim
        history, start = list(resume.history), resume.epoch

    writer = StepWriter(log_file, append=resume is not None)
    counter = RejectCounter(cfg.max_rejected)
    result = PretrainResult(theta=theta, optim=state, history=history, epoch=start, config=cfg)

    for epoch in range(start, cfg.epochs):
        meters = EpochMeters()
        batches = pretrain_batches(groups, cfg, epoch)
        progress = ProgressMeter(len(batches), meters.all(), prefix=f"Pretrain[{epoch}]")
        for step, recs in enumerate(batches):
            clips = [cache.get(r) for r in recs]
            views1, views2 = content_aligned_pair(
                clips, frag, derive_seed(cfg.seed, epoch, step, 2)
            )

            def loss_fn(t: dict[str, Tensor]) -> Tensor:
                z1 = [encode(f, t, enc) for f in views1]
                z2 = [encode(f, t, enc) for f in views2]
                if cfg.cosine_contrastive:
                    return cosine_contrastive_loss(z1, z2)
                return contrastive_pretrain_loss(z1, z2, cfg.tau, cfg.ridge)

            theta, state, loss = optimize_step(theta, state, loss_fn, opt, counter)
            log = StepLog(epoch=epoch, step=step, loss=float("nan"), rejected=loss is None)
            if loss is not None:
                log.loss = log.loss_c = loss.item()
            meters.update(log)
            writer.write(log)
            progress.display(step + 1)

        history.append(meters.loss.mean())
        logger.info(f"预训练 epoch {epoch + 1}/{cfg.epochs}: {meters.summary()}")
        result = PretrainResult(
            theta=theta, optim=state, history=list(history), epoch=epoch + 1, config=cfg
        )
        if on_epoch is not None:
            on_epoch(result)
    return result
