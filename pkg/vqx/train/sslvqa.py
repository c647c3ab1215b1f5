"""第二阶段: 双模型半监督质量学习

回归模型: θ′ 编码 + φ 回归头 => Q_R
距离模型: θ″ 编码 + 原始语料MVG => Q_D
每轮开始用当前θ″刷新原始语料统计, 轮内作常量。
"""

from typing import Callable, Optional, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict

from vqx.ad.tensor import Tensor, stack, index
from vqx.clip.codec import RawClip
from vqx.clip.manifest import DatasetManifest, ClipCache
from vqx.data.split import group, cycle_take
from vqx.loss.ssl import (
    supervised_loss,
    intra_consistency_loss,
    stability_errors,
    knowledge_transfer_loss,
    total_ssl_loss,
    transfer_mask,
)
from vqx.m.rand import make_rng, derive_seed
from vqx.nn.encoder import encode, EncoderConfig
from vqx.nn.head import regress_head
from vqx.nn.init import init_head
from vqx.nn.param import Params, TParams, prefixed, unprefixed, copy_params
from vqx.sample.fragment import qcs_sample, qcs_pair, Fragment
from vqx.stat.mvg import PristineModel, fit_pristine_corpus, q_distance
from vqx.train.adamw import OptimState, init_state
from vqx.train.cfg import RunConfig
from vqx.train.checkpoint import Checkpoint
from vqx.train.log import StepLog, StepWriter, EpochMeters
from vqx.train.step import RejectCounter, optimize_step
from vqx.ui.progress_meter import ProgressMeter
from vqx.util.err import DataError

STAGE = "ssl"
PRISTINE_KEY = 7
"""原始语料采样种子键"""


class Models(BaseModel):
    """训练好的双模型"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    theta_r: Params
    """θ′"""
    theta_d: Params
    """θ″"""
    phi: Params
    """φ"""
    pristine: Optional[PristineModel] = None

    def flat(self) -> Params:
        """扁平参数: r/, d/, h/"""
        return {
            **prefixed(self.theta_r, "r"),
            **prefixed(self.theta_d, "d"),
            **prefixed(self.phi, "h"),
        }

    @staticmethod
    def from_flat(p: Params, pristine: Optional[PristineModel] = None) -> "Models":
        return Models(
            theta_r=unprefixed(p, "r"),
            theta_d=unprefixed(p, "d"),
            phi=unprefixed(p, "h"),
            pristine=pristine,
        )


class SslResult(BaseModel):
    """半监督训练结果"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    models: Models
    optim: OptimState
    history: list[float]
    epoch: int
    config: RunConfig
    mask_fraction: list[float] = []
    """每轮m=1的步数比例"""

    def to_checkpoint(self) -> Checkpoint:
        return Checkpoint(
            stage=STAGE,
            epoch=self.epoch,
            seed=self.config.seed,
            config=self.config,
            params=self.models.flat(),
            optim=self.optim,
            pristine=self.models.pristine,
            history=self.history,
            mask_fraction=self.mask_fraction,
        )

    @staticmethod
    def from_checkpoint(ck: Checkpoint) -> "SslResult":
        if ck.stage != STAGE:
            raise DataError(f"检查点阶段不符: {ck.stage}")
        return SslResult(
            models=Models.from_flat(ck.params, ck.pristine),
            optim=ck.optim,
            history=list(ck.history),
            epoch=ck.epoch,
            config=ck.config,
            mask_fraction=list(ck.mask_fraction),
        )


def initial_models(theta_init: Params, cfg: RunConfig) -> Models:
    """θ′, θ″ 均由预训练θ初始化"""
    return Models(
        theta_r=copy_params(theta_init),
        theta_d=copy_params(theta_init),
        phi=init_head(cfg.head_config(), cfg.seed),
    )


def refresh_pristine(
    theta_d: Params,
    pristine: DatasetManifest,
    cache: ClipCache,
    cfg: RunConfig,
    epoch: int,
) -> PristineModel:
    """用当前θ″拟合原始语料统计"""
    if len(pristine) == 0:
        raise DataError("原始语料清单为空")
    enc = cfg.encoder_config()
    frag = cfg.fragment_config()
    theta = {k: Tensor(v) for k, v in theta_d.items()}
    zs = []
    for i, rec in enumerate(pristine.records):
        f = qcs_sample(cache.get(rec), frag, derive_seed(cfg.seed, epoch, PRISTINE_KEY, i))
        zs.append(encode(f, theta, enc).data)
    return fit_pristine_corpus(zs, cfg.ridge)


def labelled_batches(n: int, cfg: RunConfig, epoch: int) -> list[list[int]]:
    """一轮遍历有标签集, 末批不足2个时并入前一批"""
    order = [int(i) for i in make_rng(cfg.seed, epoch, 10).permutation(n)]
    batches = group(order, cfg.batch_labelled)
    if len(batches) > 1 and len(batches[-1]) < 2:
        batches[-2] += batches.pop()
    return batches


def unlabelled_batch(n: int, cfg: RunConfig, epoch: int, step: int) -> list[int]:
    """无标签集独立循环"""
    if n == 0 or cfg.batch_unlabelled == 0:
        return []
    order = [int(i) for i in make_rng(cfg.seed, epoch, 11).permutation(n)]
    return cycle_take(order, step * cfg.batch_unlabelled, min(cfg.batch_unlabelled, n))


def predict_views(
    frags: list[Fragment],
    t: TParams,
    enc: EncoderConfig,
    pristine: PristineModel,
    cfg: RunConfig,
) -> tuple[Tensor, Tensor]:
    """一组片段上两模型的预测向量 (Q_R, Q_D)"""
    theta_r, theta_d, phi = unprefixed(t, "r"), unprefixed(t, "d"), unprefixed(t, "h")
    qr = [regress_head(encode(f, theta_r, enc), phi)[1] for f in frags]
    qd = [q_distance(encode(f, theta_d, enc), pristine, cfg.tau, cfg.ridge) for f in frags]
    return stack(qr), stack(qd)


class StepParts(BaseModel):
    """一步的损失分量"""

    loss_s: float = 0.0
    loss_c: float = 0.0
    loss_u: float = 0.0
    eps_r: Optional[float] = None
    eps_d: Optional[float] = None
    mask: Optional[int] = None


def ssl_loss_fn(
    lab: list[RawClip],
    labels: np.ndarray,
    unl: list[RawClip],
    pristine: PristineModel,
    cfg: RunConfig,
    seed: int,
    parts: StepParts,
) -> Callable[[dict[str, Tensor]], Tensor]:
    """构造一步的总目标; 分量值写入parts"""
    enc = cfg.encoder_config()
    frag = cfg.fragment_config()
    pairs = [qcs_pair(c, frag, derive_seed(seed, i)) for i, c in enumerate(lab + unl)]
    views1 = [p[0] for p in pairs]
    views2 = [p[1] for p in pairs]
    n_l = len(lab)
    use_c = not cfg.no_consistency
    use_u = len(unl) >= 2 and not cfg.no_knowledge
    w = cfg.loss_weights()

    def loss_fn(t: dict[str, Tensor]) -> Tensor:
        qr1, qd1 = predict_views(views1, t, enc, pristine, cfg)
        ls = supervised_loss(index(qr1, slice(0, n_l)), index(qd1, slice(0, n_l)), labels)
        parts.loss_s = ls.item()
        lc: Union[Tensor, float] = 0.0
        lu: Union[Tensor, float] = 0.0
        qr2, qd2 = qr1, qd1
        if use_c:
            qr2, qd2 = predict_views(views2, t, enc, pristine, cfg)
            lc_t = intra_consistency_loss(qr1, qr2, qd1, qd2)
            parts.loss_c, lc = lc_t.item(), lc_t
        if use_u:
            ur1, ud1 = index(qr1, slice(n_l, None)), index(qd1, slice(n_l, None))
            if cfg.no_consistency:
                lu_t = knowledge_transfer_loss(ur1, ud1, 0.0, 0.0, masked=False)
            else:
                ur2, ud2 = index(qr2, slice(n_l, None)), index(qd2, slice(n_l, None))
                eps_r, eps_d = stability_errors(ur1, ur2, ud1, ud2)
                parts.eps_r, parts.eps_d = eps_r, eps_d
                parts.mask = transfer_mask(eps_r, eps_d)
                lu_t = knowledge_transfer_loss(ur1, ud1, eps_r, eps_d)
            parts.loss_u, lu = lu_t.item(), lu_t
        return total_ssl_loss(ls, lc, lu, w)

    return loss_fn


def train_sslvqa(
    labelled: DatasetManifest,
    unlabelled: DatasetManifest,
    pristine: DatasetManifest,
    theta_init: Optional[Params],
    cfg: RunConfig,
    resume: Optional[SslResult] = None,
    log_file: Optional[str] = None,
    on_epoch: Optional[Callable[[SslResult], None]] = None,
    start_models: Optional[Models] = None,
) -> SslResult:
    """双模型半监督训练, 返回 (θ′, θ″, φ)"""
    cfg.check()
    if len(labelled) < 2:
        raise DataError(f"有标签集至少需要2个片段: {len(labelled)}")
    if any(r.label is None for r in labelled.records):
        raise DataError("有标签集存在缺少标签的记录")

    if resume is not None:
        models, state = resume.models, resume.optim
        history, masks, start = list(resume.history), list(resume.mask_fraction), resume.epoch
    else:
        if start_models is not None:
            models = start_models
        elif theta_init is not None:
            models = initial_models(theta_init, cfg)
        else:
            raise DataError("缺少初始参数θ")
        state = init_state(models.flat())
        history, masks, start = [], [], 0

    lab_cache, unl_cache, pris_cache = (
        ClipCache(labelled),
        ClipCache(unlabelled),
        ClipCache(pristine),
    )
    params = models.flat()
    opt = cfg.adamw_config()
    writer = StepWriter(log_file, append=resume is not None)
    counter = RejectCounter(cfg.max_rejected)

    pris = refresh_pristine(unprefixed(params, "d"), pristine, pris_cache, cfg, start)
    result = SslResult(
        models=Models.from_flat(params, pris),
        optim=state,
        history=history,
        epoch=start,
        config=cfg,
        mask_fraction=masks,
    )
    for epoch in range(start, cfg.epochs):
        meters = EpochMeters()
        batches = labelled_batches(len(labelled), cfg, epoch)
        progress = ProgressMeter(len(batches), meters.all(), prefix=f"SSL[{epoch}]")
        for step, idx in enumerate(batches):
            lab = [labelled.records[i] for i in idx]
            unl_idx = unlabelled_batch(len(unlabelled), cfg, epoch, step)
            unl = [unl_cache.get(unlabelled.records[i]) for i in unl_idx]
            labels = np.array([r.label for r in lab], dtype=np.float64)
            parts = StepParts()
            loss_fn = ssl_loss_fn(
                [lab_cache.get(r) for r in lab],
                labels,
                unl,
                pris,
                cfg,
                derive_seed(cfg.seed, epoch, step, 3),
                parts,
            )
            params, state, loss = optimize_step(params, state, loss_fn, opt, counter)
            log = StepLog(
                epoch=epoch,
                step=step,
                loss=float("nan") if loss is None else loss.item(),
                rejected=loss is None,
                **parts.model_dump(),
            )
            meters.update(log)
            writer.write(log)
            progress.display(step + 1)

        history.append(meters.loss.mean())
        masks.append(meters.mask.mean() if meters.mask.count else 0.0)
        logger.info(f"SSL epoch {epoch + 1}/{cfg.epochs}: {meters.summary()}")
        # 下一轮的原始统计, 同时作为本轮结果的距离模型
        pris = refresh_pristine(unprefixed(params, "d"), pristine, pris_cache, cfg, epoch + 1)
        result = SslResult(
            models=Models.from_flat(params, pris),
            optim=state,
            history=list(history),
            epoch=epoch + 1,
            config=cfg,
            mask_fraction=list(masks),
        )
        if on_epoch is not None:
            on_epoch(result)
    return result


def train_labels_only(
    labelled: DatasetManifest,
    pristine: DatasetManifest,
    theta_init: Optional[Params],
    cfg: RunConfig,
    resume: Optional[SslResult] = None,
    log_file: Optional[str] = None,
    on_epoch: Optional[Callable[[SslResult], None]] = None,
    start_models: Optional[Models] = None,
) -> SslResult:
    """只用有标签数据(监督 + 一致性损失), 不计算稳定性误差"""
    return train_sslvqa(
        labelled,
        labelled.derive([]),
        pristine,
        theta_init,
        cfg,
        resume=resume,
        log_file=log_file,
        on_epoch=on_epoch,
        start_models=start_models,
    )


def finetune(
    ck: Checkpoint, small: DatasetManifest, pristine: DatasetManifest, cfg: RunConfig
) -> SslResult:
    """在小规模有标签集上继续优化(监督 + 一致性), 0轮时参数不变"""
    base = SslResult.from_checkpoint(ck)
    ft_cfg = cfg.model_copy(update={"epochs": cfg.finetune_epochs, "finetuned": True})
    if cfg.finetune_epochs == 0:
        return base.model_copy(
            update={"epoch": 0, "history": [], "mask_fraction": [], "config": ft_cfg}
        )
    return train_labels_only(small, pristine, None, ft_cfg, start_models=base.models)
