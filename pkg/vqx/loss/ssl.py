"""半监督双模型目标: 监督损失, 模型内一致性, 稳定性误差, 知识迁移, 总目标"""

from pydantic import BaseModel, ConfigDict, Field

from vqx.ad.tensor import Tensor, ArrayLike, add, mul, stop_gradient, as_tensor
from vqx.loss.plcc import plcc_loss


class LossWeights(BaseModel):
    """总目标权重"""

    model_config = ConfigDict(extra="forbid")

    lambda_c: float = Field(default=1.0, ge=0)
    """一致性损失权重"""
    lambda_u: float = Field(default=1.0, ge=0)
    """知识迁移损失权重"""


def supervised_loss(qr: ArrayLike, qd: ArrayLike, labels: ArrayLike) -> Tensor:
    """ℒ_s = ℒ_plcc(Q_R, y) + ℒ_plcc(Q_D, y), 有标签批的′视图"""
    return add(plcc_loss(qr, labels), plcc_loss(qd, labels))


def intra_consistency_loss(
    qr1: ArrayLike, qr2: ArrayLike, qd1: ArrayLike, qd2: ArrayLike
) -> Tensor:
    """ℒ_c: 每个模型在两个视图上的预测一致性"""
    return add(plcc_loss(qr1, qr2), plcc_loss(qd1, qd2))


def stability_errors(
    qr1: ArrayLike, qr2: ArrayLike, qd1: ArrayLike, qd2: ArrayLike
) -> tuple[float, float]:
    """(ε_r, ε_d): 无标签批上两模型的视图一致性误差, 不参与求导"""
    eps_r = plcc_loss(stop_gradient(as_tensor(qr1)), stop_gradient(as_tensor(qr2))).item()
    eps_d = plcc_loss(stop_gradient(as_tensor(qd1)), stop_gradient(as_tensor(qd2))).item()
    return eps_r, eps_d


def transfer_mask(eps_r: float, eps_d: float) -> int:
    """m = 1(ε_r > ε_d): 1时距离模型指导回归模型, 相等时回归模型指导距离模型"""
    return int(eps_r > eps_d)


def knowledge_transfer_loss(
    qr: ArrayLike, qd: ArrayLike, eps_r: float, eps_d: float, masked: bool = True
) -> Tensor:
    """ℒ_u: 稳定模型的预测作伪标签(阻断梯度)指导另一模型

    masked=False 时不使用掩码和阻断, 两模型双向迁移。
    """
    qr, qd = as_tensor(qr), as_tensor(qd)
    if not masked:
        return plcc_loss(qr, qd)
    if transfer_mask(eps_r, eps_d):
        return plcc_loss(qr, stop_gradient(qd))
    return plcc_loss(stop_gradient(qr), qd)


def total_ssl_loss(ls: Tensor, lc: ArrayLike, lu: ArrayLike, w: LossWeights) -> Tensor:
    """ℒ = ℒ_s + λ_c·ℒ_c + λ_u·ℒ_u"""
    return add(add(ls, mul(lc, w.lambda_c)), mul(lu, w.lambda_u))
