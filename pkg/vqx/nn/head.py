from pydantic import BaseModel, ConfigDict, Field

from vqx.ad.fun import silu, affine
from vqx.ad.tensor import Tensor, reshape, mean
from vqx.nn.param import TParams
from vqx.util.err import ShapeError


class HeadConfig(BaseModel):
    """回归头配置: 两个逐点层"""

    model_config = ConfigDict(extra="forbid")

    channels: int = Field(default=16, ge=1)
    """输入通道数C"""
    hidden: int = Field(default=16, ge=1)
    """隐藏通道数"""


def regress_head(z: Tensor, phi: TParams) -> tuple[Tensor, Tensor]:
    """逐令牌质量图与其均值 Q_R"""
    if z.ndim != 2 or z.shape[1] != phi["fc1.w"].shape[0]:
        raise ShapeError(f"特征形状不匹配: {z.shape}")
    h = silu(affine(z, phi["fc1.w"], phi["fc1.b"]))
    token_map = reshape(affine(h, phi["fc2.w"]), (z.shape[0],))
    return token_map, mean(token_map)
