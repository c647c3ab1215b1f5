"""骨干网络 f_θ: 片段 => 特征集 z (N×C)

结构:
    每个(时间组, 单元)的体素展平 => 仿射 + silu 嵌入
    => 通道残差块 => 时间相邻差分混合块 => 通道残差块
令牌按时间组优先排列: n = tg·grid_h·grid_w + i·grid_w + j
"""

from pydantic import BaseModel, ConfigDict, Field

from vqx.ad.fun import silu, affine
from vqx.ad.tensor import Tensor, reshape, transpose, index, sub, add
from vqx.nn.param import TParams
from vqx.sample.fragment import Fragment, FragmentConfig
from vqx.util.err import ShapeError

PIXEL_CENTER = 0.5
"""输入像素中心化"""


class EncoderConfig(BaseModel):
    """骨干网络配置"""

    model_config = ConfigDict(extra="forbid")

    fragment: FragmentConfig = FragmentConfig()
    """输入片段配置"""
    channels: int = Field(default=16, ge=1)
    """输出通道数C"""
    t_stride: int = Field(default=2, ge=1)
    """每个令牌覆盖的帧数"""
    in_channels: int = Field(default=3, ge=1)
    """像素通道数"""
    embed_gain: float = Field(default=4.0, gt=0)
    """嵌入层初始化增益"""

    @property
    def n_groups(self) -> int:
        """时间组数"""
        return self.fragment.n_frames // self.t_stride

    @property
    def n_tokens(self) -> int:
        return self.n_groups * self.fragment.n_cells

    @property
    def voxel_dim(self) -> int:
        """每个令牌的体素数"""
        p = self.fragment.patch
        return self.t_stride * p * p * self.in_channels

    def check(self) -> None:
        """检查配置自洽"""
        if self.fragment.n_frames % self.t_stride != 0:
            raise ShapeError(f"帧数{self.fragment.n_frames}不能被t_stride={self.t_stride}整除")


def tokenize(x: Tensor, cfg: EncoderConfig) -> Tensor:
    """片段帧(n, gh·p, gw·p, c) => 令牌体素(N, D)"""
    f = cfg.fragment
    expect = (f.n_frames, f.height, f.width, cfg.in_channels)
    if x.shape != expect:
        raise ShapeError(f"片段形状不匹配: {x.shape} vs {expect}")
    cfg.check()
    p = f.patch
    v = reshape(x, (cfg.n_groups, cfg.t_stride, f.grid_h, p, f.grid_w, p, cfg.in_channels))
    v = transpose(v, (0, 2, 4, 1, 3, 5, 6))
    return reshape(v, (cfg.n_tokens, cfg.voxel_dim))


def shift_next(h: Tensor, n_groups: int) -> Tensor:
    """每个令牌取下一时间组的同位置令牌, 末组重复自身"""
    n, c = h.shape
    cells = n // n_groups
    idx = [min(g + 1, n_groups - 1) for g in range(n_groups)]
    h3 = reshape(h, (n_groups, cells, c))
    return reshape(index(h3, idx), (n, c))


def encode_frames(x: Tensor, theta: TParams, cfg: EncoderConfig) -> Tensor:
    """帧张量 => 特征集 z"""
    v = sub(tokenize(x, cfg), PIXEL_CENTER)
    h = silu(affine(v, theta["embed.w"], theta["embed.b"]))
    h = add(h, silu(affine(h, theta["mix1.w"], theta["mix1.b"])))
    d = sub(shift_next(h, cfg.n_groups), h)
    h = add(h, silu(affine(d, theta["temporal.w"], theta["temporal.b"])))
    h = add(h, silu(affine(h, theta["mix2.w"], theta["mix2.b"])))
    return h


def encode(fragment: Fragment, theta: TParams, cfg: EncoderConfig) -> Tensor:
    """片段 => 特征集 z (N×C)"""
    return encode_frames(Tensor(fragment.frames), theta, cfg)
