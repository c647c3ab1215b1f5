"""运行配置

配置文件为纯文本, 每行 `key = value`, `#` 开头为注释, '-' 表示空值。
覆盖顺序: 缺省 < 预设 < 文件 < --set < --ablate
"""

from typing import Any, Optional

from parse import parse  # type: ignore
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from rustshed import Result, Ok, Err, result_shortcut

from vqx.clip.distort import DistortionKind, DistortionSpec, MAX_LEVEL
from vqx.loss.ssl import LossWeights
from vqx.m.rand import default_seed
from vqx.nn.encoder import EncoderConfig
from vqx.nn.head import HeadConfig
from vqx.sample.fragment import FragmentConfig
from vqx.sys.fs import StrPath
from vqx.text.io import load_lines, save_lines
from vqx.train.adamw import AdamWConfig
from vqx.util.err import ConfigError

KV_FORMAT = "{key} = {value}"
NONE_MARK = "-"
ABLATIONS = ["no_consistency", "no_knowledge", "cosine_contrastive"]
"""消融开关"""


class RunConfig(BaseModel):
    """扁平运行配置, 缺省值为全尺寸设置"""

    model_config = ConfigDict(extra="forbid")

    # 路径与种子
    data_dir: str = "data"
    """合成数据集目录"""
    out_dir: str = "runs"
    """输出目录"""
    seed: int = Field(default_factory=default_seed)
    """主种子, 缺省取环境变量VQX_SEED"""

    # 合成数据
    n_scenes: int = Field(default=200, ge=1)
    """场景数"""
    scene_frames: int = Field(default=32, ge=1)
    """场景帧数"""
    scene_height: int = Field(default=224, ge=1)
    scene_width: int = Field(default=224, ge=1)
    frame_rate: float = Field(default=25.0, gt=0)
    kinds: str = "all"
    """失真类别, 逗号分隔或all"""
    levels: str = "1,2,3,4"
    """失真级别, 逗号分隔"""
    label_noise: float = Field(default=0.0, ge=0)
    """合成标签噪声标准差"""

    # 片段与网络
    grid_h: int = Field(default=7, ge=1)
    grid_w: int = Field(default=7, ge=1)
    patch: int = Field(default=32, ge=1)
    n_frames: int = Field(default=32, ge=1)
    channels: int = Field(default=16, ge=1)
    """特征通道数C"""
    t_stride: int = Field(default=2, ge=1)
    head_hidden: int = Field(default=16, ge=1)
    embed_gain: float = Field(default=4.0, gt=0)

    # 优化
    lr: float = Field(default=1e-4, gt=0)
    weight_decay: float = Field(default=0.05, ge=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)
    epochs: int = Field(default=30, ge=1)
    max_rejected: int = Field(default=10, ge=1)
    """连续拒绝步数上限"""

    # 损失
    tau: float = Field(default=10.0, gt=0)
    lambda_c: float = Field(default=1.0, ge=0)
    lambda_u: float = Field(default=1.0, ge=0)
    ridge: Optional[float] = Field(default=None, ge=0)
    """协方差岭, 空值为相对缺省"""

    # 预训练
    pretrain_k: int = Field(default=4, ge=1)
    """每批每场景的失真版本数K"""
    pretrain_scenes: int = Field(default=1, ge=1)
    """每批场景数, 大于1时跨场景片段作额外负例"""

    # 半监督
    batch_labelled: int = Field(default=8, ge=2)
    """B_l"""
    batch_unlabelled: int = Field(default=8, ge=0)
    """B_u"""
    labelled_frac: float = Field(default=0.2, gt=0, le=1)
    unlabelled_frac: float = Field(default=0.6, ge=0, le=1)
    finetune_frac: float = Field(default=0.2, gt=0, le=0.5)
    """微调子集与其测试子集各占的比例"""
    finetune_epochs: int = Field(default=5, ge=0)
    finetuned: bool = False
    """检查点来自微调, 评估取微调协议的测试子集"""

    # 消融
    no_consistency: bool = False
    no_knowledge: bool = False
    cosine_contrastive: bool = False

    # 评估
    n_fragments: int = Field(default=4, ge=1)
    """每片段每模型的推断片段数F"""
    znorm: bool = False
    """平均前对Q_R, Q_D做z归一化"""
    n_splits: int = Field(default=3, ge=1)
    split_index: int = Field(default=0, ge=0)
    """训练与评估使用的随机划分序号"""
    alpha: float = Field(default=0.05, gt=0, lt=1)

    @field_validator("kinds")
    @classmethod
    def _check_kinds(cls, v: str) -> str:
        if v != "all":
            for k in split_list(v):
                DistortionKind(k)
        return v

    @field_validator("levels")
    @classmethod
    def _check_levels(cls, v: str) -> str:
        for s in split_list(v):
            if not 0 <= int(s) <= MAX_LEVEL:
                raise ValueError(f"级别超出范围: {s}")
        return v

    def fragment_config(self) -> FragmentConfig:
        return FragmentConfig(
            grid_h=self.grid_h, grid_w=self.grid_w, patch=self.patch, n_frames=self.n_frames
        )

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            fragment=self.fragment_config(),
            channels=self.channels,
            t_stride=self.t_stride,
            embed_gain=self.embed_gain,
        )

    def head_config(self) -> HeadConfig:
        return HeadConfig(channels=self.channels, hidden=self.head_hidden)

    def adamw_config(self) -> AdamWConfig:
        return AdamWConfig(
            lr=self.lr,
            weight_decay=self.weight_decay,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.adam_eps,
        )

    def loss_weights(self) -> LossWeights:
        return LossWeights(lambda_c=self.lambda_c, lambda_u=self.lambda_u)

    def distortion_specs(self) -> list[DistortionSpec]:
        """合成用失真规格"""
        if self.kinds == "all":
            kinds = list(DistortionKind)
        else:
            kinds = [DistortionKind(k) for k in split_list(self.kinds)]
        levels = [int(s) for s in split_list(self.levels)]
        return [DistortionSpec(kind=k, level=lv) for k in kinds for lv in levels]

    def check(self) -> None:
        """检查配置间约束"""
        enc = self.encoder_config()
        if self.n_frames % self.t_stride != 0:
            raise ConfigError(f"n_frames={self.n_frames} 不能被 t_stride={self.t_stride} 整除")
        if enc.n_tokens <= self.channels:
            raise ConfigError(f"令牌数{enc.n_tokens}必须大于通道数{self.channels}")
        if self.labelled_frac + self.unlabelled_frac > 1.0:
            raise ConfigError("labelled_frac + unlabelled_frac 超过1")
        cell_h, cell_w = self.scene_height // self.grid_h, self.scene_width // self.grid_w
        if cell_h < self.patch or cell_w < self.patch or self.scene_frames < self.n_frames:
            raise ConfigError("场景尺寸不足以采样片段")


PRESETS: dict[str, dict[str, Any]] = {
    "standard": {},
    "desk": {
        "n_scenes": 8,
        "scene_frames": 12,
        "scene_height": 80,
        "scene_width": 80,
        "kinds": "gaussian_blur,gaussian_noise,block_quantization,motion_blur",
        "grid_h": 4,
        "grid_w": 4,
        "patch": 16,
        "n_frames": 8,
        "lr": 1e-3,
        "epochs": 20,
        "finetune_epochs": 3,
        "batch_labelled": 6,
        "batch_unlabelled": 6,
    },
}
"""预设: 全尺寸设置与CPU桌面规模"""


def split_list(s: str) -> list[str]:
    """逗号分隔列表"""
    return [t.strip() for t in s.split(",") if t.strip()]


def _value(s: str) -> Optional[str]:
    return None if s.strip() == NONE_MARK else s.strip()


def apply_overrides(cfg: RunConfig, kv: dict[str, Any]) -> RunConfig:
    """应用覆盖项, 未知键报错"""
    for k in kv:
        if k not in RunConfig.model_fields:
            raise ConfigError(f"未知配置项: {k}")
    data = cfg.model_dump()
    data.update({k: _value(v) if isinstance(v, str) else v for k, v in kv.items()})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"配置值无效: {e}")


def preset_config(name: str = "standard", seed: Optional[int] = None) -> RunConfig:
    """预设配置"""
    if name not in PRESETS:
        raise ConfigError(f"未知预设: {name}")
    cfg = apply_overrides(RunConfig(), PRESETS[name])
    return cfg if seed is None else apply_overrides(cfg, {"seed": seed})


def parse_kv(lines: list[str]) -> Result[dict[str, str], str]:
    """解析 key = value 行"""
    kv: dict[str, str] = {}
    for line in lines:
        r = parse(KV_FORMAT, line)
        if r is None:
            return Err(f"配置行格式错误: {line!r}")
        kv[r["key"].strip()] = r["value"].strip()
    return Ok(kv)


@result_shortcut
def load_kv(file: StrPath) -> Result[dict[str, str], str]:
    """加载配置文件为键值表"""
    return parse_kv(load_lines(file).Q)


def load_run_config(file: StrPath, base: Optional[RunConfig] = None) -> Result[RunConfig, str]:
    """加载配置文件并覆盖到基础配置"""
    r = load_kv(file)
    if r.is_err():
        return Err(r.unwrap_err())
    try:
        return Ok(apply_overrides(base or RunConfig(), r.unwrap()))
    except ConfigError as e:
        return Err(str(e))


def _fmt(v: Any) -> str:
    if v is None:
        return NONE_MARK
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_lines(cfg: RunConfig) -> list[str]:
    """配置序列化为 key = value 行"""
    return [f"{k} = {_fmt(v)}" for k, v in cfg.model_dump().items()]


def save_run_config(cfg: RunConfig, file: StrPath) -> Result[bool, str]:
    """保存有效配置"""
    return save_lines(config_lines(cfg), file)


def describe_keys() -> str:
    """所有配置项及缺省值(含desk预设)"""
    desk = PRESETS["desk"]
    rows = []
    for k, f in RunConfig.model_fields.items():
        d = "<VQX_SEED|0>" if k == "seed" else f.default
        tail = f"  [desk: {desk[k]}]" if k in desk else ""
        rows.append(f"  {k} = {d}{tail}")
    return "配置项:\n" + "\n".join(rows)
