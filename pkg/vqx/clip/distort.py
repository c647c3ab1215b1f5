"""合成失真目录: 12类 x 4级, 0级为恒等

各级参数单调嵌套: 随机类失真在同一(片段, 类别, 种子)下复用同一随机场,
级别越高扰动范围越大, 故到原片的MSE随级别不减。
"""

from enum import Enum
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy import ndimage

from vqx.clip.codec import RawClip
from vqx.m.rand import make_rng
from vqx.util.err import ShapeError


class DistortionKind(str, Enum):
    """失真类别"""

    GAUSSIAN_BLUR = "gaussian_blur"
    GAUSSIAN_NOISE = "gaussian_noise"
    IMPULSE_NOISE = "impulse_noise"
    CONTRAST_REDUCTION = "contrast_reduction"
    BRIGHTNESS_SHIFT = "brightness_shift"
    COLOR_DESATURATION = "color_desaturation"
    BLOCK_QUANTIZATION = "block_quantization"
    RESAMPLE = "resample"
    MOTION_BLUR = "motion_blur"
    FRAME_STUTTER = "frame_stutter"
    TEMPORAL_FLICKER = "temporal_flicker"
    FRAME_DROP = "frame_drop"

    @property
    def index(self) -> int:
        return list(DistortionKind).index(self)

    @property
    def temporal(self) -> bool:
        """是否为时域失真"""
        return self in TEMPORAL_KINDS


TEMPORAL_KINDS = {
    DistortionKind.MOTION_BLUR,
    DistortionKind.FRAME_STUTTER,
    DistortionKind.TEMPORAL_FLICKER,
    DistortionKind.FRAME_DROP,
}

MAX_LEVEL = 4
"""最高失真级别"""

LEVELS: dict[DistortionKind, list[float]] = {
    DistortionKind.GAUSSIAN_BLUR: [0.6, 1.2, 2.0, 3.0],
    DistortionKind.GAUSSIAN_NOISE: [0.02, 0.05, 0.1, 0.2],
    DistortionKind.IMPULSE_NOISE: [0.01, 0.03, 0.08, 0.15],
    DistortionKind.CONTRAST_REDUCTION: [0.8, 0.6, 0.4, 0.2],
    DistortionKind.BRIGHTNESS_SHIFT: [0.05, 0.1, 0.2, 0.3],
    DistortionKind.COLOR_DESATURATION: [0.75, 0.5, 0.25, 0.0],
    DistortionKind.BLOCK_QUANTIZATION: [2, 4, 8, 16],
    DistortionKind.RESAMPLE: [2, 4, 8, 16],
    DistortionKind.MOTION_BLUR: [2, 3, 5, 8],
    DistortionKind.FRAME_STUTTER: [2, 4, 8, 16],
    DistortionKind.TEMPORAL_FLICKER: [0.05, 0.1, 0.2, 0.35],
    DistortionKind.FRAME_DROP: [0.1, 0.2, 0.35, 0.5],
}
"""各类失真1..4级参数"""

FLICKER_PERIOD = 4
"""闪烁周期(帧)"""

LUMA = np.array([0.299, 0.587, 0.114])


class DistortionSpec(BaseModel):
    """失真规格"""

    kind: DistortionKind
    """类别"""
    level: int = Field(ge=0, le=MAX_LEVEL)
    """级别, 0为恒等"""

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.level}"

    def param(self) -> float:
        """本级参数"""
        assert self.level > 0
        return LEVELS[self.kind][self.level - 1]


def label_of_level(level: int) -> float:
    """合成质量标签: 1 - level/4"""
    return 1.0 - level / MAX_LEVEL


def all_specs(levels: Optional[list[int]] = None) -> list[DistortionSpec]:
    """全部类别 x 指定级别"""
    levels = levels or list(range(1, MAX_LEVEL + 1))
    return [DistortionSpec(kind=k, level=lv) for k in DistortionKind for lv in levels]


def _block_bounds(n: int, b: int) -> tuple[np.ndarray, np.ndarray]:
    """块起点与块长度, 末块可不完整"""
    starts = np.arange(0, n, b)
    sizes = np.minimum(starts + b, n) - starts
    return starts, sizes


def _block_mean(f: np.ndarray, b: int) -> np.ndarray:
    """空间块均值(缩小后的图)"""
    _, h, w, _ = f.shape
    rs, rn = _block_bounds(h, b)
    cs, cn = _block_bounds(w, b)
    s = np.add.reduceat(np.add.reduceat(f, rs, axis=1), cs, axis=2)
    return s / np.outer(rn, cn)[None, :, :, None]


def _block_quantize(f: np.ndarray, b: int) -> np.ndarray:
    _, h, w, _ = f.shape
    m = _block_mean(f, b)
    _, rn = _block_bounds(h, b)
    _, cn = _block_bounds(w, b)
    return np.repeat(np.repeat(m, rn, axis=1), cn, axis=2)


def _resample(f: np.ndarray, k: int) -> np.ndarray:
    """块均值缩小k倍, 双线性放大回原尺寸"""
    _, h, w, _ = f.shape
    small = _block_mean(f, k)
    sh, sw = small.shape[1:3]
    ys = np.clip((np.arange(h) + 0.5) / k - 0.5, 0, sh - 1)
    xs = np.clip((np.arange(w) + 0.5) / k - 0.5, 0, sw - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, sh - 1)
    x1 = np.minimum(x0 + 1, sw - 1)
    wy = (ys - y0)[None, :, None, None]
    wx = (xs - x0)[None, None, :, None]
    top = small[:, y0][:, :, x0] * (1 - wx) + small[:, y0][:, :, x1] * wx
    bottom = small[:, y1][:, :, x0] * (1 - wx) + small[:, y1][:, :, x1] * wx
    return top * (1 - wy) + bottom * wy


def _impulse(f: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    t, h, w, _ = f.shape
    hit = rng.random((t, h, w)) < p
    salt = (rng.random((t, h, w)) < 0.5).astype(f.dtype)
    return np.where(hit[..., None], salt[..., None], f)


def _flicker(f: np.ndarray, a: float, rng: np.random.Generator) -> np.ndarray:
    phase = rng.uniform(0.0, 2.0 * np.pi)
    t = np.arange(f.shape[0])
    gain = 1.0 + a * np.sin(2.0 * np.pi * t / FLICKER_PERIOD + phase)
    return f * gain[:, None, None, None]


def _frame_drop(f: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    dropped = rng.random(f.shape[0]) < p
    dropped[0] = False
    src = np.arange(f.shape[0])
    for t in range(1, len(src)):
        if dropped[t]:
            src[t] = src[t - 1]
    return f[src]


def _desaturate(f: np.ndarray, s: float) -> np.ndarray:
    if f.shape[3] != 3:
        return f
    gray = (f @ LUMA)[..., None]
    return gray + s * (f - gray)


Apply = Callable[[np.ndarray, float, np.random.Generator], np.ndarray]

_APPLY: dict[DistortionKind, Apply] = {
    DistortionKind.GAUSSIAN_BLUR: lambda f, s, _: ndimage.gaussian_filter(
        f, sigma=(0, s, s, 0), mode="reflect"
    ),
    DistortionKind.GAUSSIAN_NOISE: lambda f, s, rng: f + s * rng.standard_normal(f.shape),
    DistortionKind.IMPULSE_NOISE: _impulse,
    DistortionKind.CONTRAST_REDUCTION: lambda f, a, _: f.mean() + a * (f - f.mean()),
    DistortionKind.BRIGHTNESS_SHIFT: lambda f, b, _: f + b,
    DistortionKind.COLOR_DESATURATION: lambda f, s, _: _desaturate(f, s),
    DistortionKind.BLOCK_QUANTIZATION: lambda f, b, _: _block_quantize(f, int(b)),
    DistortionKind.RESAMPLE: lambda f, k, _: _resample(f, int(k)),
    DistortionKind.MOTION_BLUR: lambda f, n, _: ndimage.uniform_filter1d(
        f, size=int(n), axis=0, mode="nearest"
    ),
    DistortionKind.FRAME_STUTTER: lambda f, r, _: f[(np.arange(f.shape[0]) // int(r)) * int(r)],
    DistortionKind.TEMPORAL_FLICKER: _flicker,
    DistortionKind.FRAME_DROP: _frame_drop,
}


def synthesize_distortion(clip: RawClip, spec: DistortionSpec, seed: int) -> RawClip:
    """施加失真, 输出为(片段, 规格, 种子)的确定性函数"""
    if spec.level == 0:
        return clip
    rng = make_rng(seed, spec.kind.index)
    f = clip.frames.astype(np.float64)
    out = _APPLY[spec.kind](f, spec.param(), rng)
    return RawClip(frames=np.clip(out, 0.0, 1.0).astype(np.float32), frame_rate=clip.frame_rate)


def distort_region(clip: RawClip, spec: DistortionSpec, seed: int, mask: np.ndarray) -> RawClip:
    """只在空间掩码(H×W, True处)内施加失真"""
    _, h, w, _ = clip.shape
    if mask.shape != (h, w):
        raise ShapeError(f"掩码形状不匹配: {mask.shape} vs {(h, w)}")
    d = synthesize_distortion(clip, spec, seed)
    out = np.where(mask[None, :, :, None], d.frames, clip.frames)
    return RawClip(frames=out, frame_rate=clip.frame_rate)


def mse(a: RawClip, b: RawClip) -> float:
    """均方误差"""
    return float(np.mean((a.frames.astype(np.float64) - b.frames) ** 2))
