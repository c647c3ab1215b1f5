"""程序化场景: 移动渐变, 滚动纹理, 平移形状"""

import numpy as np
from scipy import ndimage

from vqx.clip.codec import RawClip
from vqx.m.rand import make_rng

N_SHAPES = 3
"""每个场景的形状数量"""


def make_scene(seed: int, t: int, h: int, w: int, frame_rate: float = 25.0) -> RawClip:
    """生成确定性程序化场景片段, 取值[0,1]"""
    assert t >= 1 and h >= 1 and w >= 1
    rng = make_rng(seed)
    yy, xx = np.meshgrid(np.arange(h) / h, np.arange(w) / w, indexing="ij")

    # 背景: 各通道相位不同的移动正弦渐变
    freq = rng.uniform(0.5, 2.0, size=2)
    speed = rng.uniform(-0.05, 0.05)
    phase = rng.uniform(0, 2 * np.pi, size=3)
    tone = rng.uniform(0.3, 0.7, size=3)

    # 纹理: 平滑随机场, 随时间平移
    tex = ndimage.gaussian_filter(rng.standard_normal((h, w)), sigma=1.0)
    tex /= np.abs(tex).max() + 1e-12
    tex_amp = rng.uniform(0.08, 0.2)
    vel = rng.integers(-2, 3, size=2)

    centers = rng.uniform(0.2, 0.8, size=(N_SHAPES, 2))
    radii = rng.uniform(0.08, 0.2, size=N_SHAPES)
    moves = rng.uniform(-0.03, 0.03, size=(N_SHAPES, 2))
    colors = rng.uniform(0.0, 1.0, size=(N_SHAPES, 3))
    square = rng.random(N_SHAPES) < 0.5

    frames = np.empty((t, h, w, 3), dtype=np.float64)
    for k in range(t):
        wave = np.sin(2 * np.pi * (freq[0] * xx + freq[1] * yy + speed * k))
        f = np.stack([tone[c] + 0.2 * np.sin(wave + phase[c]) for c in range(3)], axis=-1)
        f += tex_amp * np.roll(tex, shift=(int(vel[0]) * k, int(vel[1]) * k), axis=(0, 1))[..., None]
        for i in range(N_SHAPES):
            cy, cx = (centers[i] + moves[i] * k) % 1.0
            if square[i]:
                inside = (np.abs(yy - cy) < radii[i]) & (np.abs(xx - cx) < radii[i])
            else:
                inside = (yy - cy) ** 2 + (xx - cx) ** 2 < radii[i] ** 2
            f[inside] = colors[i]
        frames[k] = f

    return RawClip(frames=np.clip(frames, 0.0, 1.0).astype(np.float32), frame_rate=frame_rate)


def constant_clip(value: float, t: int, h: int, w: int) -> RawClip:
    """常数灰度片段"""
    return RawClip(frames=np.full((t, h, w, 3), value, dtype=np.float32))
