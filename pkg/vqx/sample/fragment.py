"""质量一致采样(QCS): 网格单元内取固定位置小块, 拼接成片段

采样只做索引, 不插值; 同一片段所有帧的小块位置相同。
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from vqx.clip.codec import RawClip
from vqx.m.rand import make_rng, derive_seed
from vqx.util.err import ShapeError


class FragmentConfig(BaseModel):
    """片段配置"""

    model_config = ConfigDict(extra="forbid")

    grid_h: int = Field(default=7, ge=1)
    """纵向单元数"""
    grid_w: int = Field(default=7, ge=1)
    """横向单元数"""
    patch: int = Field(default=32, ge=1)
    """小块边长(像素)"""
    n_frames: int = Field(default=32, ge=1)
    """每片段帧数"""

    @property
    def height(self) -> int:
        return self.grid_h * self.patch

    @property
    def width(self) -> int:
        return self.grid_w * self.patch

    @property
    def n_cells(self) -> int:
        return self.grid_h * self.grid_w


class Geometry(BaseModel):
    """片段几何: 时间窗与每个单元的源矩形"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t0: int
    """时间窗起点"""
    origins: np.ndarray
    """各单元小块左上角(源坐标), grid_h×grid_w×2, 行优先"""
    cell_h: int
    cell_w: int
    patch: int
    n_frames: int
    source: tuple[int, int, int]
    """源片段(T,H,W)"""

    @property
    def grid(self) -> tuple[int, int]:
        gh, gw, _ = self.origins.shape
        return gh, gw

    def rects(self) -> list[tuple[int, int, int, int]]:
        """源矩形(y0,x0,y1,x1), 单元行优先"""
        gh, gw = self.grid
        p = self.patch
        out = []
        for i in range(gh):
            for j in range(gw):
                y, x = (int(v) for v in self.origins[i, j])
                out.append((y, x, y + p, x + p))
        return out

    def same_as(self, other: "Geometry") -> bool:
        """几何完全一致"""
        return (
            self.t0 == other.t0
            and self.source == other.source
            and self.patch == other.patch
            and np.array_equal(self.origins, other.origins)
        )

    def index_maps(self) -> tuple[np.ndarray, np.ndarray]:
        """拼接坐标 => 源坐标的行列索引表"""
        gh, gw = self.grid
        p = self.patch
        a = np.arange(p)
        ys = self.origins[:, :, 0][:, :, None, None] + a[None, None, :, None]
        xs = self.origins[:, :, 1][:, :, None, None] + a[None, None, None, :]
        ys = np.broadcast_to(ys, (gh, gw, p, p)).transpose(0, 2, 1, 3).reshape(gh * p, gw * p)
        xs = np.broadcast_to(xs, (gh, gw, p, p)).transpose(0, 2, 1, 3).reshape(gh * p, gw * p)
        return ys, xs


class Fragment(BaseModel):
    """QCS片段"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frames: np.ndarray
    """n_frames × (grid_h·patch) × (grid_w·patch) × C"""
    geometry: Geometry


def check_clip(shape: tuple[int, int, int, int], cfg: FragmentConfig) -> tuple[int, int]:
    """检查片段尺寸满足配置, 返回单元尺寸"""
    t, h, w, _ = shape
    cell_h, cell_w = h // cfg.grid_h, w // cfg.grid_w
    if cell_h < cfg.patch or cell_w < cfg.patch:
        raise ShapeError(f"单元({cell_h}x{cell_w})小于小块边长{cfg.patch}")
    if t < cfg.n_frames:
        raise ShapeError(f"帧数不足: {t} < {cfg.n_frames}")
    return cell_h, cell_w


def sample_geometry(
    shape: tuple[int, int, int, int], cfg: FragmentConfig, seed: int
) -> Geometry:
    """随机时间窗 + 每单元均匀随机位置"""
    cell_h, cell_w = check_clip(shape, cfg)
    t = shape[0]
    rng = make_rng(seed)
    t0 = int(rng.integers(0, t - cfg.n_frames + 1))
    oy = rng.integers(0, cell_h - cfg.patch + 1, size=(cfg.grid_h, cfg.grid_w))
    ox = rng.integers(0, cell_w - cfg.patch + 1, size=(cfg.grid_h, cfg.grid_w))
    oy += (np.arange(cfg.grid_h) * cell_h)[:, None]
    ox += (np.arange(cfg.grid_w) * cell_w)[None, :]
    return Geometry(
        t0=t0,
        origins=np.stack([oy, ox], axis=-1),
        cell_h=cell_h,
        cell_w=cell_w,
        patch=cfg.patch,
        n_frames=cfg.n_frames,
        source=(shape[0], shape[1], shape[2]),
    )


def cut(clip: RawClip, geom: Geometry) -> Fragment:
    """按几何从片段中取出并拼接小块"""
    t, h, w, _ = clip.shape
    if (t, h, w) != geom.source:
        raise ShapeError(f"几何与片段不匹配: {geom.source} vs {(t, h, w)}")
    ys, xs = geom.index_maps()
    window = clip.frames[geom.t0 : geom.t0 + geom.n_frames]
    return Fragment(frames=window[:, ys, xs], geometry=geom)


def qcs_sample(clip: RawClip, cfg: FragmentConfig, seed: int) -> Fragment:
    """QCS采样一个片段"""
    return cut(clip, sample_geometry(clip.shape, cfg, seed))


def view_seeds(seed: int) -> tuple[int, int]:
    """两个视图的独立子种子"""
    return derive_seed(seed, 1), derive_seed(seed, 2)


def qcs_pair(clip: RawClip, cfg: FragmentConfig, seed: int) -> tuple[Fragment, Fragment]:
    """两次独立QCS, 得到视图对"""
    s1, s2 = view_seeds(seed)
    return qcs_sample(clip, cfg, s1), qcs_sample(clip, cfg, s2)


def content_aligned_sample(clips: list[RawClip], cfg: FragmentConfig, seed: int) -> list[Fragment]:
    """同一场景的多个失真版本, 共享时间窗与几何"""
    if not clips:
        return []
    shape = clips[0].shape
    for c in clips[1:]:
        if c.shape != shape:
            raise ShapeError(f"片段形状不一致: {c.shape} vs {shape}")
    geom = sample_geometry(shape, cfg, seed)
    return [cut(c, geom) for c in clips]


def content_aligned_pair(
    clips: list[RawClip], cfg: FragmentConfig, seed: int
) -> tuple[list[Fragment], list[Fragment]]:
    """两个视图各自内容对齐, 视图间几何独立"""
    s1, s2 = view_seeds(seed)
    return content_aligned_sample(clips, cfg, s1), content_aligned_sample(clips, cfg, s2)
