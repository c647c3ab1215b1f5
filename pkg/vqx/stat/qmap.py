"""质量图: 令牌质量重投影到源分辨率"""

import numpy as np
from rustshed import Result, Err

from vqx.clip.codec import save_frames
from vqx.sample.fragment import Geometry
from vqx.sys.fs import StrPath
from vqx.text.io import save_lines
from vqx.util.err import ShapeError

PGM_MAX = 255


def cell_index(geom: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """源图每个像素所属(最近)单元的行列号"""
    _, h, w = geom.source
    gh, gw = geom.grid
    rows = np.minimum(np.arange(h) // geom.cell_h, gh - 1)
    cols = np.minimum(np.arange(w) // geom.cell_w, gw - 1)
    return rows, cols


def project_quality_map(
    token_map: np.ndarray,
    geom: Geometry,
    source_shape: tuple[int, int, int],
    t_stride: int = 1,
) -> np.ndarray:
    """令牌质量 => 每个采样帧一张 H×W 质量图

    令牌按时间组优先排列; 每个像素取其所在单元(越界取最近单元)的令牌值,
    采样矩形位于单元内, 故矩形内即为该令牌值。
    """
    if tuple(source_shape) != geom.source:
        raise ShapeError(f"源尺寸与几何不匹配: {source_shape} vs {geom.source}")
    gh, gw = geom.grid
    n_groups = geom.n_frames // t_stride
    values = np.asarray(token_map, dtype=np.float64).reshape(-1)
    if n_groups < 1 or values.size != n_groups * gh * gw:
        raise ShapeError(f"令牌数{values.size}与几何不匹配: {n_groups}x{gh}x{gw}")

    grid = values.reshape(n_groups, gh, gw)
    rows, cols = cell_index(geom)
    groups = np.minimum(np.arange(geom.n_frames) // t_stride, n_groups - 1)
    return grid[groups][:, rows][:, :, cols]


def pgm_lines(qmap: np.ndarray) -> list[str]:
    """纯文本PGM(P2), 注释行记录原始取值范围"""
    if qmap.ndim != 2:
        raise ShapeError(f"质量图必须为二维: {qmap.shape}")
    lo, hi = float(qmap.min()), float(qmap.max())
    span = hi - lo
    if span > 0:
        gray = np.rint((qmap - lo) / span * PGM_MAX).astype(int)
    else:
        gray = np.full(qmap.shape, PGM_MAX // 2, dtype=int)
    h, w = qmap.shape
    lines = ["P2", f"# range {lo!r} {hi!r}", f"{w} {h}", str(PGM_MAX)]
    lines += [" ".join(str(v) for v in row) for row in gray]
    return lines


def save_pgm(qmap: np.ndarray, path: StrPath) -> Result[bool, str]:
    """保存质量图为PGM"""
    try:
        lines = pgm_lines(qmap)
    except ShapeError as e:
        return Err(str(e))
    return save_lines(lines, path)


def pgm_range(lines: list[str]) -> tuple[float, float]:
    """从PGM文本读取取值范围"""
    for s in lines:
        if s.startswith("# range "):
            lo, hi = s[len("# range ") :].split()
            return float(lo), float(hi)
    raise ShapeError("PGM缺少range注释")


def save_map_clip(maps: np.ndarray, path: StrPath) -> Result[bool, str]:
    """质量图序列保存为C=1的片段文件"""
    if maps.ndim != 3:
        return Err(f"质量图序列必须为T×H×W: {maps.shape}")
    return save_frames(maps[..., None].astype(np.float32), path)
