"""片段二进制格式

布局(小端):
    magic     8字节  b"VQXCLIP\\x01"
    T,H,W,C   u32 x 4
    frame_rate f32
    payload   T*H*W*C 个 f32, 行优先
"""

import struct

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from rustshed import Result, Ok, Err

from vqx.sys.fs import StrPath, make_parents

CLIP_MAGIC = b"VQXCLIP\x01"
"""片段文件魔数"""

HEADER = struct.Struct("<8sIIIIf")
"""文件头: 28字节"""

CLIP_EXT = ".vqc"
"""片段文件扩展名"""


class RawClip(BaseModel):
    """解码后的视频片段, T×H×W×C, 取值[0,1]"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frames: np.ndarray
    """帧数据, float32"""
    frame_rate: float = 25.0
    """帧率(仅元数据)"""

    @field_validator("frames")
    @classmethod
    def _check_frames(cls, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float32)
        if v.ndim != 4 or min(v.shape) < 1:
            raise ValueError(f"帧形状无效: {v.shape}")
        if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("帧取值超出[0,1]")
        return v

    @property
    def shape(self) -> tuple[int, int, int, int]:
        t, h, w, c = self.frames.shape
        return t, h, w, c

    def __len__(self) -> int:
        return int(self.frames.shape[0])

    def same_frames(self, other: "RawClip") -> bool:
        """逐位相同"""
        return self.frames.shape == other.frames.shape and bool(
            np.array_equal(self.frames, other.frames)
        )


def save_frames(frames: np.ndarray, path: StrPath, frame_rate: float = 25.0) -> Result[bool, str]:
    """保存帧数组(不检查取值范围)"""
    if frames.ndim != 4:
        return Err(f"帧形状无效: {frames.shape}")
    t, h, w, c = frames.shape
    head = HEADER.pack(CLIP_MAGIC, t, h, w, c, frame_rate)
    try:
        make_parents(path)
        with open(path, "wb") as f:
            f.write(head)
            f.write(np.ascontiguousarray(frames, dtype="<f4").tobytes())
    except OSError as e:
        return Err(f"写入失败: {path}, {e}")
    return Ok(True)


def load_frames(path: StrPath) -> Result[tuple[np.ndarray, float], str]:
    """加载帧数组与帧率(不检查取值范围)"""
    try:
        with open(path, "rb") as f:
            buf = f.read()
    except OSError as e:
        return Err(f"读取失败: {path}, {e}")

    if len(buf) < HEADER.size:
        return Err(f"文件头不完整: {path}")
    magic, t, h, w, c, fps = HEADER.unpack_from(buf)
    if magic != CLIP_MAGIC:
        return Err(f"魔数错误: {path}")
    if min(t, h, w, c) < 1:
        return Err(f"文件头尺寸无效: T={t},H={h},W={w},C={c}")

    n = t * h * w * c * 4
    payload = len(buf) - HEADER.size
    if payload < n:
        return Err(f"数据截断: 需要{n}字节, 实际{payload}字节")
    if payload > n:
        return Err(f"数据多余: 需要{n}字节, 实际{payload}字节")
    arr = np.frombuffer(buf, dtype="<f4", offset=HEADER.size).reshape(t, h, w, c)
    return Ok((arr.astype(np.float32), float(fps)))


def save_clip(clip: RawClip, path: StrPath) -> Result[bool, str]:
    """保存片段"""
    return save_frames(clip.frames, path, clip.frame_rate)


def load_clip(path: StrPath) -> Result[RawClip, str]:
    """加载片段, 取值必须在[0,1]"""
    r = load_frames(path)
    if r.is_err():
        return Err(r.unwrap_err())
    arr, fps = r.unwrap()
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        return Err(f"取值超出[0,1]: {path}")
    return Ok(RawClip(frames=arr, frame_rate=fps))
