"""检查点二进制格式

布局(小端):
    magic        8字节  b"VQXCKPT\\0"
    version      u32
    header_len   u32
    header       JSON(utf-8), CheckpointHeader
    arrays       按header.arrays顺序的f8数组
    crc32        u32, 覆盖之前全部字节
"""

import struct
import zlib
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from rustshed import Result, Ok, Err

from vqx.nn.param import Params
from vqx.stat.mvg import PristineModel
from vqx.sys.fs import StrPath, make_parents
from vqx.text.txt_json import to_json, from_json
from vqx.train.adamw import OptimState
from vqx.train.cfg import RunConfig

CKPT_MAGIC = b"VQXCKPT\0"
CKPT_VERSION = 1
PREFIX = struct.Struct("<8sII")
CRC = struct.Struct("<I")


class ArrayEntry(BaseModel):
    """数组目录项"""

    name: str
    shape: list[int]


class CheckpointHeader(BaseModel):
    """检查点头"""

    stage: str
    """pretrain | ssl"""
    epoch: int
    """已完成轮数"""
    seed: int
    """随机状态: 全部随机数由(seed, epoch, step, ...)派生"""
    step: int
    config: RunConfig
    history: list[float] = []
    """每轮平均损失"""
    mask_fraction: list[float] = []
    """每轮m=1的步数比例, 仅半监督阶段"""
    n_pristine: int = 0
    arrays: list[ArrayEntry] = []


class Checkpoint(BaseModel):
    """训练检查点"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    stage: str
    epoch: int
    seed: int
    config: RunConfig
    params: Params
    """扁平参数: 预训练为 theta/..., 半监督为 r/..., d/..., h/..."""
    optim: OptimState
    pristine: Optional[PristineModel] = None
    history: list[float] = []
    mask_fraction: list[float] = []


def _arrays(ck: Checkpoint) -> list[tuple[str, np.ndarray]]:
    out = [(f"p:{k}", v) for k, v in ck.params.items()]
    out += [(f"m:{k}", v) for k, v in ck.optim.m.items()]
    out += [(f"v:{k}", v) for k, v in ck.optim.v.items()]
    if ck.pristine is not None:
        out += [("pristine:mu", ck.pristine.mu), ("pristine:cov", ck.pristine.cov)]
    return out


def checkpoint_bytes(ck: Checkpoint) -> bytes:
    """序列化"""
    arrays = _arrays(ck)
    header = CheckpointHeader(
        stage=ck.stage,
        epoch=ck.epoch,
        seed=ck.seed,
        step=ck.optim.step,
        config=ck.config,
        history=ck.history,
        mask_fraction=ck.mask_fraction,
        n_pristine=0 if ck.pristine is None else ck.pristine.n_source_clips,
        arrays=[ArrayEntry(name=n, shape=list(a.shape)) for n, a in arrays],
    )
    head = to_json(header, pretty=False).encode("utf-8")
    parts = [PREFIX.pack(CKPT_MAGIC, CKPT_VERSION, len(head)), head]
    parts += [np.ascontiguousarray(a, dtype="<f8").tobytes() for _, a in arrays]
    body = b"".join(parts)
    return body + CRC.pack(zlib.crc32(body))


def save_checkpoint(ck: Checkpoint, path: StrPath) -> Result[bool, str]:
    """保存检查点"""
    try:
        make_parents(path)
        with open(path, "wb") as f:
            f.write(checkpoint_bytes(ck))
    except OSError as e:
        return Err(f"写入失败: {path}, {e}")
    return Ok(True)


def parse_checkpoint(buf: bytes) -> Result[Checkpoint, str]:
    """反序列化"""
    if len(buf) < PREFIX.size + CRC.size:
        return Err("检查点过短")
    magic, version, head_len = PREFIX.unpack_from(buf)
    if magic != CKPT_MAGIC:
        return Err("检查点魔数错误")
    if version != CKPT_VERSION:
        return Err(f"检查点版本不匹配: {version} != {CKPT_VERSION}")
    body, (crc,) = buf[: -CRC.size], CRC.unpack(buf[-CRC.size :])
    if zlib.crc32(body) != crc:
        return Err("检查点校验失败")

    start = PREFIX.size
    r = from_json(body[start : start + head_len], CheckpointHeader)
    if r.is_err():
        return Err(r.unwrap_err())
    header = r.unwrap()

    pos = start + head_len
    arrays: dict[str, np.ndarray] = {}
    for e in header.arrays:
        n = int(np.prod(e.shape, dtype=np.int64)) * 8
        if pos + n > len(body):
            return Err(f"检查点数据截断: {e.name}")
        arrays[e.name] = np.frombuffer(body, dtype="<f8", count=n // 8, offset=pos).reshape(
            e.shape
        ).astype(np.float64)
        pos += n
    if pos != len(body):
        return Err("检查点含多余数据")

    def group(prefix: str) -> dict[str, np.ndarray]:
        return {k[len(prefix) :]: v for k, v in arrays.items() if k.startswith(prefix)}

    pristine = None
    if "pristine:mu" in arrays:
        pristine = PristineModel(
            mu=arrays["pristine:mu"], cov=arrays["pristine:cov"], n_source_clips=header.n_pristine
        )
    return Ok(
        Checkpoint(
            stage=header.stage,
            epoch=header.epoch,
            seed=header.seed,
            config=header.config,
            params=group("p:"),
            optim=OptimState(m=group("m:"), v=group("v:"), step=header.step),
            pristine=pristine,
            history=header.history,
            mask_fraction=header.mask_fraction,
        )
    )


def load_checkpoint(path: StrPath) -> Result[Checkpoint, str]:
    """加载检查点"""
    try:
        with open(path, "rb") as f:
            buf = f.read()
    except OSError as e:
        return Err(f"读取失败: {path}, {e}")
    return parse_checkpoint(buf)
