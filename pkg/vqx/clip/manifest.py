"""数据集清单

每行一条记录, 字段以TAB分隔, 顺序固定, 空值写作'-':
    scene_id  kind  level  split  label  hidden_label  clip_path
clip_path 相对清单所在目录。
"""

import math
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
from loguru import logger
from parse import parse  # type: ignore
from pydantic import BaseModel
from rustshed import Result, Ok, Err, result_shortcut

from vqx.clip.codec import RawClip, save_clip, load_clip, CLIP_EXT
from vqx.clip.distort import DistortionKind, DistortionSpec, synthesize_distortion, label_of_level
from vqx.m.rand import derive_seed, make_rng
from vqx.sys.fs import StrPath
from vqx.text.io import save_lines, load_lines
from vqx.util.err import DataError

MANIFEST_FIELDS = "scene_id\tkind\tlevel\tsplit\tlabel\thidden_label\tclip_path"
LINE_FORMAT = "{scene_id:d}\t{kind}\t{level:d}\t{split}\t{label}\t{hidden}\t{path}"
NONE_MARK = "-"


class SplitTag(str, Enum):
    """记录所属集合"""

    PRETRAIN = "pretrain"
    LABELLED = "labelled"
    UNLABELLED = "unlabelled"
    PRISTINE = "pristine"
    TEST = "test"


class ClipRecord(BaseModel):
    """清单记录"""

    scene_id: int
    """场景ID, 同一场景的各失真版本共享"""
    kind: Optional[DistortionKind] = None
    """失真类别, 无失真为None"""
    level: int = 0
    """失真级别"""
    clip_path: str
    """片段文件(相对路径)"""
    label: Optional[float] = None
    """质量标签(MOS)"""
    hidden_label: Optional[float] = None
    """隐藏标签, 仅评估时使用"""
    split_tag: SplitTag = SplitTag.PRETRAIN
    """集合标记"""

    def spec(self) -> Optional[DistortionSpec]:
        """失真规格"""
        return None if self.kind is None else DistortionSpec(kind=self.kind, level=self.level)

    def eval_label(self) -> Optional[float]:
        """评估用标签: 隐藏标签优先"""
        return self.hidden_label if self.hidden_label is not None else self.label

    def to_line(self) -> str:
        """序列化为一行"""

        def opt(v: Optional[float]) -> str:
            return NONE_MARK if v is None else repr(float(v))

        kind = NONE_MARK if self.kind is None else self.kind.value
        cols = [str(self.scene_id), kind, str(self.level), self.split_tag.value]
        cols += [opt(self.label), opt(self.hidden_label), self.clip_path]
        return "\t".join(cols)

    @staticmethod
    def from_line(line: str) -> Result["ClipRecord", str]:
        """从一行解析"""
        r = parse(LINE_FORMAT, line)
        if r is None:
            return Err(f"清单行格式错误: {line!r}")

        def opt(s: str) -> Optional[float]:
            return None if s == NONE_MARK else float(s)

        try:
            rec = ClipRecord(
                scene_id=r["scene_id"],
                kind=None if r["kind"] == NONE_MARK else DistortionKind(r["kind"]),
                level=r["level"],
                split_tag=SplitTag(r["split"]),
                label=opt(r["label"]),
                hidden_label=opt(r["hidden"]),
                clip_path=r["path"],
            )
        except ValueError as e:
            return Err(f"清单行取值错误: {line!r}, {e}")
        return Ok(rec)


class DatasetManifest(BaseModel):
    """数据集清单"""

    records: list[ClipRecord] = []
    """记录"""
    root: str = "."
    """片段相对路径的根目录"""

    def __len__(self) -> int:
        return len(self.records)

    def clip_file(self, rec: ClipRecord) -> Path:
        """记录对应的片段文件"""
        return Path(self.root) / rec.clip_path

    def select(self, *tags: SplitTag) -> "DatasetManifest":
        """按集合标记筛选"""
        return self.derive([r for r in self.records if r.split_tag in tags])

    def derive(self, records: list[ClipRecord]) -> "DatasetManifest":
        """同根目录的新清单"""
        return DatasetManifest(records=records, root=self.root)

    def scene_ids(self) -> list[int]:
        """场景ID, 有序去重"""
        return sorted({r.scene_id for r in self.records})

    def by_scene(self) -> dict[int, list[ClipRecord]]:
        """按场景分组"""
        groups: dict[int, list[ClipRecord]] = {}
        for r in self.records:
            groups.setdefault(r.scene_id, []).append(r)
        return groups

    def check(self) -> Result[bool, str]:
        """检查清单约束"""
        paths = [r.clip_path for r in self.records]
        if len(set(paths)) != len(paths):
            return Err("片段路径重复")
        for r in self.records:
            if r.split_tag == SplitTag.LABELLED and (r.label is None or not math.isfinite(r.label)):
                return Err(f"有标签记录缺少有效标签: {r.clip_path}")
            if r.split_tag == SplitTag.PRISTINE and r.kind is not None:
                return Err(f"原始记录不能带失真: {r.clip_path}")
        return Ok(True)


def save_manifest(manifest: DatasetManifest, file: StrPath) -> Result[bool, str]:
    """保存清单, 根目录取文件所在目录"""
    r = manifest.check()
    if r.is_err():
        return r
    lines = ["# " + MANIFEST_FIELDS] + [rec.to_line() for rec in manifest.records]
    return save_lines(lines, file)


@result_shortcut
def load_manifest(file: StrPath) -> Result[DatasetManifest, str]:
    """加载清单"""
    records = [ClipRecord.from_line(s).Q for s in load_lines(file).Q]
    m = DatasetManifest(records=records, root=str(Path(file).parent))
    m.check().Q
    return Ok(m)


class ClipCache:
    """片段缓存, 按文件路径"""

    def __init__(self, manifest: DatasetManifest):
        self.manifest = manifest
        self._clips: dict[str, RawClip] = {}

    def get(self, rec: ClipRecord) -> RawClip:
        """获取记录对应片段"""
        clip = self._clips.get(rec.clip_path)
        if clip is None:
            r = load_clip(self.manifest.clip_file(rec))
            if r.is_err():
                raise DataError(r.unwrap_err())
            clip = r.unwrap()
            self._clips[rec.clip_path] = clip
        return clip

    def put(self, rec: ClipRecord, clip: RawClip) -> None:
        """放入片段"""
        self._clips[rec.clip_path] = clip


def clip_name(scene_id: int, spec: Optional[DistortionSpec]) -> str:
    """片段文件名"""
    tail = "pristine" if spec is None else f"{spec.kind.value}_{spec.level}"
    return f"clips/s{scene_id:04d}_{tail}{CLIP_EXT}"


def distortion_seed(seed: int, scene_id: int, spec: DistortionSpec) -> int:
    """失真种子: 同场景同类别的各级别共享"""
    return derive_seed(seed, scene_id, spec.kind.index)


def make_label(seed: int, scene_id: int, spec: DistortionSpec, noise: float) -> float:
    """合成标签, 可带种子噪声"""
    y = label_of_level(spec.level)
    if noise > 0:
        rng = make_rng(seed, scene_id, spec.kind.index, spec.level, 1)
        y += float(rng.normal(0.0, noise))
    return y


def build_pretrain_set(
    scenes: list[RawClip],
    specs: list[DistortionSpec],
    seed: int,
    out_dir: StrPath,
    label_noise: float = 0.0,
    with_pristine: bool = False,
    first_scene_id: int = 0,
) -> DatasetManifest:
    """每个场景每个规格生成一条失真记录, 片段写入out_dir"""
    if not scenes:
        raise DataError("场景列表为空")
    if not specs:
        raise DataError("失真规格为空")

    root = Path(out_dir)
    records: list[ClipRecord] = []
    for i, scene in enumerate(scenes):
        sid = first_scene_id + i
        if with_pristine:
            rec = ClipRecord(
                scene_id=sid, clip_path=clip_name(sid, None), split_tag=SplitTag.PRISTINE
            )
            _write(root, rec, scene)
            records.append(rec)
        for spec in specs:
            clip = synthesize_distortion(scene, spec, distortion_seed(seed, sid, spec))
            rec = ClipRecord(
                scene_id=sid,
                kind=spec.kind,
                level=spec.level,
                clip_path=clip_name(sid, spec),
                label=make_label(seed, sid, spec, label_noise),
            )
            _write(root, rec, clip)
            records.append(rec)

    logger.info(f"合成数据集: {len(scenes)}个场景, {len(records)}条记录 -> {root}")
    return DatasetManifest(records=records, root=str(root))


def _write(root: Path, rec: ClipRecord, clip: RawClip) -> None:
    r = save_clip(clip, root / rec.clip_path)
    if r.is_err():
        raise DataError(r.unwrap_err())


def labels_of(manifest: DatasetManifest) -> np.ndarray:
    """评估标签向量"""
    ys = [r.eval_label() for r in manifest.records]
    if any(y is None for y in ys):
        raise DataError("存在缺少标签的记录")
    return np.array(ys, dtype=np.float64)
