from pathlib import Path
from typing import Union

StrPath = Union[str, Path]
"""str或Path"""


def make_parents(path: StrPath) -> Path:
    """确保文件所在目录存在, 返回该目录"""
    folder = Path(path).parent
    folder.mkdir(parents=True, exist_ok=True)
    return folder


def or_ext(path: StrPath, ext: str) -> Path:
    """无扩展名时补上ext"""
    p = Path(path)
    return p.with_suffix(ext) if ext and p.suffix == "" else p
