"""pydantic对象与JSON文本: 检查点头部, 日志行, 报告摘要"""

from typing import Any, AnyStr, Type, TypeVar

import pydantic_core
from pydantic import BaseModel, ValidationError
from rustshed import Result, Ok, Err, result_shortcut

from vqx.sys.fs import or_ext, StrPath
from vqx.text.io import save_txt, load_txt

JSON_EXT = ".json"

M = TypeVar("M", bound=BaseModel)


def to_json(ob: Any, pretty: bool = True) -> str:
    """序列化, pretty时缩进4格, 否则紧凑单行"""
    return pydantic_core.to_json(ob, indent=4 if pretty else None).decode("utf-8")


def from_json(text: AnyStr, model: Type[M]) -> Result[M, str]:
    try:
        return Ok(model.model_validate_json(text))
    except ValidationError as e:
        return Err(f"{model.__name__} JSON无效: {e.error_count()}处错误")


def save_json(ob: Any, file: StrPath, pretty: bool = True) -> Result[bool, str]:
    return save_txt(to_json(ob, pretty), or_ext(file, JSON_EXT), JSON_EXT)


@result_shortcut
def load_json(file: StrPath, model: Type[M]) -> Result[M, str]:
    return from_json(load_txt(or_ext(file, JSON_EXT)).Q, model)
