import traceback
from typing import Callable, Any

from loguru import logger
from rustshed import Err


class VqxError(Exception):
    """本库异常基类"""

    exit_code = 1


class ShapeError(VqxError):
    """形状/几何不匹配"""


class NumericError(VqxError):
    """数值异常: 非有限值, 求解失败"""

    exit_code = 2


class ConfigError(VqxError):
    """配置错误"""


class DataError(VqxError):
    """数据集/清单错误"""


class VerifyError(VqxError):
    """校验失败: 梯度检查, NaN指标"""

    exit_code = 3


def show_err(e: Any) -> None:
    """显示错误/异常"""
    if isinstance(e, Err):
        msg = f"{e}"
    elif isinstance(e, VqxError):
        msg = f"{type(e).__name__}({e})"
    elif isinstance(e, AssertionError):
        msg = f"AssertionError({e.args})"
    else:
        msg = f"UnknownError({repr(e)})"
    logger.error(msg)


def exit_code_of(e: BaseException) -> int:
    """异常对应的进程退出码"""
    if isinstance(e, VqxError):
        return e.exit_code
    if isinstance(e, FloatingPointError):
        return NumericError.exit_code
    return 1


def catch_show_err(fun: Callable[[], int], verbose: bool = False) -> int:
    """捕获并显示异常, 返回退出码"""

    # 捕获SystemExit/KeyboardInterrupt/GeneratorExit外异常
    try:
        return fun()
    except Exception as e:
        show_err(e)
        if verbose:
            logger.debug(traceback.format_exc())
        return exit_code_of(e)
