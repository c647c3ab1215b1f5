from pathlib import Path
from typing import Optional

from pydantic import BaseModel

from vqx.m.average_meter import AverageMeter
from vqx.sys.fs import StrPath, make_parents
from vqx.text.txt_json import to_json


class StepLog(BaseModel):
    """训练日志行"""

    epoch: int
    step: int
    loss: float
    loss_s: float = 0.0
    loss_c: float = 0.0
    loss_u: float = 0.0
    eps_r: Optional[float] = None
    eps_d: Optional[float] = None
    mask: Optional[int] = None
    rejected: bool = False


class StepWriter:
    """逐行追加JSON的训练日志"""

    def __init__(self, file: Optional[StrPath] = None, append: bool = False):
        self.file = None if file is None else Path(file)
        if self.file is not None:
            make_parents(self.file)
            if not append:
                self.file.write_text("", encoding="utf-8")

    def write(self, log: StepLog) -> None:
        if self.file is None:
            return
        with open(self.file, "a", encoding="utf-8") as f:
            f.write(to_json(log, pretty=False) + "\n")


class EpochMeters:
    """一轮内各损失分量的均值"""

    def __init__(self) -> None:
        self.loss = AverageMeter("loss")
        self.loss_s = AverageMeter("loss_s")
        self.loss_c = AverageMeter("loss_c")
        self.loss_u = AverageMeter("loss_u")
        self.mask = AverageMeter("mask")
        self.rejected = 0

    def update(self, log: StepLog) -> None:
        if log.rejected:
            self.rejected += 1
            return
        self.loss.update(log.loss)
        self.loss_s.update(log.loss_s)
        self.loss_c.update(log.loss_c)
        self.loss_u.update(log.loss_u)
        if log.mask is not None:
            self.mask.update(log.mask)

    def all(self) -> list[AverageMeter]:
        return [self.loss, self.loss_s, self.loss_c, self.loss_u]

    def summary(self) -> str:
        return (
            f"loss={self.loss.mean():.6f} s={self.loss_s.mean():.6f} "
            f"c={self.loss_c.mean():.6f} u={self.loss_u.mean():.6f} "
            f"mask={self.mask.mean():.3f} rejected={self.rejected}"
        )
