from loguru import logger

from vqx.m.average_meter import AverageMeter


class ProgressMeter:
    """步进度: `前缀[步/总数]` 加各计量值, 写到debug日志"""

    def __init__(self, total: int, meters: list[AverageMeter], prefix: str = ""):
        width = len(str(total))
        self.head = prefix + "[{:" + str(width) + "d}/" + str(total) + "]"
        self.meters = meters

    def line(self, step: int) -> str:
        return "\t".join([self.head.format(step)] + [str(m) for m in self.meters])

    def display(self, step: int) -> None:
        logger.debug(self.line(step))
