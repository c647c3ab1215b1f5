import math


class AverageMeter:
    """累计均值: 最近值与加权平均"""

    def __init__(self, name: str, fmt: str = ":.6f"):
        self.name = name
        self.fmt = fmt
        self.val = 0.0
        self.sum = 0.0
        self.count = 0

    def reset(self) -> None:
        self.val, self.sum, self.count = 0.0, 0.0, 0

    def update(self, val: float, n: int = 1) -> None:
        """累计n个相同的值"""
        self.val = val
        self.sum += val * n
        self.count += n

    @property
    def avg(self) -> float:
        return self.sum / self.count if self.count else 0.0

    def mean(self) -> float:
        """平均值, 无数据时为NaN"""
        return self.avg if self.count else math.nan

    def __str__(self) -> str:
        fmt = "{} {" + self.fmt + "} ({" + self.fmt + "})"
        return fmt.format(self.name, self.val, self.avg)
