from typing import Any, Sequence


def lookup(indexes: Sequence[int], tab: Sequence[Any]) -> list:
    """从表中查出所有索引对应的值"""
    return [tab[i] for i in indexes]


def lower_median(values: Sequence[float]) -> float:
    """中位数, 偶数个时取较小的中间值"""
    assert len(values) > 0
    s = sorted(values)
    return s[(len(s) - 1) // 2]
