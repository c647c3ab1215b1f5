import numpy as np

from vqx.util.algo import lookup


def random_split_n(rng: np.random.Generator, n: int, sizes: list[int]) -> list[list[int]]:
    """按数量随机分割整数集合[0,n-1], 剩余部分作为最后一片"""
    assert sum(sizes) <= n
    array = rng.permutation(n)

    start = 0
    slices: list[list[int]] = []
    for size in sizes:
        slices.append(sorted(array[start : start + size].tolist()))
        start += size
    slices.append(sorted(array[start:].tolist()))
    return slices


def random_split_array(rng: np.random.Generator, arr: list, sizes: list[int]) -> list[list]:
    """按数量随机分割数组"""
    slices = random_split_n(rng, len(arr), sizes)
    return [lookup(s, arr) for s in slices]


def group(arr: list, group_member: int) -> list[list]:
    """分组"""
    total = len(arr)
    return [arr[i : i + group_member] for i in range(0, total, group_member)]


def cycle_take(arr: list, start: int, n: int) -> list:
    """从start起循环取n个元素"""
    if not arr:
        return []
    return [arr[(start + i) % len(arr)] for i in range(n)]
