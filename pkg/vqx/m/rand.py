import os
from typing import Any, Optional

import numpy as np

SEED_ENV = "VQX_SEED"
"""默认种子的环境变量"""

U64_MASK = (1 << 64) - 1


def default_seed(fallback: int = 0) -> int:
    """从环境变量获取默认种子"""
    s = os.environ.get(SEED_ENV)
    return int(s) & U64_MASK if s else fallback


def derive_seed(seed: int, *keys: int) -> int:
    """由主种子和路径键派生子种子(u64)"""
    ss = np.random.SeedSequence([seed & U64_MASK, *[k & U64_MASK for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """创建确定性随机数发生器"""
    return np.random.default_rng(derive_seed(seed, *keys))


def random_choices(
    rng: np.random.Generator, arr: list[Any], n: int, excluded: Optional[Any] = None
) -> list[Any]:
    """数组中选出指定数量的其他元素"""
    arr1 = [a for a in arr if excluded is None or a != excluded]
    idx = rng.permutation(len(arr1))[: min(n, len(arr1))]
    return [arr1[i] for i in idx]
