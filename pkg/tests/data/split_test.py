from vqx.data.split import *
from vqx.m.rand import make_rng


def test_random_split_n() -> None:
    slices = random_split_n(make_rng(0), 10, [3, 4])
    assert [len(s) for s in slices] == [3, 4, 3]
    assert sorted(sum(slices, [])) == list(range(10))


def test_random_split_array() -> None:
    arr = list("abcdefgh")
    parts = random_split_array(make_rng(1), arr, [2, 2])
    assert [len(p) for p in parts] == [2, 2, 4]
    assert sorted(sum(parts, [])) == arr
    assert parts == random_split_array(make_rng(1), arr, [2, 2])


def test_group() -> None:
    assert group([1, 2, 3, 4, 5], 2) == [[1, 2], [3, 4], [5]]
    assert group([], 3) == []


def test_cycle_take() -> None:
    assert cycle_take([1, 2, 3], 2, 4) == [3, 1, 2, 3]
    assert cycle_take([], 0, 3) == []
