from vqx.util.algo import *


def test_lookup() -> None:
    assert lookup([2, 0], ["a", "b", "c"]) == ["c", "a"]
    assert lookup([], [1]) == []


def test_lower_median() -> None:
    assert lower_median([0.5, 0.7, 0.6]) == 0.6
    assert lower_median([3.0]) == 3.0
    assert lower_median([4.0, 1.0, 3.0, 2.0]) == 2.0
