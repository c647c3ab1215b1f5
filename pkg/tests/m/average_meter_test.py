import math

from vqx.m.average_meter import *


def test_average_meter() -> None:
    m = AverageMeter("loss")
    assert math.isnan(m.mean())
    m.update(1.0)
    m.update(3.0)
    assert m.mean() == 2.0
    assert m.count == 2
    m.update(5.0, n=2)
    assert m.mean() == 3.5
    assert str(m).startswith("loss 5.000000")
    m.reset()
    assert m.count == 0
