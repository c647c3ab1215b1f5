from vqx.m.average_meter import AverageMeter
from vqx.ui.progress_meter import *


def test_progress_line() -> None:
    m = AverageMeter("loss", ":.2f")
    m.update(0.5)
    p = ProgressMeter(12, [m], prefix="Epoch")
    s = p.line(3)
    assert s.startswith("Epoch[ 3/12]")
    assert "loss 0.50 (0.50)" in s
    p.display(3)
