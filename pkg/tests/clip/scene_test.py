import numpy as np

from vqx.clip.scene import *


def test_make_scene() -> None:
    a = make_scene(1, 6, 24, 20)
    assert a.shape == (6, 24, 20, 3)
    assert 0.0 <= a.frames.min() and a.frames.max() <= 1.0
    assert a.same_frames(make_scene(1, 6, 24, 20))
    assert not a.same_frames(make_scene(2, 6, 24, 20))
    # 有运动
    assert not np.array_equal(a.frames[0], a.frames[-1])


def test_constant_clip() -> None:
    c = constant_clip(0.25, 2, 3, 4)
    assert c.shape == (2, 3, 4, 3)
    assert np.all(c.frames == np.float32(0.25))
