import numpy as np

from vqx.clip.codec import RawClip
from vqx.clip.scene import make_scene
from vqx.sample.fragment import *
from vqx.util.err import ShapeError

CFG = FragmentConfig(grid_h=3, grid_w=2, patch=4, n_frames=5)


def test_fragment_config() -> None:
    assert (CFG.height, CFG.width, CFG.n_cells) == (12, 8, 6)


def test_qcs_sample() -> None:
    clip = make_scene(1, 8, 30, 20)
    f = qcs_sample(clip, CFG, 3)
    assert f.frames.shape == (5, 12, 8, 3)

    g = f.geometry
    assert (g.cell_h, g.cell_w) == (10, 10)
    assert 0 <= g.t0 <= 3
    for k, (y0, x0, y1, x1) in enumerate(g.rects()):
        i, j = divmod(k, 2)
        assert i * 10 <= y0 and y1 <= (i + 1) * 10
        assert j * 10 <= x0 and x1 <= (j + 1) * 10

    # 只做索引, 不插值
    y0, x0, _, _ = g.rects()[5]
    src = clip.frames[g.t0 : g.t0 + 5, y0 : y0 + 4, x0 : x0 + 4]
    assert np.array_equal(f.frames[:, 8:12, 4:8], src)


def test_qcs_deterministic() -> None:
    clip = make_scene(1, 8, 30, 20)
    a, b = qcs_sample(clip, CFG, 3), qcs_sample(clip, CFG, 3)
    assert a.geometry.same_as(b.geometry)
    assert np.array_equal(a.frames, b.frames)


def test_qcs_pair_independent() -> None:
    clip = make_scene(1, 16, 60, 40)
    a, b = qcs_pair(clip, CFG, 3)
    assert not a.geometry.same_as(b.geometry)


def test_content_aligned() -> None:
    clips = [make_scene(i, 8, 30, 20) for i in range(3)]
    views1, views2 = content_aligned_pair(clips, CFG, 7)
    assert len(views1) == len(views2) == 3
    assert all(v.geometry.same_as(views1[0].geometry) for v in views1)
    assert all(v.geometry.same_as(views2[0].geometry) for v in views2)
    assert content_aligned_sample([], CFG, 1) == []


def test_content_aligned_shape_mismatch() -> None:
    try:
        content_aligned_sample([make_scene(0, 8, 30, 20), make_scene(0, 8, 40, 20)], CFG, 1)
        assert False
    except ShapeError:
        pass


def test_clip_too_small() -> None:
    try:
        qcs_sample(RawClip(frames=np.zeros((8, 10, 20, 3))), CFG, 1)
        assert False
    except ShapeError:
        pass
    try:
        qcs_sample(RawClip(frames=np.zeros((4, 30, 20, 3))), CFG, 1)
        assert False
    except ShapeError:
        pass


def test_cut_mismatch() -> None:
    g = sample_geometry((8, 30, 20, 3), CFG, 1)
    try:
        cut(make_scene(0, 8, 40, 20), g)
        assert False
    except ShapeError:
        pass


def test_qcs_pair_collision_rate() -> None:
    clip = make_scene(2, 8, 30, 20)
    same = 0
    for seed in range(1000):
        a, b = qcs_pair(clip, CFG, seed)
        same += a.geometry.same_as(b.geometry)
    assert same < 10
