import numpy as np

from vqx.clip.codec import RawClip
from vqx.clip.distort import *
from vqx.util.err import ShapeError


def _clip() -> RawClip:
    rng = np.random.default_rng(3)
    return RawClip(frames=rng.uniform(0.2, 0.8, (16, 32, 32, 3)))


def test_catalog() -> None:
    assert len(DistortionKind) == 12
    assert len(all_specs()) == 48
    assert all(len(v) == MAX_LEVEL for v in LEVELS.values())
    assert DistortionKind.FRAME_DROP.temporal
    assert not DistortionKind.GAUSSIAN_BLUR.temporal


def test_label_of_level() -> None:
    assert label_of_level(0) == 1.0
    assert label_of_level(2) == 0.5
    assert label_of_level(4) == 0.0


def test_level_zero_identity() -> None:
    clip = _clip()
    for k in DistortionKind:
        assert synthesize_distortion(clip, DistortionSpec(kind=k, level=0), 5).same_frames(clip)


def test_deterministic() -> None:
    clip = _clip()
    for k in DistortionKind:
        spec = DistortionSpec(kind=k, level=3)
        a = synthesize_distortion(clip, spec, 9)
        b = synthesize_distortion(clip, spec, 9)
        assert a.same_frames(b)
        assert a.shape == clip.shape
        assert 0.0 <= a.frames.min() and a.frames.max() <= 1.0


def test_noise_seed() -> None:
    clip = _clip()
    spec = DistortionSpec(kind=DistortionKind.GAUSSIAN_NOISE, level=2)
    assert not synthesize_distortion(clip, spec, 1).same_frames(synthesize_distortion(clip, spec, 2))


def test_noise_mse_increasing() -> None:
    clip = _clip()
    errs = [
        mse(clip, synthesize_distortion(clip, DistortionSpec(kind=DistortionKind.GAUSSIAN_NOISE, level=lv), 7))
        for lv in range(1, MAX_LEVEL + 1)
    ]
    assert all(a < b for a, b in zip(errs, errs[1:]))


def test_mse_monotone() -> None:
    clip = _clip()
    for k in DistortionKind:
        errs = [
            mse(clip, synthesize_distortion(clip, DistortionSpec(kind=k, level=lv), 7))
            for lv in range(MAX_LEVEL + 1)
        ]
        assert errs[0] == 0.0
        for a, b in zip(errs, errs[1:]):
            assert b >= a - 1e-9, f"{k}: {errs}"


def test_distort_region() -> None:
    clip = _clip()
    mask = np.zeros((32, 32), dtype=bool)
    mask[:, :16] = True
    spec = DistortionSpec(kind=DistortionKind.GAUSSIAN_NOISE, level=4)
    d = distort_region(clip, spec, 1, mask)
    assert np.array_equal(d.frames[:, :, 16:], clip.frames[:, :, 16:])
    assert not np.array_equal(d.frames[:, :, :16], clip.frames[:, :, :16])

    try:
        distort_region(clip, spec, 1, mask[:8])
        assert False
    except ShapeError:
        pass
