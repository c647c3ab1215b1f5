import math

import numpy as np

from tests.tiny_data import tiny_dataset
from vqx.clip.distort import DistortionKind, DistortionSpec
from vqx.clip.manifest import ClipCache
from vqx.exp.data import pristine_of
from vqx.exp.protocol import protocol_split
from vqx.exp.qsanity import *
from vqx.nn.init import init_encoder
from vqx.train.sslvqa import train_labels_only


def test_half_mask() -> None:
    m = half_mask(2, 5)
    assert m[:, :2].all() and not m[:, 2:].any()
    assert (half_mask(2, 5, left=False) == ~m).all()


def test_lower_on_distorted() -> None:
    assert HalfContrast(distorted=0.1, clean=0.2).lower_on_distorted
    assert not HalfContrast(distorted=0.3, clean=0.2).lower_on_distorted


def test_half_contrast() -> None:
    cfg, m = tiny_dataset()
    lab, _, _ = protocol_split(m, cfg, 0)
    p = pristine_of(m)
    models = train_labels_only(lab, p, init_encoder(cfg.encoder_config(), 1), cfg).models

    sign = orient_map(models, lab, cfg)
    assert sign in (1.0, -1.0)

    clip = ClipCache(p).get(p.records[0])
    spec = DistortionSpec(kind=DistortionKind.GAUSSIAN_NOISE, level=4)
    h = half_contrast(clip, spec, models, cfg, seed=3, sign=sign)
    assert math.isfinite(h.distorted) and math.isfinite(h.clean)
    flipped = half_contrast(clip, spec, models, cfg, seed=3, sign=-sign)
    assert np.isclose(flipped.distorted, -h.distorted)
