import math
from typing import Any

import numpy as np

from tests.tiny_data import tiny_dataset
from vqx.ad.tensor import grad
from vqx.exp.data import pristine_of
from vqx.exp.protocol import protocol_split
from vqx.nn.init import init_encoder
from vqx.nn.param import params_equal, to_tensors
from vqx.train.sslvqa import *


Setup = tuple[RunConfig, DatasetManifest, DatasetManifest, DatasetManifest, Params]


def _setup(**kv: Any) -> Setup:
    cfg, m = tiny_dataset()
    cfg = cfg.model_copy(update=kv)
    lab, unl, _ = protocol_split(m, cfg, 0)
    theta = init_encoder(cfg.encoder_config(), 5)
    return cfg, lab, unl, pristine_of(m), theta


def test_labelled_batches() -> None:
    cfg, *_ = _setup()
    b = labelled_batches(9, cfg, 0)
    assert [len(x) for x in b] == [4, 5]
    assert sorted(i for x in b for i in x) == list(range(9))
    assert [len(x) for x in labelled_batches(6, cfg, 0)] == [4, 2]


def test_unlabelled_batch() -> None:
    cfg, *_ = _setup()
    assert unlabelled_batch(0, cfg, 0, 0) == []
    a = unlabelled_batch(6, cfg, 0, 0)
    b = unlabelled_batch(6, cfg, 0, 1)
    assert len(a) == 4 and len(b) == 4
    assert set(a + b) == set(range(6))
    assert len(unlabelled_batch(2, cfg, 0, 0)) == 2


def test_initial_models() -> None:
    cfg, _, _, _, theta = _setup()
    m = initial_models(theta, cfg)
    assert params_equal(m.theta_r, theta) and params_equal(m.theta_d, theta)
    assert params_equal(Models.from_flat(m.flat()).phi, m.phi)


def test_refresh_pristine() -> None:
    cfg, _, _, pristine, theta = _setup()
    p = refresh_pristine(theta, pristine, ClipCache(pristine), cfg, 0)
    assert p.n_source_clips == 4
    assert p.mu.shape == (4,) and p.cov.shape == (4, 4)
    try:
        refresh_pristine(theta, pristine.derive([]), ClipCache(pristine), cfg, 0)
        assert False
    except DataError:
        pass


def test_train_sslvqa() -> None:
    cfg, lab, unl, pristine, theta = _setup()
    r = train_sslvqa(lab, unl, pristine, theta, cfg)
    assert r.epoch == 1 and len(r.history) == 1 and math.isfinite(r.history[0])
    assert len(r.mask_fraction) == 1 and 0.0 <= r.mask_fraction[0] <= 1.0
    assert r.models.pristine is not None
    assert not params_equal(r.models.theta_r, theta)

    back = SslResult.from_checkpoint(r.to_checkpoint())
    assert params_equal(back.models.flat(), r.models.flat())
    assert back.mask_fraction == r.mask_fraction


def test_train_resume() -> None:
    cfg, lab, unl, pristine, theta = _setup()
    cfg2 = cfg.model_copy(update={"epochs": 2})
    full = train_sslvqa(lab, unl, pristine, theta, cfg2)
    first = train_sslvqa(lab, unl, pristine, theta, cfg)
    resumed = train_sslvqa(
        lab, unl, pristine, None, cfg2, resume=SslResult.from_checkpoint(first.to_checkpoint())
    )
    assert params_equal(full.models.flat(), resumed.models.flat())
    assert full.history == resumed.history
    assert full.mask_fraction == resumed.mask_fraction and len(resumed.mask_fraction) == 2


def test_ablations() -> None:
    for kv in [{"no_consistency": True}, {"no_knowledge": True}]:
        cfg, lab, unl, pristine, theta = _setup(**kv)
        r = train_sslvqa(lab, unl, pristine, theta, cfg)
        assert math.isfinite(r.history[0])
        if "no_knowledge" in kv:
            assert r.mask_fraction == [0.0]


def test_train_labels_only() -> None:
    cfg, lab, _, pristine, theta = _setup()
    r = train_labels_only(lab, pristine, theta, cfg)
    assert r.mask_fraction == [0.0]
    assert math.isfinite(r.history[0])


def test_train_invalid() -> None:
    cfg, lab, unl, pristine, theta = _setup()
    for bad in [lab.derive(lab.records[:1]), unl]:
        try:
            train_sslvqa(bad, unl, pristine, theta, cfg)
            assert False
        except DataError:
            pass
    try:
        train_sslvqa(lab, unl, pristine, None, cfg)
        assert False
    except DataError:
        pass


def test_finetune() -> None:
    cfg, lab, unl, pristine, theta = _setup()
    ck = train_sslvqa(lab, unl, pristine, theta, cfg).to_checkpoint()

    same = finetune(ck, lab, pristine, cfg.model_copy(update={"finetune_epochs": 0}))
    assert params_equal(same.models.flat(), ck.params)
    assert same.config.finetuned and not ck.config.finetuned

    tuned = finetune(ck, lab, pristine, cfg)
    assert tuned.epoch == 1
    assert tuned.config.finetuned
    assert not params_equal(tuned.models.flat(), ck.params)
    assert np.all(np.isfinite(tuned.models.phi["fc1.w"]))


def test_no_unlabelled_matches_labels_only() -> None:
    for kv in [{"batch_unlabelled": 0}, {"batch_unlabelled": 0, "lambda_u": 0.0}]:
        cfg, lab, unl, pristine, theta = _setup(**kv)
        a = train_sslvqa(lab, unl, pristine, theta, cfg)
        b = train_labels_only(lab, pristine, theta, cfg)
        assert params_equal(a.models.flat(), b.models.flat())
        assert a.history == b.history and a.mask_fraction == b.mask_fraction == [0.0]


def test_every_parameter_gets_gradient() -> None:
    cfg, lab, unl, pristine, theta = _setup()
    models = initial_models(theta, cfg)
    pris = refresh_pristine(theta, pristine, ClipCache(pristine), cfg, 0)
    lab_clips = [ClipCache(lab).get(r) for r in lab.records[:4]]
    unl_clips = [ClipCache(unl).get(r) for r in unl.records[:4]]
    labels = np.array([r.label for r in lab.records[:4]], dtype=np.float64)

    t = to_tensors(models.flat())
    loss_fn = ssl_loss_fn(lab_clips, labels, unl_clips, pris, cfg, 1, StepParts())
    grads = grad(loss_fn(t), t.values())
    dead = [k for k, g in zip(t, grads) if not np.any(g != 0)]
    assert dead == []
