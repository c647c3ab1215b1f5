import tempfile
from pathlib import Path

from vqx.clip.distort import DistortionKind
from vqx.train.cfg import *


def test_defaults() -> None:
    cfg = RunConfig(seed=0)
    assert (cfg.lr, cfg.weight_decay, cfg.epochs, cfg.tau) == (1e-4, 0.05, 30, 10.0)
    assert (cfg.lambda_c, cfg.lambda_u) == (1.0, 1.0)
    assert (cfg.grid_h, cfg.grid_w, cfg.patch, cfg.n_frames) == (7, 7, 32, 32)
    cfg.check()
    assert len(cfg.distortion_specs()) == 48


def test_apply_overrides() -> None:
    cfg = apply_overrides(RunConfig(seed=0), {"lr": "0.01", "ridge": "0.5", "no_knowledge": "true"})
    assert cfg.lr == 0.01 and cfg.ridge == 0.5 and cfg.no_knowledge
    assert apply_overrides(cfg, {"ridge": "-"}).ridge is None

    for kv in [{"nothing": "1"}, {"lr": "-1"}, {"kinds": "blur"}, {"levels": "5"}]:
        try:
            apply_overrides(cfg, kv)
            assert False
        except ConfigError:
            pass


def test_preset() -> None:
    cfg = preset_config("desk", seed=3)
    assert cfg.seed == 3 and cfg.n_scenes == 8
    cfg.check()
    try:
        preset_config("nothing")
        assert False
    except ConfigError:
        pass


def test_distortion_specs() -> None:
    cfg = apply_overrides(RunConfig(seed=0), {"kinds": "resample, frame_drop", "levels": "1,4"})
    specs = cfg.distortion_specs()
    assert [(s.kind, s.level) for s in specs] == [
        (DistortionKind.RESAMPLE, 1),
        (DistortionKind.RESAMPLE, 4),
        (DistortionKind.FRAME_DROP, 1),
        (DistortionKind.FRAME_DROP, 4),
    ]


def test_check() -> None:
    for kv in [
        {"t_stride": 3},
        {"channels": 2000},
        {"labelled_frac": 0.5, "unlabelled_frac": 0.6},
        {"patch": 64},
    ]:
        try:
            apply_overrides(RunConfig(seed=0), kv).check()
            assert False
        except ConfigError:
            pass


def test_save_load() -> None:
    cfg = apply_overrides(preset_config("desk", seed=5), {"ridge": 0.1, "cosine_contrastive": True})
    f = Path(tempfile.mkdtemp(), "run.cfg")
    assert save_run_config(cfg, f).unwrap()
    assert load_run_config(f).unwrap() == cfg


def test_parse_kv() -> None:
    assert parse_kv(["a = 1", "b = x y"]).unwrap() == {"a": "1", "b": "x y"}
    assert parse_kv(["a: 1"]).is_err()
    assert load_run_config("/nonexistent/vqx.cfg").is_err()


def test_describe_keys() -> None:
    s = describe_keys()
    assert "  lr = 0.0001  [desk: 0.001]" in s
    assert "  seed = <VQX_SEED|0>" in s
