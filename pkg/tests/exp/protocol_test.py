from tests.tiny_data import tiny_dataset
from vqx.exp.protocol import *
from vqx.nn.init import init_encoder


def test_split_sizes() -> None:
    cfg, _ = tiny_dataset()
    assert split_sizes(32, cfg) == (6, 19)
    assert split_sizes(5, cfg) == (2, 3)


def test_protocol_split() -> None:
    cfg, m = tiny_dataset()
    lab, unl, test = protocol_split(m, cfg, 0)
    assert (len(lab), len(unl), len(test)) == (6, 19, 7)
    again = protocol_split(m, cfg, 0)
    assert again[2].records == test.records
    other = protocol_split(m, cfg, 1)
    assert other[2].records != test.records

    lab, unl, _ = protocol_split(m, cfg, 0, n_labelled=4, n_unlabelled=2)
    assert (len(lab), len(unl)) == (4, 2)


def test_variant_config() -> None:
    cfg, _ = tiny_dataset()
    assert variant_config(cfg, Variant.NO_KNOWLEDGE).no_knowledge
    assert not variant_config(cfg, Variant.NO_KNOWLEDGE).no_consistency
    assert variant_config(cfg, Variant.NO_CONSISTENCY).no_consistency
    assert not variant_config(cfg, Variant.FULL).no_knowledge


def test_run_protocol() -> None:
    cfg, m = tiny_dataset()
    theta = init_encoder(cfg.encoder_config(), 1)
    r = run_protocol(m, theta, cfg, Variant.LABELS_ONLY)
    assert len(r.reports) == cfg.n_splits
    assert r.summary.n_splits == cfg.n_splits
    assert (r.n_labelled, r.n_unlabelled) == (6, 19)
    assert all(rep.summary.n == 7 for rep in r.reports)

    lines = ablation_lines({Variant.LABELS_ONLY: r})
    assert lines[0] == "variant\tsrocc\tplcc\tsplits"
    assert lines[1].startswith("labels_only\t")


def test_budget_sweep() -> None:
    cfg, m = tiny_dataset()
    theta = init_encoder(cfg.encoder_config(), 1)
    one = cfg.model_copy(update={"n_splits": 1})
    points = budget_sweep(m, theta, one, [3], [4])
    assert [(p.n_labelled, p.n_unlabelled) for p in points] == [(3, 19), (6, 4)]
