import math
import tempfile
from pathlib import Path

import numpy as np

from vqx.clip.manifest import ClipRecord, DatasetManifest, SplitTag
from vqx.eval.infer import Prediction
from vqx.eval.report import *
from vqx.text.txt_json import from_json


def _test_set(n: int = 4) -> DatasetManifest:
    recs = [
        ClipRecord(scene_id=i, clip_path=f"c{i}.vqc", hidden_label=i / n, split_tag=SplitTag.TEST)
        for i in range(n)
    ]
    return DatasetManifest(records=recs)


def _preds(qr: list[float], qd: list[float]) -> list[Prediction]:
    return [Prediction(q_r=a, q_d=b, q=(a + b) / 2) for a, b in zip(qr, qd)]


def _report(s: float) -> EvalReport:
    return EvalReport(summary=EvalSummary(srocc=s, plcc=s, srocc_r=s, srocc_d=s))


def test_report_from_predictions() -> None:
    r = report_from_predictions(_test_set(), _preds([0.1, 0.2, 0.3, 0.4], [0.9, 0.7, 0.8, 0.6]))
    s = r.summary
    assert s.n == 4
    assert s.srocc_r == 1.0
    assert np.isclose(s.srocc_d, -0.8)
    assert not r.has_nan()
    assert r.clips[2].label == 0.5 and r.clips[2].clip_path == "c2.vqc"


def test_report_nan() -> None:
    r = report_from_predictions(_test_set(), _preds([0.5] * 4, [0.5] * 4))
    assert r.has_nan()


def test_report_invalid() -> None:
    for m, preds in [
        (_test_set(1), _preds([0.1], [0.1])),
        (_test_set(3), _preds([0.1, 0.2], [0.1, 0.2])),
    ]:
        try:
            report_from_predictions(m, preds)
            assert False
        except DataError:
            pass


def test_save_report() -> None:
    r = report_from_predictions(_test_set(), _preds([0.1, 0.2, 0.3, 0.4], [0.9, 0.7, 0.8, 0.6]))
    lines = report_lines(r)
    assert lines[0] == REPORT_HEADER
    assert lines[1].split("\t")[0] == "c0.vqc"
    assert lines[-1].startswith(SUMMARY_MARK)
    assert from_json(lines[-1][len(SUMMARY_MARK) :], EvalSummary).unwrap() == r.summary

    f = Path(tempfile.mkdtemp(), "report.txt")
    assert save_report(r, f).unwrap()
    assert len(f.read_text().splitlines()) == 6


def test_median_over_splits() -> None:
    m = median_over_splits([_report(0.5), _report(0.7), _report(0.6)])
    assert m.srocc == 0.6 and m.n_splits == 3
    assert m.sroccs == [0.5, 0.7, 0.6]
    assert median_over_splits([_report(v) for v in [0.5, 0.7, 0.6, 0.8]]).srocc == 0.6
    try:
        median_over_splits([])
        assert False
    except DataError:
        pass


def test_significance_code() -> None:
    good, bad = [0.8, 0.85, 0.9], [0.1, 0.2, 0.3]
    assert significance_code(good, bad) == "1"
    assert significance_code(bad, good) == "0"
    assert significance_code(good, good) == "-"


def test_significance_codes() -> None:
    table = {
        "a": {"x": [0.8, 0.85, 0.9], "y": [0.5, 0.5, 0.5]},
        "b": {"x": [0.1, 0.2, 0.3], "y": [0.5, 0.5, 0.5]},
    }
    codes = significance_codes(table)
    assert codes == {("a", "b"): "1-", ("b", "a"): "0-"}
    assert significance_lines(codes) == ["a\tb\t1-", "b\ta\t0-"]


def test_summary_nan_default() -> None:
    assert math.isnan(EvalSummary().srocc)
