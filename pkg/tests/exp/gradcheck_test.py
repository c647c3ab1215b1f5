import numpy as np

from vqx.ad.tensor import Tensor, as_tensor, make_node, sum_
from vqx.exp.gradcheck import *


def flipped_square(a: Tensor) -> Tensor:
    a = as_tensor(a)
    return make_node(a.data * a.data, (a,), lambda g: (-2.0 * a.data * g,), "flipped_square")


def test_standard_cases_pass() -> None:
    rows = run_gradcheck()
    assert len(rows) == len(standard_cases())
    failed = [(r.name, r.max_rel_err) for r in rows if not r.passed]
    assert failed == []


def test_sign_flip_detected() -> None:
    case = GradCase("flipped", lambda x: sum_(flipped_square(x[0])), [np.array([0.5, -1.0])])
    (row,) = run_gradcheck(cases=[case])
    assert not row.passed and row.max_rel_err > 0.5


def test_gradcheck_lines() -> None:
    rows = [GradRow(name="a", max_rel_err=1e-9, passed=True), GradRow(name="b", max_rel_err=1.0, passed=False)]
    lines = gradcheck_lines(rows)
    assert len(lines) == 3
    assert lines[1].endswith("PASS") and lines[2].endswith("FAIL")


def test_abs_tol_is_per_case() -> None:
    cases = standard_cases()
    assert {c.name for c in cases if c.abs_tol == NET_ABS_TOL} == {"encoder", "head"}
    assert {c.name for c in cases if c.abs_tol == 0.0} >= {"supervised", "consistency", "sym_solve"}
