from rustshed import Err

from vqx.util.err import *


def test_exit_code_of() -> None:
    assert exit_code_of(ConfigError("x")) == 1
    assert exit_code_of(DataError("x")) == 1
    assert exit_code_of(ShapeError("x")) == 1
    assert exit_code_of(NumericError("x")) == 2
    assert exit_code_of(VerifyError("x")) == 3
    assert exit_code_of(ValueError("x")) == 1


def test_catch_show_err() -> None:
    assert catch_show_err(lambda: 0) == 0

    def fail() -> int:
        raise NumericError("nan")

    assert catch_show_err(fail) == 2
    assert catch_show_err(fail, verbose=True) == 2


def test_show_err() -> None:
    show_err(Err("bad"))
    show_err(DataError("bad"))
    show_err(AssertionError("bad"))