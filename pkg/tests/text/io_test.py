import tempfile
from pathlib import Path

from vqx.text.io import *


def test_save_load_txt() -> None:
    f = Path(tempfile.mkdtemp(), "sub", "a")
    assert save_txt("1\n2\n", f).unwrap()
    assert load_txt(f.with_suffix(".txt")).unwrap() == "1\n2\n"


def test_load_lines() -> None:
    f = Path(tempfile.mkdtemp(), "lines.txt")
    save_lines(["# head", "a", "", "  b  "], f)
    assert load_lines(f).unwrap() == ["a", "b"]


def test_load_missing() -> None:
    assert load_txt("/nonexistent/vqx/file.txt").is_err()
    assert load_lines("/nonexistent/vqx/file.txt").is_err()
