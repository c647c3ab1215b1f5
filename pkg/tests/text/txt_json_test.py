import tempfile
from pathlib import Path

from pydantic import BaseModel

from vqx.text.txt_json import *


class Point(BaseModel):
    x: int
    y: float = 0.0


def test_to_json() -> None:
    assert to_json(1) == "1"
    assert to_json(1.1) == "1.1"
    assert to_json("OK") == '"OK"'
    assert to_json(True) == "true"
    assert to_json(None) == "null"
    assert to_json([1, 2, 3], pretty=False) == "[1,2,3]"
    assert to_json({"a": 1, "b": 2}, pretty=False) == '{"a":1,"b":2}'
    assert to_json(Point(x=1), pretty=False) == '{"x":1,"y":0.0}'


def test_from_json() -> None:
    assert from_json('{"x":2,"y":1.5}', Point).unwrap() == Point(x=2, y=1.5)
    assert from_json('{"y":1.5}', Point).is_err()
    assert from_json("not json", Point).is_err()


def test_save_load_json() -> None:
    f = Path(tempfile.mkdtemp(), "p")
    p = Point(x=3, y=4.0)
    assert save_json(p, f).unwrap()
    assert load_json(f, Point).unwrap() == p
