import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpcris.dga import Derivation, GeneratorSpec as G, make_algebra
from hpcris.errors import DifferentialNotSquareZero, ParseError
from hpcris.io import digest, dumps_algebra, dumps_lift, loads_algebra, loads_lift
from hpcris.ring import BaseRing
from hpcris.suite import random_algebra, wuv_example

WUV = """{
  "base": {"p": 3, "n": 1},
  "generators": [
    {"name": "w", "degree": 0, "weight": 1},
    {"name": "u", "degree": -1, "weight": 2},
    {"name": "v", "degree": -2, "weight": 2}
  ],
  "differential": {"v": [[1, ["u"]]]}
}
"""


def test_load_example():
    A = loads_algebra(WUV)
    assert A.base == BaseRing(3, 1)
    assert [g.name for g in A.generators] == ["w", "u", "v"]
    assert A.differential.on("v") == {("u",): 1}


def test_coefficients_reduced_and_merged():
    text = WUV.replace('[[1, ["u"]]]', '[[2, ["u"]], [5, ["u"]]]')
    assert loads_algebra(text).differential.on("v") == {("u",): 1}
    text = WUV.replace('[[1, ["u"]]]', '[[3, ["u"]]]')
    assert loads_algebra(text).differential.is_zero()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(3, 1), (5, 2), (2, 1)]))
def test_round_trip(seed, pn):
    A = random_algebra(np.random.default_rng(seed), *pn)
    text = dumps_algebra(A)
    B = loads_algebra(text)
    assert B == A
    assert dumps_algebra(B) == text


def test_lift_round_trip():
    A, _, tw = wuv_example(3)
    text = dumps_lift(A, tw)
    assert loads_lift(text, A) == tw
    with pytest.raises(ParseError):
        loads_lift(dumps_algebra(A), A)
    other = make_algebra(BaseRing(3, 1), [G("w", 0, 1)])
    with pytest.raises(ParseError):
        loads_lift(text, other)


def _line(exc):
    return int(str(exc.value).split(":")[0].split()[1].rstrip(","))


def test_json_syntax_error_has_line():
    with pytest.raises(ParseError) as exc:
        loads_algebra(WUV.replace('"weight": 2}\n  ]', '"weight": 2},\n  ]'))
    assert str(exc.value).startswith("line ")


@pytest.mark.parametrize(
    "old,new,line",
    [
        ('"p": 3', '"p": 4', 2),
        ('"degree": -1', '"degree": "x"', 5),
        ('[1, ["u"]]', '[1, ["q"]]', 8),
        ('{"v":', '{"z":', 8),
        ('"name": "v"', '"name": "u"', 5),
        ('"weight": 1', '"weight": 0', 4),
    ],
)
def test_semantic_errors_point_at_line(old, new, line):
    with pytest.raises(ParseError) as exc:
        loads_algebra(WUV.replace(old, new))
    assert _line(exc) == line


def test_unknown_field_and_shape():
    with pytest.raises(ParseError):
        loads_algebra('{"base": {"p": 3, "n": 1}, "extra": 1}')
    with pytest.raises(ParseError):
        loads_algebra("[1, 2]")
    with pytest.raises(ParseError):
        loads_algebra('{"base": {"p": 3, "n": true}}')


def test_math_errors_are_not_parse_errors():
    text = """{"base": {"p": 3, "n": 1},
 "generators": [{"name": "x", "degree": 0, "weight": 1}, {"name": "y", "degree": -1, "weight": 1},
                {"name": "z", "degree": -2, "weight": 1}],
 "differential": {"z": [[1, ["y"]]], "y": [[1, ["x"]]]}}"""
    with pytest.raises(DifferentialNotSquareZero):
        loads_algebra(text)


def test_digest_stable():
    assert digest(WUV) == digest(str(WUV))
    assert digest(WUV) != digest(WUV + " ")
    assert len(digest("")) == 64
