"""Canonical JSON: fixed float format, insertion-order keys, stability."""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonholo.serialize import dumps_canonical, format_float


def test_float_format():
    assert format_float(1.0) == "1"
    assert format_float(0.5) == "0.5"
    assert format_float(-2.25) == "-2.25"
    assert format_float(math.pi) == "3.1415926535897931"
    assert format_float(1e300) == "1.0000000000000001e+300"
    assert float(format_float(1e300)) == 1e300


def test_float_rejects_non_finite():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(ValueError):
            format_float(bad)
        with pytest.raises(ValueError):
            dumps_canonical({"x": bad})


def test_insertion_order_preserved():
    doc = {"zeta": 1, "alpha": 2, "mid": {"b": 1, "a": 2}}
    text = dumps_canonical(doc)
    assert text.index('"zeta"') < text.index('"alpha"')
    assert text.index('"b"') < text.index('"a"')


def test_round_trip_and_trailing_newline():
    doc = {
        "verdict": "controllable",
        "values": [1.5, -0.25, 3],
        "nested": {"flag": True, "none": None, "text": "a\"b"},
    }
    text = dumps_canonical(doc)
    assert text.endswith("\n")
    assert not text.endswith("\n\n")
    assert json.loads(text) == doc


def test_byte_stability():
    doc = {"a": [math.pi, 2 / 3], "b": {"c": 1e-12}}
    assert dumps_canonical(doc) == dumps_canonical(doc)


def test_two_space_indent():
    text = dumps_canonical({"a": {"b": 1}})
    assert '\n  "a"' in text
    assert '\n    "b"' in text


@settings(max_examples=50, deadline=None)
@given(
    st.recursive(
        st.one_of(
            st.none(),
            st.booleans(),
            st.integers(-(10**9), 10**9),
            st.floats(allow_nan=False, allow_infinity=False, width=64),
            st.text(max_size=20),
        ),
        lambda leaf: st.one_of(
            st.lists(leaf, max_size=4),
            st.dictionaries(st.text(max_size=8), leaf, max_size=4),
        ),
        max_leaves=12,
    )
)
def test_round_trips_arbitrary_documents(doc):
    loaded = json.loads(dumps_canonical(doc))
    if isinstance(doc, float):
        assert loaded == pytest.approx(doc, rel=1e-15, abs=0) or loaded == doc
    else:
        assert loaded == doc
