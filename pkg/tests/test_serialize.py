"""Tests for canonical serialization."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from texlab.serialize import (
    complex_pair,
    dumps_canonical,
    format_float,
    parse_complex_field,
    parse_float_field,
)


def test_format_float_round_trips_doubles():
    rng = np.random.default_rng(21)
    for _ in range(200):
        x = float(rng.normal() * 10.0 ** rng.integers(-12, 12))
        assert float(format_float(x)) == x


def test_format_float_special_values():
    assert format_float(math.inf) == '"inf"'
    assert format_float(-math.inf) == '"-inf"'
    assert format_float(math.nan) == '"nan"'
    assert format_float(0.0) == "0"


def test_dumps_canonical_structure():
    text = dumps_canonical({"a": 1, "b": [1.5, True, None], "c": "x"})
    assert text.endswith("\n")
    assert json.loads(text) == {"a": 1, "b": [1.5, True, None], "c": "x"}


def test_dumps_canonical_is_deterministic():
    payload = {"values": [0.1, 0.2, 0.30000000000000004], "n": 7}
    assert dumps_canonical(payload) == dumps_canonical(payload)


def test_dumps_canonical_preserves_key_order():
    text = dumps_canonical({"z": 1, "a": 2})
    assert text.index('"z"') < text.index('"a"')


def test_dumps_canonical_handles_numpy_scalars_and_vectors():
    text = dumps_canonical(
        {
            "i": np.int64(3),
            "f": np.float64(0.5),
            "z": np.complex128(1 + 2j),
            "v": np.array([1.0, 2.0]),
        }
    )
    assert json.loads(text) == {"i": 3, "f": 0.5, "z": [1.0, 2.0], "v": [1.0, 2.0]}


def test_dumps_canonical_serializes_infinity_as_string():
    parsed = json.loads(dumps_canonical({"r": math.inf}))
    assert parsed["r"] == "inf"


def test_dumps_canonical_rejects_non_string_keys_and_unknown_types():
    with pytest.raises(TypeError, match="keys"):
        dumps_canonical({1: "x"})
    with pytest.raises(TypeError, match="cannot serialize"):
        dumps_canonical({"x": object()})


def test_complex_pair():
    assert complex_pair(1 - 2j) == [1.0, -2.0]


def test_parse_float_field_round_trip():
    for value in (1.5, 0.0, -3.25):
        assert parse_float_field(value, name="v") == value
    assert parse_float_field("inf", name="v") == math.inf
    assert parse_float_field("-inf", name="v") == -math.inf
    assert math.isnan(parse_float_field("nan", name="v"))
    with pytest.raises(ValueError, match="v"):
        parse_float_field("wide", name="v")
    with pytest.raises(ValueError, match="v"):
        parse_float_field([1.0], name="v")


def test_parse_complex_field():
    assert parse_complex_field([1.0, -2.0], name="z") == 1.0 - 2.0j
    assert parse_complex_field(3, name="z") == 3.0 + 0.0j
    with pytest.raises(ValueError, match="z"):
        parse_complex_field("1+2j", name="z")
    with pytest.raises(ValueError, match="z"):
        parse_complex_field([1.0], name="z")
