"""Canonical encoding: determinism, minimal decimals, rejection rules."""

import hashlib
import json
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdrledger.canonical import (
    ZERO_DIGEST,
    as_decimal,
    canonicalize,
    content_digest,
    format_decimal,
    length_prefixed,
    loads_canonical,
    sha256_hex,
)
from tdrledger.errors import RegistryError


def test_key_order_is_insignificant():
    assert canonicalize({"b": 1, "a": 2}) == canonicalize({"a": 2, "b": 1})


def test_empty_document_is_two_bytes():
    assert canonicalize({}) == b"{}"


def test_nan_rejected():
    with pytest.raises(RegistryError) as caught:
        canonicalize({"x": float("nan")})
    assert caught.value.code == "UnsupportedValue"


def test_infinity_rejected():
    with pytest.raises(RegistryError):
        canonicalize({"x": Decimal("Infinity")})


def test_none_rejected():
    with pytest.raises(RegistryError) as caught:
        canonicalize({"x": None})
    assert caught.value.code == "UnsupportedValue"


def test_non_string_keys_rejected():
    with pytest.raises(RegistryError):
        canonicalize({1: "a"})


def test_no_whitespace_and_sorted_keys():
    data = canonicalize({"z": [1, 2], "a": {"y": "x", "b": True}})
    assert data == b'{"a":{"b":true,"y":"x"},"z":[1,2]}'


def test_decimal_minimal_fixed_point():
    assert format_decimal(Decimal("2.50")) == "2.5"
    assert format_decimal(Decimal("2.00")) == "2"
    assert format_decimal(Decimal("0.1230")) == "0.123"
    assert format_decimal(Decimal("-0")) == "0"
    assert format_decimal(Decimal("1E+3")) == "1000"
    assert format_decimal(Decimal("120.5")) == "120.5"


def test_float_encoded_via_shortest_decimal():
    assert canonicalize({"x": 0.1}) == b'{"x":0.1}'
    assert canonicalize({"x": 2.5}) == b'{"x":2.5}'


def test_booleans_not_treated_as_integers():
    assert canonicalize(True) == b"true"
    with pytest.raises(RegistryError):
        as_decimal(True)


def test_as_decimal_forms():
    assert as_decimal("2.5") == Decimal("2.5")
    assert as_decimal(3) == Decimal(3)
    assert as_decimal(2.5) == Decimal("2.5")
    with pytest.raises(RegistryError):
        as_decimal("not-a-number")
    with pytest.raises(RegistryError):
        as_decimal([1])


def test_digest_matches_direct_sha256():
    doc = {"drcId": "ab" * 32, "farAvailable": Decimal("2.5"), "landCount": 1}
    expected = hashlib.sha256(canonicalize(doc)).hexdigest()
    assert content_digest(doc) == expected
    assert sha256_hex(b"abc") == hashlib.sha256(b"abc").hexdigest()


def test_zero_digest_is_64_zeros():
    assert ZERO_DIGEST == "0" * 64
    assert len(ZERO_DIGEST) == 64


def test_length_prefixed_layout():
    data = length_prefixed(b"ab", b"", b"c")
    assert data == b"\x00\x00\x00\x02ab" + b"\x00\x00\x00\x00" + b"\x00\x00\x00\x01c"
    # unambiguous: moving a byte across a field boundary changes the bytes
    assert length_prefixed(b"a", b"bc") != length_prefixed(b"ab", b"c")


def test_loads_canonical_round_trip_preserves_bytes():
    doc = {"far": Decimal("0.30"), "n": 7, "name": "plot é"}
    data = canonicalize(doc)
    assert canonicalize(loads_canonical(data)) == data


document_strategy = st.recursive(
    st.one_of(
        st.booleans(),
        st.integers(min_value=-(10**12), max_value=10**12),
        st.decimals(allow_nan=False, allow_infinity=False, places=6,
                    min_value=Decimal("-1e9"), max_value=Decimal("1e9")),
        st.text(max_size=20),
    ),
    lambda children: st.one_of(
        st.lists(children, max_size=4),
        st.dictionaries(st.text(max_size=8), children, max_size=4),
    ),
    max_leaves=12,
)


@settings(max_examples=200, deadline=None)
@given(document_strategy)
def test_canonicalization_is_stable_under_reparse(doc):
    data = canonicalize(doc)
    assert canonicalize(loads_canonical(data)) == data
    # canonical bytes are valid JSON
    json.loads(data.decode("utf-8"))


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(st.text(max_size=8),
                       st.integers(min_value=0, max_value=99), max_size=6))
def test_insertion_order_never_matters(mapping):
    reversed_insertion = dict(reversed(list(mapping.items())))
    assert canonicalize(mapping) == canonicalize(reversed_insertion)
