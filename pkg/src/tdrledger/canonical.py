"""Canonical byte encoding for documents, commands and hash inputs.

Two encodings live here:

* ``canonicalize`` turns a key-value document tree into deterministic
  JSON-compatible bytes: UTF-8, object keys sorted by code point, no
  insignificant whitespace, integers without leading zeros, decimals in
  minimal fixed-point form.  Equal content always yields equal bytes, so
  digests of canonical bytes are stable content addresses.
* ``length_prefixed`` concatenates hash-input fields with 4-byte big-endian
  length prefixes, used for transaction payloads and block headers.
"""

from __future__ import annotations

import hashlib
import json
from decimal import Decimal, InvalidOperation

from .errors import err

ZERO_DIGEST = "0" * 64


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def length_prefixed(*fields: bytes) -> bytes:
    out = bytearray()
    for field in fields:
        out += len(field).to_bytes(4, "big")
        out += field
    return bytes(out)


def format_decimal(value: Decimal) -> str:
    """Minimal fixed-point rendering: no exponent, no trailing zeros."""
    if not value.is_finite():
        raise err("UnsupportedValue", "non-finite decimal")
    text = format(value, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    if text in ("-0", ""):
        text = "0"
    return text


def as_decimal(value) -> Decimal:
    """Coerce an int, str, float or Decimal into an exact Decimal."""
    if isinstance(value, bool):
        raise err("UnsupportedValue", "boolean is not a quantity")
    if isinstance(value, Decimal):
        dec = value
    elif isinstance(value, int):
        dec = Decimal(value)
    elif isinstance(value, float):
        # repr() is the shortest round-trip decimal for the float
        dec = Decimal(repr(value))
    elif isinstance(value, str):
        try:
            dec = Decimal(value)
        except InvalidOperation:
            raise err("UnsupportedValue", f"not a decimal: {value!r}")
    else:
        raise err("UnsupportedValue", f"not a quantity: {type(value).__name__}")
    if not dec.is_finite():
        raise err("UnsupportedValue", "non-finite decimal")
    return dec


def _write(value, out: list):
    if isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, Decimal):
        out.append(format_decimal(value))
    elif isinstance(value, float):
        out.append(format_decimal(as_decimal(value)))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _write(item, out)
        out.append("]")
    elif isinstance(value, dict):
        keys = list(value.keys())
        for key in keys:
            if not isinstance(key, str):
                raise err("UnsupportedValue", f"non-string key: {key!r}")
        out.append("{")
        for i, key in enumerate(sorted(keys)):
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _write(value[key], out)
        out.append("}")
    else:
        raise err("UnsupportedValue", f"unsupported value: {type(value).__name__}")


def canonicalize(document) -> bytes:
    """Deterministic UTF-8 bytes for a tree of strings, integers, decimals,
    booleans, lists and maps.  Raises UnsupportedValue for anything else
    (None, NaN, infinities, non-string keys)."""
    out: list = []
    _write(document, out)
    return "".join(out).encode("utf-8")


def content_digest(document) -> str:
    return sha256_hex(canonicalize(document))


def loads_canonical(data: bytes):
    """Parse canonical bytes back into a document; numbers with a fraction
    come back as Decimal so re-canonicalization is byte-identical."""
    return json.loads(data.decode("utf-8"), parse_float=Decimal)
