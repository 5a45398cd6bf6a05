"""Canonical text encoding, digests, and seed derivation.

Every persistent artifact (harness documents, run logs, wire messages) uses a
single deterministic encoding: JSON with lexicographically sorted keys and no
insignificant whitespace, ASCII-escaped. Equality of domain values is defined
as byte equality of this encoding, and digests / derived seeds hash its bytes,
so nothing here may change without invalidating every stored log.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

ENGINE_VERSION = "0.1.0"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def canonical_json(doc: Any) -> str:
    """Render a JSON-safe document in the canonical encoding."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def canonical_bytes(doc: Any) -> bytes:
    return canonical_json(doc).encode("ascii")


def parse_canonical(text: str) -> Any:
    return json.loads(text)


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a over raw bytes."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _U64
    return h


def digest_hex(doc: Any) -> str:
    """16-hex-char FNV-1a digest of a document's canonical encoding."""
    return f"{fnv1a64(canonical_bytes(doc)):016x}"


def digest_text_hex(text: str) -> str:
    return f"{fnv1a64(text.encode('ascii')):016x}"


def derive_seed(*parts: int) -> int:
    """Deterministic 64-bit sub-seed from integer parts, e.g. (run_seed, k)."""
    return fnv1a64(":".join(str(p) for p in parts).encode("ascii"))


def fraction_to_text(f: Fraction) -> str:
    """Exact lowest-terms encoding, always with an explicit denominator."""
    return f"{f.numerator}/{f.denominator}"


def fraction_from_text(text: str) -> Fraction:
    num, _, den = text.partition("/")
    if not den:
        raise ValueError(f"not a fraction literal: {text!r}")
    return Fraction(int(num), int(den))


def scalar_to_fraction(value: int | float | str | Fraction) -> Fraction:
    """Exact rational for a config scalar; floats get decimal-literal semantics."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("boolean is not a numeric scalar")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str) and "/" in value:
        return fraction_from_text(value)
    return Fraction(str(value))


def fixed6(f: Fraction) -> str:
    """Fixed 6-decimal rendering, round-half-even. Report/series surface only."""
    scaled = round(f * 10**6)  # banker's rounding on the exact rational
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    return f"{sign}{scaled // 10**6}.{scaled % 10**6:06d}"


def quantize6(f: Fraction) -> Fraction:
    """The exact rational that fixed6 renders, i.e. f rounded to 1e-6."""
    return Fraction(round(f * 10**6), 10**6)
