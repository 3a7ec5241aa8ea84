"""Shared JSON encoding for matrices, numbers and verdict payloads.

Numbers are JSON numbers, or strings ``"p/q"`` for exact rationals. A matrix
is one of

* ``{"diag": [d_1, ..., d_n]}``: diagonal shorthand for commutative data,
* ``{"entries": [[e_11, ...], ...]}`` where each entry is a number or a
  ``[re, im]`` pair.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .linalg import herm, is_diagonal


class FormatError(ValueError):
    """Malformed serialized data; ``path`` names the offending field."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


def encode_number(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def decode_number(x, path: str = "$") -> float:
    if isinstance(x, bool):
        raise FormatError(path, "expected a number")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(Fraction(x))
        except (ValueError, ZeroDivisionError):
            raise FormatError(path, f"bad rational literal {x!r}") from None
    raise FormatError(path, f"expected a number, got {type(x).__name__}")


def encode_matrix(m: np.ndarray) -> dict:
    m = np.asarray(m)
    if is_diagonal(m) and not np.any(np.imag(np.diag(m))):
        return {"diag": [encode_number(v) for v in np.real(np.diag(m))]}
    if np.iscomplexobj(m) and np.any(m.imag):
        rows = [[[encode_number(v.real), encode_number(v.imag)] for v in r] for r in m]
    else:
        rows = [[encode_number(v) for v in np.real(r)] for r in m]
    return {"entries": rows}


def decode_entry(e, path: str) -> complex:
    if isinstance(e, list):
        if len(e) != 2:
            raise FormatError(path, "complex entry must be a [re, im] pair")
        return complex(decode_number(e[0], path + "[0]"), decode_number(e[1], path + "[1]"))
    return complex(decode_number(e, path))


def decode_matrix(obj, path: str = "$", hermitian: bool = True) -> np.ndarray:
    if not isinstance(obj, dict) or len(obj) != 1 or next(iter(obj)) not in ("diag", "entries"):
        raise FormatError(path, "matrix must be {\"diag\": [...]} or {\"entries\": [[...]]}")
    if "diag" in obj:
        d = obj["diag"]
        if not isinstance(d, list) or not d:
            raise FormatError(path + ".diag", "expected a nonempty list")
        m = np.diag([decode_number(v, f"{path}.diag[{i}]") for i, v in enumerate(d)])
    else:
        rows = obj["entries"]
        if not isinstance(rows, list) or not rows or any(not isinstance(r, list) or len(r) != len(rows) for r in rows):
            raise FormatError(path + ".entries", "expected a nonempty square list of rows")
        m = np.array([[decode_entry(e, f"{path}.entries[{i}][{j}]") for j, e in enumerate(r)]
                      for i, r in enumerate(rows)])
        if not np.any(m.imag):
            m = m.real
    if hermitian:
        try:
            return herm(m, name=path)
        except ValueError as exc:
            raise FormatError(path, str(exc)) from None
    return m


def encode_vector(v) -> list:
    return [encode_number(x) for x in v]


def check_keys(obj, path: str, required: set[str], optional: set[str] = frozenset()) -> None:
    if not isinstance(obj, dict):
        raise FormatError(path, "expected an object")
    missing = required - obj.keys()
    if missing:
        raise FormatError(path, f"missing field(s) {sorted(missing)}")
    unknown = obj.keys() - required - set(optional)
    if unknown:
        raise FormatError(path, f"unknown field(s) {sorted(unknown)}")
