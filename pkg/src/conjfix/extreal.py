"""Exact extended reals.

Finite values are dyadic rationals (every IEEE double is one), so the
max/minus arithmetic used by conjugation can be carried out without any
rounding.  Scalars are :class:`ExtReal`; vectors live in
:mod:`conjfix.valuation` and share the helpers below, which store a
vector of dyadics as Python integers ``units`` times ``2**exp``.
"""
from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce, total_ordering
from typing import Union

import numpy as np

NEG, FIN, POS = -1, 0, 1

Number = Union[int, float, Fraction, str, "ExtReal", np.floating, np.integer]


def is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def fraction_to_float(q: Fraction) -> float:
    """Correctly rounded conversion (int/int true division rounds once)."""
    return q.numerator / q.denominator


def units_to_fraction(units: int, exp: int) -> Fraction:
    if exp >= 0:
        return Fraction(units << exp)
    return Fraction(units, 1 << -exp)


def fraction_to_units(q: Fraction, exp: int) -> int:
    """Exact integer ``u`` with ``u * 2**exp == q``; raises if impossible."""
    if exp >= 0:
        num, den = q.numerator, q.denominator << exp
    else:
        num, den = q.numerator << -exp, q.denominator
    u, rem = divmod(num, den)
    if rem:
        raise ValueError(f"{q} is not a multiple of 2**{exp}")
    return u


def fraction_exponent(q: Fraction) -> int:
    """Largest ``e`` such that ``q`` is an integer multiple of ``2**e``."""
    if q == 0:
        return 0
    if not is_dyadic(q):
        raise ValueError(f"{q} is not a dyadic rational")
    num = q.numerator
    tz = (num & -num).bit_length() - 1
    return tz - (q.denominator.bit_length() - 1)


def float_units(values: np.ndarray) -> tuple[np.ndarray, int]:
    """Exact dyadic encoding of a finite float array.

    Returns an object array of Python ints ``units`` (same shape) and an
    exponent ``exp`` with ``values == units * 2**exp`` exactly.
    """
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("float_units needs finite input")
    flat = arr.ravel()
    mant, ex = np.frexp(flat)
    mi = (mant * 2.0**53).astype(np.int64)
    ee = ex.astype(np.int64) - 53
    nz = mi != 0
    units = np.zeros(flat.shape, dtype=object)
    if not nz.any():
        return units.reshape(arr.shape), 0
    # strip trailing zero bits so integers stay small
    low = mi & -mi
    tz = np.zeros_like(mi)
    tz[nz] = np.log2(low[nz].astype(np.float64)).astype(np.int64)
    mi = np.where(nz, mi >> tz, 0)
    ee = ee + tz
    exp = int(ee[nz].min())
    shifts = ee - exp
    units[:] = [int(m) << int(s) if m else 0 for m, s in zip(mi, shifts)]
    return units.reshape(arr.shape), exp


def normalize_units(units: np.ndarray, exp: int) -> tuple[np.ndarray, int]:
    """Remove the common power of two from ``units``."""
    flat = units.ravel()
    acc = reduce(operator.or_, flat.tolist(), 0)
    if acc == 0:
        return units, 0
    tz = (acc & -acc).bit_length() - 1
    if tz == 0:
        return units, exp
    return units >> tz, exp + tz


def shift_units(units: np.ndarray, exp: int, target: int) -> np.ndarray:
    """Re-express ``units * 2**exp`` at a smaller-or-equal exponent."""
    if target > exp:
        raise ValueError("can only shift to a finer exponent")
    if target == exp:
        return units
    return units << (exp - target)


def _parse_string(text: str) -> "ExtReal":
    s = text.strip().lower()
    if s in ("inf", "+inf", "infinity", "+infinity"):
        return INF
    if s in ("-inf", "-infinity"):
        return NEG_INF
    if "/" in s:
        q = Fraction(s)
        if not is_dyadic(q):
            raise ValueError(f"{text!r} is not a dyadic rational")
        return ExtReal(FIN, q)
    return ExtReal.of(float(s))


@total_ordering
@dataclass(frozen=True)
class ExtReal:
    """A point of the extended real line with an exact finite part.

    ``kind`` is -1, 0 or +1 for -inf, finite and +inf.  Arithmetic never
    rounds; the only undefined operation, ``inf - inf``, raises
    ``ArithmeticError``.
    """

    kind: int
    value: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in (NEG, FIN, POS):
            raise ValueError(f"bad ExtReal kind {self.kind!r}")
        if self.kind != FIN and self.value != 0:
            object.__setattr__(self, "value", Fraction(0))

    @classmethod
    def of(cls, x: Number) -> "ExtReal":
        if isinstance(x, ExtReal):
            return x
        if isinstance(x, str):
            return _parse_string(x)
        if isinstance(x, (bool, np.bool_)):
            raise TypeError("booleans are not extended reals")
        if isinstance(x, (int, np.integer)):
            return cls(FIN, Fraction(int(x)))
        if isinstance(x, Fraction):
            if not is_dyadic(x):
                raise ValueError(f"{x} is not a dyadic rational")
            return cls(FIN, x)
        x = float(x)
        if math.isnan(x):
            raise ValueError("NaN is not an extended real")
        if math.isinf(x):
            return INF if x > 0 else NEG_INF
        return cls(FIN, Fraction(x))

    @property
    def is_finite(self) -> bool:
        return self.kind == FIN

    def __float__(self) -> float:
        if self.kind == POS:
            return math.inf
        if self.kind == NEG:
            return -math.inf
        return fraction_to_float(self.value)

    def _key(self):
        return (self.kind, self.value)

    def __eq__(self, other):
        try:
            other = ExtReal.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __lt__(self, other):
        other = ExtReal.of(other)
        return self._key() < other._key()

    def __neg__(self) -> "ExtReal":
        return ExtReal(-self.kind, -self.value)

    def __add__(self, other) -> "ExtReal":
        other = ExtReal.of(other)
        if self.kind == FIN and other.kind == FIN:
            return ExtReal(FIN, self.value + other.value)
        if self.kind * other.kind == -1:
            raise ArithmeticError("inf - inf is undefined")
        return ExtReal(self.kind or other.kind)

    __radd__ = __add__

    def __sub__(self, other) -> "ExtReal":
        return self + (-ExtReal.of(other))

    def __rsub__(self, other) -> "ExtReal":
        return ExtReal.of(other) - self

    def half(self) -> "ExtReal":
        return ExtReal(self.kind, self.value / 2)

    def token(self) -> Union[float, str]:
        """JSON token: a float when exact, else ``"p/q"``; infinities as strings."""
        if self.kind == POS:
            return "inf"
        if self.kind == NEG:
            return "-inf"
        f = float(self)
        if Fraction(f) == self.value:
            return f
        return str(self.value)

    def __repr__(self) -> str:
        if self.kind != FIN:
            return "ExtReal(inf)" if self.kind == POS else "ExtReal(-inf)"
        return f"ExtReal({self.value})"

    def __str__(self) -> str:
        return str(self.token())


INF = ExtReal(POS)
NEG_INF = ExtReal(NEG)
ZERO = ExtReal(FIN, Fraction(0))
