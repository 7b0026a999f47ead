"""Functions ``h: E -> extended reals`` on a finite index set, stored exactly."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import ContractError
from .extreal import (
    FIN,
    INF,
    NEG,
    POS,
    ExtReal,
    float_units,
    fraction_exponent,
    fraction_to_float,
    fraction_to_units,
    normalize_units,
    shift_units,
    units_to_fraction,
)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Valuation:
    """An immutable vector of extended reals.

    Finite entry ``i`` equals ``units[i] * 2**exp``; ``kind[i]`` is -1, 0 or
    +1 for -inf, finite, +inf (``units`` is 0 at infinite entries).  Build
    instances with :meth:`of`, :meth:`from_floats` or :meth:`constant`.
    """

    kind: np.ndarray
    units: np.ndarray
    exp: int

    @classmethod
    def from_parts(cls, kind, units, exp: int) -> "Valuation":
        kind = np.array(kind, dtype=np.int8)
        u = np.zeros(kind.shape, dtype=object)
        u[:] = list(units)
        u[kind != FIN] = 0
        u, exp = normalize_units(u, exp)
        return cls(_freeze(kind), _freeze(u), exp)

    @classmethod
    def from_floats(cls, values) -> "Valuation":
        a = np.asarray(values, dtype=np.float64).ravel()
        if np.isnan(a).any():
            raise ValueError(f"NaN at index {int(np.flatnonzero(np.isnan(a))[0])}")
        kind = np.where(np.isposinf(a), POS, np.where(np.isneginf(a), NEG, FIN))
        fin = kind == FIN
        units = np.zeros(a.shape, dtype=object)
        exp = 0
        if fin.any():
            fu, exp = float_units(a[fin])
            units[fin] = fu
        return cls.from_parts(kind, units, exp)

    @classmethod
    def of(cls, values: Iterable) -> "Valuation":
        """Build from any mix of floats, ints, dyadic Fractions, ExtReals or
        the strings ``"inf"``/``"-inf"``."""
        if isinstance(values, Valuation):
            return values
        if isinstance(values, np.ndarray) and values.dtype.kind == "f":
            return cls.from_floats(values)
        items = [ExtReal.of(v) for v in values]
        fin = [x.value for x in items if x.kind == FIN]
        exp = min((fraction_exponent(q) for q in fin if q != 0), default=0)
        kind = [x.kind for x in items]
        units = [fraction_to_units(x.value, exp) if x.kind == FIN else 0 for x in items]
        return cls.from_parts(kind, units, exp)

    @classmethod
    def constant(cls, n: int, value=INF) -> "Valuation":
        return cls.of([ExtReal.of(value)] * n)

    # -- sequence protocol -------------------------------------------------
    def __len__(self) -> int:
        return len(self.kind)

    def __getitem__(self, i: int) -> ExtReal:
        k = int(self.kind[i])
        if k != FIN:
            return ExtReal(k)
        return ExtReal(FIN, units_to_fraction(self.units[i], self.exp))

    def __iter__(self) -> Iterator[ExtReal]:
        return (self[i] for i in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Valuation):
            try:
                other = Valuation.of(other)
            except (TypeError, ValueError):
                return NotImplemented
        if len(self) != len(other):
            return False
        return bool(np.all(compare(self, other) == 0))

    __hash__ = None

    def __repr__(self) -> str:
        return f"Valuation({[x.token() for x in self]})"

    # -- views ---------------------------------------------------------------
    @property
    def finite(self) -> np.ndarray:
        return self.kind == FIN

    def units_at(self, exp: int) -> np.ndarray:
        return shift_units(self.units, self.exp, exp)

    def to_floats(self) -> np.ndarray:
        out = np.where(self.kind == POS, np.inf, np.where(self.kind == NEG, -np.inf, 0.0))
        for i in np.flatnonzero(self.kind == FIN):
            out[i] = fraction_to_float(units_to_fraction(self.units[i], self.exp))
        return out

    def tokens(self) -> list:
        return [x.token() for x in self]

    def replace(self, index: int, value) -> "Valuation":
        items = list(self)
        items[index] = ExtReal.of(value)
        return Valuation.of(items)

    def le(self, other: "Valuation") -> np.ndarray:
        return compare(self, other) <= 0

    def lt(self, other: "Valuation") -> np.ndarray:
        return compare(self, other) < 0

    def max(self) -> ExtReal:
        return self[self.argmax()]

    def argmax(self) -> int:
        """Index of the largest entry, lowest index on ties."""
        if len(self) == 0:
            raise ValueError("argmax of an empty valuation")
        top = self.kind.max()
        cand = np.flatnonzero(self.kind == top)
        if top != FIN:
            return int(cand[0])
        return int(cand[np.argmax(self.units[cand])])


def _aligned(a: Valuation, b: Valuation) -> tuple[np.ndarray, np.ndarray, int]:
    e = min(a.exp, b.exp)
    return a.units_at(e), b.units_at(e), e


def _check_len(a: Valuation, b: Valuation) -> None:
    if len(a) != len(b):
        raise ContractError(f"length mismatch: {len(a)} vs {len(b)}")


def compare(a: Valuation, b: Valuation) -> np.ndarray:
    """Componentwise sign of ``a - b`` in the total order (int array)."""
    _check_len(a, b)
    ua, ub, _ = _aligned(a, b)
    out = np.sign(a.kind.astype(np.int64) - b.kind.astype(np.int64))
    both = (a.kind == FIN) & (b.kind == FIN)
    if both.any():
        d = ua[both] - ub[both]
        out[both] = (d > 0).astype(np.int64) - (d < 0).astype(np.int64)
    return out


def maximum(a: Valuation, b: Valuation) -> Valuation:
    pick_a = compare(a, b) >= 0
    ua, ub, e = _aligned(a, b)
    kind = np.where(pick_a, a.kind, b.kind)
    units = np.where(pick_a, ua, ub)
    return Valuation.from_parts(kind, units, e)


def minimum(a: Valuation, b: Valuation) -> Valuation:
    pick_a = compare(a, b) <= 0
    ua, ub, e = _aligned(a, b)
    kind = np.where(pick_a, a.kind, b.kind)
    units = np.where(pick_a, ua, ub)
    return Valuation.from_parts(kind, units, e)


def difference(a: Valuation, b: Valuation) -> Valuation:
    """``a - b`` componentwise, reading equal infinities as a difference of 0."""
    _check_len(a, b)
    ua, ub, e = _aligned(a, b)
    kind = np.sign(a.kind.astype(np.int64) - b.kind.astype(np.int64))
    same_inf = (a.kind == b.kind) & (a.kind != FIN)
    kind[same_inf] = FIN
    units = np.zeros(len(a), dtype=object)
    both = (a.kind == FIN) & (b.kind == FIN)
    units[both] = ua[both] - ub[both]
    return Valuation.from_parts(kind, units, e)


def abs_difference(a: Valuation, b: Valuation) -> Valuation:
    d = difference(a, b)
    return Valuation.from_parts(np.abs(d.kind), np.abs(d.units), d.exp)


def exact_values(v: Valuation) -> list:
    """Entries as ``Fraction`` (finite) or ``float`` infinities."""
    return [x.value if x.is_finite else float(x) for x in v]


def as_valuation(values, n: int | None = None) -> Valuation:
    v = Valuation.of(values)
    if n is not None and len(v) != n:
        raise ContractError(f"valuation has length {len(v)}, coupling has n={n}")
    return v


__all__ = [
    "Valuation",
    "compare",
    "maximum",
    "minimum",
    "difference",
    "abs_difference",
    "exact_values",
    "as_valuation",
]
