"""Finite couplings and the generalized conjugations they induce.

For a coupling ``phi`` on ``E x E`` (``E`` a finite index set) and
``h: E -> [-inf, inf]``::

    conjugate1(phi, h)(s) = max_r phi[r, s] - h(r)
    conjugate2(phi, h)(r) = max_s phi[r, s] - h(s)

``phi`` is real valued, so ``phi - h`` is never ``inf - inf``: a ``+inf``
entry of ``h`` contributes ``-inf`` and a ``-inf`` entry makes the whole
conjugate ``+inf``.  All arithmetic is exact (see :mod:`conjfix.extreal`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ContractError, PreconditionError
from .extreal import (
    FIN,
    INF,
    NEG,
    NEG_INF,
    ExtReal,
    float_units,
    fraction_exponent,
    fraction_to_float,
    fraction_to_units,
    normalize_units,
    shift_units,
    units_to_fraction,
)
from .valuation import Valuation, as_valuation, maximum

# columns per block when reducing; bounds the temporary object array
_BLOCK = 256


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Dense real coupling ``phi[r, s] = units[r, s] * 2**exp``.

    ``symmetric`` is computed on construction and is exact: entries must be
    equal as numbers, not merely close.
    """

    units: np.ndarray
    exp: int
    labels: tuple = ()
    symmetric: bool = field(init=False)
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        u = np.asarray(self.units, dtype=object)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ContractError(f"coupling table must be square, got shape {u.shape}")
        n = u.shape[0]
        if n < 1:
            raise ContractError("coupling needs at least one index")
        labels = tuple(str(x) for x in self.labels) if self.labels else tuple(
            str(i) for i in range(n)
        )
        if len(labels) != n:
            raise ContractError(f"{len(labels)} labels for a {n}x{n} coupling")
        if len(set(labels)) != n:
            raise ContractError("coupling labels must be distinct")
        u, exp = normalize_units(u.copy(), self.exp)
        u.setflags(write=False)
        object.__setattr__(self, "units", u)
        object.__setattr__(self, "exp", exp)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "symmetric", bool(np.all(u == u.T)))

    @classmethod
    def from_floats(cls, phi, labels: Optional[Sequence[str]] = None) -> "CouplingMatrix":
        rows = [list(r) for r in phi] if not isinstance(phi, np.ndarray) else None
        if rows is not None:
            n = len(rows)
            for i, row in enumerate(rows):
                if len(row) != n:
                    raise ContractError(
                        f"coupling table is not square: row {i} has {len(row)} entries, expected {n}"
                    )
        a = np.asarray(phi, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ContractError(f"coupling table must be square, got shape {a.shape}")
        bad = np.argwhere(~np.isfinite(a))
        if len(bad):
            r, s = (int(x) for x in bad[0])
            raise ContractError(f"phi[{r}][{s}] = {a[r, s]} is not finite")
        units, exp = float_units(a)
        return cls(units, exp, tuple(labels) if labels else ())

    @classmethod
    def from_exact(cls, entries, labels: Optional[Sequence[str]] = None) -> "CouplingMatrix":
        """Build from a square table of ints / dyadic Fractions / floats."""
        rows = [[ExtReal.of(x) for x in row] for row in entries]
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ContractError(f"row {i} has {len(row)} entries, expected {n}")
            for j, x in enumerate(row):
                if not x.is_finite:
                    raise ContractError(f"phi[{i}][{j}] is not finite")
        vals = [x.value for row in rows for x in row]
        exp = min((fraction_exponent(q) for q in vals if q != 0), default=0)
        units = np.empty((n, n), dtype=object)
        units[:] = [[fraction_to_units(x.value, exp) for x in row] for row in rows]
        return cls(units, exp, tuple(labels) if labels else ())

    @property
    def n(self) -> int:
        return self.units.shape[0]

    @property
    def phi(self) -> np.ndarray:
        """Float view (correctly rounded)."""
        if "phi" not in self._cache:
            out = np.empty((self.n, self.n))
            for (r, s), u in np.ndenumerate(self.units):
                out[r, s] = fraction_to_float(units_to_fraction(u, self.exp))
            self._cache["phi"] = out
        return self._cache["phi"]

    def entry(self, r: int, s: int) -> Fraction:
        return units_to_fraction(self.units[r, s], self.exp)

    def units_at(self, exp: int) -> np.ndarray:
        key = ("units", exp)
        if key not in self._cache:
            arr = shift_units(self.units, self.exp, exp)
            if arr is not self.units:
                arr.setflags(write=False)
            self._cache[key] = arr
        return self._cache[key]

    def transpose(self) -> "CouplingMatrix":
        return CouplingMatrix(self.units.T.copy(), self.exp, self.labels)

    def __repr__(self) -> str:
        return f"CouplingMatrix(n={self.n}, symmetric={self.symmetric})"


def _check(phi: CouplingMatrix, h) -> Valuation:
    return as_valuation(h, phi.n)


def _sup_minus(phi: CouplingMatrix, h: Valuation, transpose: bool) -> Valuation:
    n = phi.n
    if (h.kind == NEG).any():
        return Valuation.constant(n, INF)
    rows = np.flatnonzero(h.kind == FIN)
    if rows.size == 0:
        return Valuation.constant(n, NEG_INF)
    e = min(phi.exp, h.exp)
    table = phi.units_at(e)
    if transpose:
        table = table.T
    hu = h.units_at(e)[rows][:, None]
    out = np.empty(n, dtype=object)
    for start in range(0, n, _BLOCK):
        block = table[rows, start:start + _BLOCK]
        out[start:start + _BLOCK] = (block - hu).max(axis=0)
    return Valuation.from_parts(np.zeros(n, dtype=np.int8), out, e)


def conjugate1(phi: CouplingMatrix, h) -> Valuation:
    """``s -> max_r phi[r, s] - h(r)``."""
    return _sup_minus(phi, _check(phi, h), transpose=False)


def conjugate2(phi: CouplingMatrix, h) -> Valuation:
    """``r -> max_s phi[r, s] - h(s)``."""
    return _sup_minus(phi, _check(phi, h), transpose=True)


def sym_conjugate(phi: CouplingMatrix, h) -> Valuation:
    """The single conjugation of a symmetric coupling."""
    if not phi.symmetric:
        raise PreconditionError("sym_conjugate needs a symmetric coupling")
    return conjugate1(phi, h)


def symmetrize(phi: CouplingMatrix) -> CouplingMatrix:
    """Entrywise ``max(phi[r, s], phi[s, r])``."""
    u = phi.units
    return CouplingMatrix(np.where(u >= u.T, u, u.T), phi.exp, phi.labels)


def indicator(n: int, support: Iterable[int], offset=0) -> Valuation:
    """``offset`` on ``support``, ``+inf`` elsewhere."""
    support = sorted(set(int(i) for i in support))
    if not support:
        raise ContractError("indicator support must be non-empty")
    if support[0] < 0 or support[-1] >= n:
        raise ContractError(f"support index out of range for n={n}")
    t = ExtReal.of(offset)
    if t.kind == NEG:
        raise ContractError("indicator offset must be finite or +inf")
    values = [INF] * n
    for i in support:
        values[i] = t
    return Valuation.of(values)


@dataclass(frozen=True)
class Membership:
    """Outcome of :func:`is_in_H`; ``witness`` is the first ``r`` with
    ``conjugate1(phi, h)(r) > h(r)``."""

    member: bool
    witness: Optional[int] = None

    def __bool__(self) -> bool:
        return self.member


def is_in_H(phi: CouplingMatrix, h) -> Membership:
    h = _check(phi, h)
    bad = np.flatnonzero(~conjugate1(phi, h).le(h))
    if bad.size:
        return Membership(False, int(bad[0]))
    return Membership(True)


def diag_halves(phi: CouplingMatrix) -> Valuation:
    """``r -> phi[r, r] / 2``: every member of H is bounded below by it."""
    return Valuation.from_parts(np.zeros(phi.n, dtype=np.int8), np.diagonal(phi.units), phi.exp - 1)


def max_conjugate(phi: CouplingMatrix, h) -> Valuation:
    """``max(conjugate1, conjugate2)`` componentwise."""
    return maximum(conjugate1(phi, h), conjugate2(phi, h))
