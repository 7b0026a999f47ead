"""General (possibly non-symmetric) couplings.

Membership in ``H = {h : C1 h <= h}`` does not depend on which conjugation
is used, and coincides with membership for the symmetrized coupling
``max(phi, phi.T)``.  Minimal elements of ``H`` are therefore the fixed
points of the symmetrized conjugation, ``max(C1 h, C2 h) == h``; they need
not be fixed points of ``C1`` or ``C2`` (see :func:`counterexample_fixture`).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .core import (
    CouplingMatrix,
    conjugate1,
    conjugate2,
    is_in_H,
    max_conjugate,
    sym_conjugate,
    symmetrize,
)
from .errors import ContractError, InvariantViolation, PreconditionError
from .extreal import ExtReal
from .fixpoint import DescentConfig, FixpointResult, MinimalityReport, minimality_probe, solve_fixpoint
from .valuation import Valuation, as_valuation, difference


class MembershipTriple(NamedTuple):
    via_c1: bool
    via_c2: bool
    via_max: bool


def membership_equivalence(phi: CouplingMatrix, h) -> MembershipTriple:
    """Evaluate the three equivalent membership tests independently."""
    h = as_valuation(h, phi.n)
    c1, c2 = conjugate1(phi, h), conjugate2(phi, h)
    return MembershipTriple(
        bool(np.all(c1.le(h))),
        bool(np.all(c2.le(h))),
        bool(np.all(max_conjugate(phi, h).le(h))),
    )


def general_minimal(phi: CouplingMatrix, g, cfg: Optional[DescentConfig] = None) -> FixpointResult:
    """Minimal ``h`` in H below ``g``, via descent on the symmetrized coupling.

    On convergence ``max(C1 h, C2 h) == h`` (up to the tolerance) and
    ``max(C1 g, C2 g) <= h <= g``.
    """
    cfg = cfg or DescentConfig()
    g = as_valuation(g, phi.n)
    m = is_in_H(phi, g)
    if not m:
        raise PreconditionError(f"g is not in H: C1 g({m.witness}) > g({m.witness})")
    res = solve_fixpoint(symmetrize(phi), g, cfg)
    h = res.h
    tol = ExtReal.of(cfg.tolerance)
    gap = difference(h, max_conjugate(phi, h)).max()
    checks = dict(res.checks)
    checks["max_conjugate_fixed"] = bool(ExtReal.of(0) <= gap <= tol)
    checks["sandwich"] = bool(np.all(max_conjugate(phi, g).le(h)) and np.all(h.le(g)))
    if res.converged and not (checks["max_conjugate_fixed"] and checks["sandwich"]):
        raise InvariantViolation(f"minimality checks failed: {checks}")
    return FixpointResult(
        h=h,
        start=res.start,
        final_gap=res.final_gap,
        sweeps_used=res.sweeps_used,
        converged=res.converged,
        exact=res.exact,
        trace=res.trace,
        checks=checks,
    )


@dataclass(frozen=True)
class FixedPointReport:
    in_H: bool
    sym_fixed: bool
    minimality: MinimalityReport

    @property
    def ok(self) -> bool:
        return self.in_H and self.sym_fixed and self.minimality.ok


def fixed_point_implies_minimal_check(
    phi: CouplingMatrix, h, which: str = "C1", epsilon: float = 1e-3
) -> FixedPointReport:
    """For ``h`` fixed by ``C1`` (or ``C2``) confirm it is a minimal member of H."""
    h = as_valuation(h, phi.n)
    ops = {"C1": conjugate1, "C2": conjugate2}
    if which not in ops:
        raise ContractError(f"which must be 'C1' or 'C2', got {which!r}")
    ch = ops[which](phi, h)
    if ch != h:
        raise PreconditionError(f"h is not a fixed point of {which}: {which} h = {ch.tokens()}")
    sym = symmetrize(phi)
    return FixedPointReport(
        in_H=bool(is_in_H(phi, h)),
        sym_fixed=sym_conjugate(sym, h) == h,
        minimality=minimality_probe(sym, h, epsilon, tolerance=0.0),
    )


@dataclass(frozen=True)
class SubdiffReport:
    index: int
    value_at_r0: ExtReal
    c1_value: ExtReal
    c2_value: ExtReal
    applicable: bool
    violations_1: tuple = ()
    violations_2: tuple = ()

    @property
    def certified(self) -> bool:
        return self.applicable and not self.violations_1 and not self.violations_2


def _subdiff(phi: CouplingMatrix, h, r0: int, tol: Fraction) -> SubdiffReport:
    h = as_valuation(h, phi.n)
    if not 0 <= r0 < phi.n:
        raise ContractError(f"index {r0} out of range for n={phi.n}")
    m = is_in_H(phi, h)
    if not m:
        raise PreconditionError(f"h is not in H: C1 h({m.witness}) > h({m.witness})")
    c1, c2 = conjugate1(phi, h), conjugate2(phi, h)
    half = ExtReal.of(phi.entry(r0, r0) / 2)
    hr0 = h[r0]
    slack = ExtReal.of(tol)
    if hr0 < half - slack:
        raise InvariantViolation(f"h({r0}) < phi({r0},{r0})/2 for a member of H")
    if not hr0 <= half + slack:
        return SubdiffReport(r0, hr0, c1[r0], c2[r0], applicable=False)
    for name, c in (("C1", c1), ("C2", c2)):
        if not (half - slack <= c[r0] <= half + slack):
            raise InvariantViolation(f"{name} h({r0}) = {c[r0]} differs from phi({r0},{r0})/2")
    diag = ExtReal.of(phi.entry(r0, r0))
    v1, v2 = [], []
    for r in range(phi.n):
        if not hr0 + (ExtReal.of(phi.entry(r, r0)) - diag) <= h[r] + slack:
            v1.append(r)
        if not hr0 + (ExtReal.of(phi.entry(r0, r)) - diag) <= h[r] + slack:
            v2.append(r)
    return SubdiffReport(r0, hr0, c1[r0], c2[r0], True, tuple(v1), tuple(v2))


def subdifferential_check(phi: CouplingMatrix, h, r0: int) -> SubdiffReport:
    """Check ``r0`` lies in both generalized subdifferentials of ``h`` at ``r0``.

    Applies only where ``h(r0) == phi[r0, r0] / 2`` exactly; elsewhere the
    report is marked not applicable.
    """
    return _subdiff(phi, h, r0, Fraction(0))


def subdifferential_check_approx(phi: CouplingMatrix, h, r0: int, tol: float = 1e-9) -> SubdiffReport:
    """:func:`subdifferential_check` with every comparison relaxed by ``tol``
    (for solver outputs computed with a gap tolerance)."""
    return _subdiff(phi, h, r0, Fraction(tol))


@dataclass(frozen=True)
class Counterexample:
    phi: CouplingMatrix
    h: Valuation
    expected_c1: Valuation
    expected_c2: Valuation


def counterexample_fixture() -> Counterexample:
    """Two-point coupling whose minimal ``h`` is fixed by neither conjugation.

    ``E = {a, b}``, ``phi(a,a) = 0, phi(a,b) = -3, phi(b,a) = 0, phi(b,b) = -3``
    and ``h = (1, -1)``: ``C1 h = (1, -2)``, ``C2 h = (-1, -1)`` and their
    maximum is ``h``.
    """
    phi = CouplingMatrix.from_exact([[0, -3], [0, -3]], labels=("a", "b"))
    return Counterexample(
        phi=phi,
        h=Valuation.of([1, -1]),
        expected_c1=Valuation.of([1, -2]),
        expected_c2=Valuation.of([-1, -1]),
    )
