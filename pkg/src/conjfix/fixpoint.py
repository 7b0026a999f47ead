"""Self-conjugate functions of symmetric couplings by single-index descent.

Starting from a member ``g`` of ``H = {h : C h <= h}`` the solver repeatedly
picks an index ``r0`` with ``C h(r0) < h(r0)`` and lowers ``h(r0)`` to

    t0 = max(C h(r0), phi[r0, r0] / 2)

which keeps ``h`` inside ``H``.  After the step ``C h(r0) == h(r0)`` and,
since ``C h`` only grows as ``h`` shrinks, that index never reopens; with
exact arithmetic the descent therefore reaches a fixed point ``h == C h``
after at most ``n`` steps.  Which fixed point is reached depends on the
selection rule: ``[[0, 1], [1, 0]]`` has fixed points ``(0, 1)``, ``(1, 0)``
and ``(1/2, 1/2)``, among others.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import CouplingMatrix, conjugate1, diag_halves, sym_conjugate
from .errors import ContractError, InvariantViolation, PreconditionError
from .extreal import FIN, INF, NEG, POS, ExtReal, fraction_exponent, fraction_to_units, units_to_fraction
from .valuation import Valuation, abs_difference, as_valuation, difference

SELECTION_RULES = ("max-gap", "first-index")


@dataclass(frozen=True)
class DescentConfig:
    tolerance: float = 1e-9
    max_sweeps: int = 10_000
    selection_rule: str = "max-gap"
    record_trace: bool = False

    def __post_init__(self):
        if not self.tolerance >= 0:
            raise ContractError(f"tolerance must be >= 0, got {self.tolerance}")
        if int(self.max_sweeps) != self.max_sweeps or self.max_sweeps < 1:
            raise ContractError(f"max_sweeps must be a positive integer, got {self.max_sweeps}")
        if self.selection_rule not in SELECTION_RULES:
            raise ContractError(
                f"unknown selection rule {self.selection_rule!r}; choose from {SELECTION_RULES}"
            )


@dataclass(frozen=True)
class TraceEntry:
    sweep: int
    index: int
    t0: ExtReal
    gap: ExtReal  # gap at ``index`` before the step


@dataclass(frozen=True, eq=False)
class FixpointResult:
    h: Valuation
    start: Valuation
    final_gap: ExtReal
    sweeps_used: int
    converged: bool
    exact: bool
    trace: tuple = ()
    checks: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "h": self.h.tokens(),
            "final_gap": self.final_gap.token(),
            "sweeps_used": self.sweeps_used,
            "converged": self.converged,
            "exact": self.exact,
            "checks": dict(sorted(self.checks.items())),
        }


def _require_symmetric(phi: CouplingMatrix) -> None:
    if not phi.symmetric:
        raise PreconditionError("coupling is not symmetric (symmetrize it first)")


def gap_vector(phi: CouplingMatrix, h) -> Valuation:
    """``h - C h`` componentwise, equal infinities giving 0."""
    return difference(as_valuation(h, phi.n), sym_conjugate(phi, h))


def fixed_point_gap(phi: CouplingMatrix, h) -> ExtReal:
    return gap_vector(phi, h).max()


def _first_violation(lhs: Valuation, rhs: Valuation) -> Optional[int]:
    bad = np.flatnonzero(~lhs.le(rhs))
    return int(bad[0]) if bad.size else None


def descent_step(phi: CouplingMatrix, h, r0: int) -> Valuation:
    """Lower ``h(r0)`` to the least admissible level, staying inside H."""
    _require_symmetric(phi)
    h = as_valuation(h, phi.n)
    if not 0 <= r0 < phi.n:
        raise ContractError(f"index {r0} out of range for n={phi.n}")
    ch = conjugate1(phi, h)
    k = _first_violation(ch, h)
    if k is not None:
        raise PreconditionError(f"h is not in H: C h({k}) > h({k})")
    if not ch[r0] < h[r0]:
        raise PreconditionError(f"no strict gap at index {r0}: C h({r0}) = h({r0})")
    t0 = max(ch[r0], ExtReal(FIN, phi.entry(r0, r0) / 2))
    return h.replace(r0, t0)


class _Descent:
    """Mutable working state: ``h`` and ``C h`` as (kind, units) at one exponent."""

    def __init__(self, phi: CouplingMatrix, g: Valuation, cg: Valuation):
        e = min(phi.exp - 1, g.exp, cg.exp)
        self.e = e
        self.table = phi.units_at(e)
        # units of phi at e + 1 read at e are phi / 2
        self.diag_half = np.diagonal(phi.units_at(e + 1)).copy()
        self.hk = g.kind.astype(np.int8)
        self.hu = g.units_at(e).copy()
        self.ck = cg.kind.astype(np.int8)
        self.cu = cg.units_at(e).copy()
        self.hu.setflags(write=True)
        self.cu.setflags(write=True)

    def scalar(self, u: int) -> ExtReal:
        return ExtReal(FIN, units_to_fraction(u, self.e))

    def gaps(self):
        hk, ck = self.hk, self.ck
        inf_gap = ((hk == POS) & (ck != POS)) | ((hk == FIN) & (ck == NEG))
        both = (hk == FIN) & (ck == FIN)
        gu = np.zeros(len(hk), dtype=object)
        gu[both] = self.hu[both] - self.cu[both]
        return inf_gap, gu

    def lower(self, r0: int):
        cand = self.diag_half[r0]
        if self.ck[r0] == FIN and self.cu[r0] > cand:
            cand = self.cu[r0]
        self.hk[r0] = FIN
        self.hu[r0] = cand
        row = self.table[r0] - cand
        grow = (self.ck == NEG) | ((self.ck == FIN) & (row > self.cu))
        self.ck[grow] = FIN
        self.cu[grow] = row[grow]
        return cand

    def valuations(self) -> tuple[Valuation, Valuation]:
        return (
            Valuation.from_parts(self.hk, self.hu, self.e),
            Valuation.from_parts(self.ck, self.cu, self.e),
        )


def _pick(inf_gap: np.ndarray, gu: np.ndarray, rule: str) -> int:
    if rule == "first-index":
        strict = inf_gap | (gu > 0).astype(bool)
        return int(np.flatnonzero(strict)[0])
    if inf_gap.any():
        return int(np.flatnonzero(inf_gap)[0])
    return int(np.argmax(gu))


def solve_fixpoint(phi: CouplingMatrix, g=None, cfg: Optional[DescentConfig] = None) -> FixpointResult:
    """Descend from ``g`` (default ``+inf`` everywhere) to ``h`` with
    ``C g <= C h = h <= g`` (up to ``cfg.tolerance`` on the gap).

    Non-convergence within ``cfg.max_sweeps`` steps is reported through
    ``converged=False``, not raised.
    """
    cfg = cfg or DescentConfig()
    _require_symmetric(phi)
    g = Valuation.constant(phi.n, INF) if g is None else as_valuation(g, phi.n)
    cg = conjugate1(phi, g)
    k = _first_violation(cg, g)
    if k is not None:
        raise PreconditionError(f"start is not in H: C g({k}) > g({k})")

    tol = ExtReal.of(cfg.tolerance)
    state = _Descent(phi, g, cg)
    trace = []
    steps = 0
    while True:
        inf_gap, gu = state.gaps()
        if inf_gap.any():
            top = INF
        else:
            top = state.scalar(max(gu.tolist()))
        if top <= tol or steps >= cfg.max_sweeps:
            break
        r0 = _pick(inf_gap, gu, cfg.selection_rule)
        gap_r0 = INF if inf_gap[r0] else state.scalar(gu[r0])
        t0 = state.lower(r0)
        steps += 1
        if cfg.record_trace:
            trace.append(TraceEntry(steps, r0, state.scalar(t0), gap_r0))

    h, ch_inc = state.valuations()
    ch = conjugate1(phi, h)
    if ch != ch_inc:
        raise InvariantViolation("incremental conjugate drifted from recomputation")
    final_gap = difference(h, ch).max()
    checks = {
        "membership": bool(np.all(ch.le(h))),
        "below_start": bool(np.all(h.le(g))),
        "above_start_conjugate": bool(np.all(cg.le(h))),
        "above_diag_halves": bool(np.all(diag_halves(phi).le(h))),
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise InvariantViolation(f"descent broke {failed}")
    return FixpointResult(
        h=h,
        start=g,
        final_gap=final_gap,
        sweeps_used=steps,
        converged=final_gap <= tol,
        exact=final_gap == 0,
        trace=tuple(trace),
        checks=checks,
    )


def solve_from_below(phi: CouplingMatrix, g0, cfg: Optional[DescentConfig] = None) -> FixpointResult:
    """Fixed point ``h`` with ``g <= C h = h <= C g`` where ``g = C g0``.

    Requires ``g <= C g``.  The descent starts from ``C g = C^2 g0``.
    """
    cfg = cfg or DescentConfig()
    _require_symmetric(phi)
    g0 = as_valuation(g0, phi.n)
    g = conjugate1(phi, g0)
    cg = conjugate1(phi, g)
    k = _first_violation(g, cg)
    if k is not None:
        raise PreconditionError(f"g = C g0 is not below C g (index {k})")
    if _first_violation(conjugate1(phi, cg), cg) is not None:
        raise InvariantViolation("C^3 g0 <= C^2 g0 failed")
    res = solve_fixpoint(phi, cg, cfg)
    checks = dict(res.checks)
    checks["g_below_h"] = bool(np.all(g.le(res.h)))
    checks["h_below_conjugate_g"] = bool(np.all(res.h.le(cg)))
    if res.converged and not (checks["g_below_h"] and checks["h_below_conjugate_g"]):
        raise InvariantViolation(f"sandwich g <= h <= C g failed: {checks}")
    return FixpointResult(
        h=res.h,
        start=res.start,
        final_gap=res.final_gap,
        sweeps_used=res.sweeps_used,
        converged=res.converged,
        exact=res.exact,
        trace=res.trace,
        checks=checks,
    )


@dataclass(frozen=True)
class MinimalityReport:
    epsilon: float
    probed: tuple
    failures: tuple

    @property
    def ok(self) -> bool:
        return not self.failures


def minimality_probe(
    phi: CouplingMatrix, h, epsilon: float, tolerance: float = 1e-9
) -> MinimalityReport:
    """Lower each finite ``h(r)`` by ``epsilon`` and report the indices where
    the result is still in H (a fixed point admits none).

    Lowering one coordinate changes a single term of each max, so the
    conjugate of the lowered function is ``max(C h, phi[r, :] - h(r) + eps)``.
    """
    _require_symmetric(phi)
    h = as_valuation(h, phi.n)
    eps = ExtReal.of(epsilon)
    if not (eps.is_finite and eps > 0):
        raise ContractError(f"epsilon must be positive and finite, got {epsilon}")
    ch = conjugate1(phi, h)
    if _first_violation(ch, h) is not None or difference(h, ch).max() > ExtReal.of(tolerance):
        raise PreconditionError("h is not a fixed point within tolerance")

    e = min(phi.exp, h.exp, ch.exp, fraction_exponent(eps.value))
    table = phi.units_at(e)
    hk, hu = h.kind, h.units_at(e)
    ck, cu = ch.kind, ch.units_at(e)
    epsu = fraction_to_units(eps.value, e)
    probed, failures = [], []
    for r in np.flatnonzero(hk == FIN):
        r = int(r)
        probed.append(r)
        low = hu[r] - epsu
        row = table[r] - low
        newc = np.where(ck == FIN, np.where(row > cu, row, cu), row)
        hl = hu.copy()
        hl[r] = low
        fin = hk == FIN
        # entries where h is +inf are never violated; C h has no +inf here
        if np.all((newc[fin] <= hl[fin]).astype(bool)):
            failures.append(r)
    return MinimalityReport(float(epsilon), tuple(probed), tuple(failures))


def triple_conjugate_residual(phi: CouplingMatrix, h) -> ExtReal:
    """``max_r |C^3 h(r) - C h(r)|`` (equal infinities count as 0)."""
    _require_symmetric(phi)
    c1 = sym_conjugate(phi, h)
    c3 = sym_conjugate(phi, sym_conjugate(phi, c1))
    return abs_difference(c3, c1).max()
