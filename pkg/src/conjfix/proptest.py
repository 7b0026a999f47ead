"""Randomized checks of the conjugation identities on finite couplings.

Every property below holds on any finite index set, so with exact
arithmetic a single failure is an implementation bug.  Cases are drawn from
``numpy.random.default_rng((seed, case_index))`` so any case can be
regenerated on its own.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import CouplingMatrix, conjugate1, conjugate2, diag_halves, symmetrize
from .valuation import Valuation, maximum

DEFAULT_SEED = 20240917

PROPERTIES = (
    "order_reversal",
    "biconjugate_bound",
    "membership_agreement",
    "symmetrized_is_max",
    "membership_symmetrization",
    "triple_conjugate",
    "symmetric_collapse",
    "diagonal_bound",
    "member_lower_bound",
    "neg_inf_exclusion",
)

Le = Callable[[Valuation, Valuation], bool]


def exact_le(a: Valuation, b: Valuation) -> bool:
    return bool(np.all(a.le(b)))


def flipped_le(a: Valuation, b: Valuation) -> bool:
    """Deliberately wrong comparison used to check that the harness bites."""
    return bool(np.all(b.le(a)))


@dataclass
class Case:
    phi: np.ndarray
    h: np.ndarray
    f: np.ndarray  # f >= h componentwise
    u: np.ndarray  # seeds the member max(C1 u, u)
    index: int = -1

    def without(self, k: int) -> "Case":
        keep = np.arange(len(self.h)) != k
        return Case(self.phi[np.ix_(keep, keep)], self.h[keep], self.f[keep], self.u[keep], self.index)

    def payload(self) -> dict:
        tok = lambda a: [("inf" if x > 0 else "-inf") if np.isinf(x) else float(x) for x in a]
        return {
            "case_index": self.index,
            "phi": self.phi.tolist(),
            "h": tok(self.h),
            "f": tok(self.f),
            "u": tok(self.u),
        }


def generate_case(seed: int, index: int, size: int) -> Case:
    rng = np.random.default_rng((seed, index))
    n = int(rng.integers(1, size + 1))
    coarse = rng.random() < 0.3  # quarter-integer values force ties
    draw = lambda shape: (
        np.round(rng.uniform(-10, 10, shape) * 4) / 4 if coarse else rng.uniform(-10, 10, shape)
    )
    phi = draw((n, n))
    neg_rate = 0.1 if rng.random() < 0.2 else 0.0
    h = draw(n)
    r = rng.random(n)
    h[r < 0.2] = np.inf
    h[r > 1 - neg_rate] = -np.inf
    f = np.where(np.isfinite(h), h + rng.uniform(0, 5, n), h)
    f[(rng.random(n) < 0.2)] = np.inf
    f[np.isneginf(h)] = draw(int(np.isneginf(h).sum()))
    u = draw(n)
    u[rng.random(n) < 0.2] = np.inf
    return Case(phi, h, f, u, index)


def _sym_part(phi: np.ndarray) -> np.ndarray:
    return np.triu(phi) + np.triu(phi, 1).T


def check_case(case: Case, le: Le = exact_le) -> dict:
    """Evaluate every property on one case; returns ``{name: passed}``."""
    phi = CouplingMatrix.from_floats(case.phi)
    sym = symmetrize(phi)
    S = CouplingMatrix.from_floats(_sym_part(case.phi))
    h, f, u = (Valuation.from_floats(a) for a in (case.h, case.f, case.u))
    c1h, c2h = conjugate1(phi, h), conjugate2(phi, h)
    g = maximum(conjugate1(phi, u), u)
    diag = diag_halves(phi)
    out = {}

    out["order_reversal"] = (
        exact_le(h, f)
        and le(conjugate1(phi, f), c1h)
        and le(conjugate2(phi, f), c2h)
    )
    out["biconjugate_bound"] = le(conjugate2(phi, c1h), h) and le(conjugate1(phi, c2h), h)

    def triple(v: Valuation) -> tuple:
        return (
            le(conjugate1(phi, v), v),
            le(conjugate2(phi, v), v),
            le(maximum(conjugate1(phi, v), conjugate2(phi, v)), v),
        )

    th, tg = triple(h), triple(g)
    out["membership_agreement"] = len(set(th)) == 1 and tg == (True, True, True)
    out["symmetrized_is_max"] = conjugate1(sym, h) == maximum(c1h, c2h)
    out["membership_symmetrization"] = (
        le(conjugate1(sym, h), h) == th[0] and le(conjugate1(sym, g), g) == tg[0]
    )
    cs = conjugate1(S, h)
    out["triple_conjugate"] = conjugate1(S, conjugate1(S, cs)) == cs
    out["symmetric_collapse"] = cs == conjugate2(S, h)

    ok = True
    for c in (c1h, c2h):
        for r in range(len(h)):
            if c[r] <= h[r] and not diag[r] <= h[r]:
                ok = False
            if c[r] < h[r] and not diag[r] < h[r]:
                ok = False
    out["diagonal_bound"] = ok
    out["member_lower_bound"] = le(diag, g) and (not th[0] or le(diag, h))
    if (case.h == -np.inf).any():
        out["neg_inf_exclusion"] = all(x.kind == 1 for x in c1h) and not th[0]
    else:
        out["neg_inf_exclusion"] = True
    return out


def shrink(case: Case, prop: str, le: Le = exact_le) -> Case:
    """Greedily drop indices while ``prop`` keeps failing."""
    current = case
    changed = True
    while changed and len(current.h) > 1:
        changed = False
        for k in range(len(current.h)):
            smaller = current.without(k)
            if not check_case(smaller, le)[prop]:
                current = smaller
                changed = True
                break
    return current


@dataclass
class SuiteReport:
    cases: int
    seed: int
    size: int
    counts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)  # (case_index, property)
    counterexample: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return not self.failures

    def payload(self) -> dict:
        return {
            "cases": self.cases,
            "seed": self.seed,
            "size": self.size,
            "counts": self.counts,
            "failures": [list(x) for x in self.failures],
            "ok": self.ok,
        }


def run_suite(cases: int = 1000, seed: int = DEFAULT_SEED, size: int = 16, mutate: bool = False) -> SuiteReport:
    le = flipped_le if mutate else exact_le
    report = SuiteReport(cases, seed, size, {p: {"passed": 0, "failed": 0} for p in PROPERTIES})
    first: Optional[tuple] = None
    for i in range(cases):
        case = generate_case(seed, i, size)
        for name, passed in check_case(case, le).items():
            report.counts[name]["passed" if passed else "failed"] += 1
            if not passed:
                report.failures.append((i, name))
                if first is None:
                    first = (case, name)
    if first is not None:
        case, name = first
        small = shrink(case, name, le)
        report.counterexample = {"property": name, "seed": seed, **small.payload()}
    return report
