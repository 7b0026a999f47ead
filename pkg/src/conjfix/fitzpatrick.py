"""Fitzpatrick functions and the J transform on finite grids of R^d x R^d.

The node set of a :class:`ProductGrid` stands in for ``X x X*``.  On it the
bilinear coupling

    Phi((x, x*), (y, y*)) = <x, y*> + <y, x*>

is symmetric, its conjugation is the J transform, and its diagonal halves
are the duality product ``pi(x, x*) = <x, x*>``.  Grid suprema
under-approximate suprema over the whole space, so everything here is a
finite model: statements are exact on the nodes and say nothing about
refinement limits.

Products of doubles are exact dyadic rationals, so the coupling, ``pi``
and the Fitzpatrick function are all computed without rounding.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import CouplingMatrix, conjugate1
from .errors import ContractError, PreconditionError, ResourceError
from .extreal import FIN, INF, ExtReal, float_units
from .fixpoint import DescentConfig, FixpointResult, solve_fixpoint
from .valuation import Valuation, as_valuation

DEFAULT_NODE_CAP = 5000
NODE_CAP_ENV = "CONJFIX_NODE_CAP"


def node_cap(explicit: Optional[int] = None) -> int:
    if explicit is not None:
        return int(explicit)
    env = os.environ.get(NODE_CAP_ENV)
    return int(env) if env else DEFAULT_NODE_CAP


@dataclass(frozen=True, eq=False)
class OperatorSample:
    """Finite sample ``{(x_k, x*_k)}`` of an operator ``R^d -> R^d``."""

    points: np.ndarray
    duals: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        q = np.atleast_2d(np.asarray(self.duals, dtype=np.float64))
        if p.shape != q.shape or p.ndim != 2:
            raise ContractError(f"points {p.shape} and duals {q.shape} must have equal (m, d) shape")
        if p.shape[0] < 1:
            raise ContractError("operator sample is empty")
        if p.shape[1] not in (1, 2):
            raise ContractError(f"dimension must be 1 or 2, got {p.shape[1]}")
        if not (np.isfinite(p).all() and np.isfinite(q).all()):
            raise ContractError("operator sample has non-finite coordinates")
        p.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "duals", q)

    @classmethod
    def from_pairs(cls, pairs: Sequence) -> "OperatorSample":
        xs, ys = [], []
        for x, xstar in pairs:
            xs.append(np.atleast_1d(np.asarray(x, dtype=np.float64)))
            ys.append(np.atleast_1d(np.asarray(xstar, dtype=np.float64)))
        if not xs:
            raise ContractError("operator sample is empty")
        return cls(np.vstack(xs), np.vstack(ys))

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class ProductGrid:
    """Tensor grid over ``x_1..x_d, x*_1..x*_d``; nodes flattened row-major
    in that axis order (the last dual axis varies fastest)."""

    x_axes: tuple
    xstar_axes: tuple

    def __post_init__(self):
        xa = tuple(np.asarray(a, dtype=np.float64).ravel() for a in self.x_axes)
        sa = tuple(np.asarray(a, dtype=np.float64).ravel() for a in self.xstar_axes)
        if len(xa) != len(sa) or len(xa) not in (1, 2):
            raise ContractError(f"need d in {{1, 2}} x-axes and as many x*-axes, got {len(xa)}, {len(sa)}")
        for k, a in enumerate(xa + sa):
            if a.size == 0 or not np.isfinite(a).all():
                raise ContractError(f"axis {k} must be non-empty and finite")
            if np.any(np.diff(a) <= 0):
                raise ContractError(f"axis {k} is not strictly increasing")
            a.setflags(write=False)
        object.__setattr__(self, "x_axes", xa)
        object.__setattr__(self, "xstar_axes", sa)

    @classmethod
    def uniform(cls, d: int, lo: float, hi: float, m: int) -> "ProductGrid":
        ax = np.linspace(lo, hi, m)
        return cls((ax,) * d, (ax,) * d)

    @property
    def d(self) -> int:
        return len(self.x_axes)

    @property
    def axes(self) -> tuple:
        return self.x_axes + self.xstar_axes

    @property
    def shape(self) -> tuple:
        return tuple(a.size for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        flat = np.stack([m.ravel() for m in mesh], axis=1)
        return flat[:, : self.d], flat[:, self.d:]

    def node_index(self, x, xstar) -> Optional[int]:
        coords = np.concatenate([np.atleast_1d(x), np.atleast_1d(xstar)]).astype(np.float64)
        if coords.size != 2 * self.d:
            raise ContractError(f"point has {coords.size} coordinates, grid needs {2 * self.d}")
        idx = []
        for a, c in zip(self.axes, coords):
            k = int(np.searchsorted(a, c))
            if k >= a.size or a[k] != c:
                return None
            idx.append(k)
        return int(np.ravel_multi_index(idx, self.shape))


def _pairing(x, xstar) -> Fraction:
    return sum((Fraction(float(a)) * Fraction(float(b)) for a, b in zip(x, xstar)), Fraction(0))


def duality_product(x, xstar) -> float:
    """``<x, x*>``, correctly rounded from the exact sum."""
    x, xstar = np.atleast_1d(x), np.atleast_1d(xstar)
    if x.shape != xstar.shape:
        raise ContractError(f"dimension mismatch: {x.shape} vs {xstar.shape}")
    return float(_pairing(x, xstar))


@dataclass(frozen=True)
class MonotonicityReport:
    monotone: bool
    pair: Optional[tuple] = None  # indices (i, j) of the first violating pair
    value: Optional[float] = None  # <x_i - x_j, x*_i - x*_j> at that pair

    def __bool__(self) -> bool:
        return self.monotone


def monotonicity_check(T: OperatorSample) -> MonotonicityReport:
    """Exhaustive exact check of ``<x - y, x* - y*> >= 0`` over all pairs."""
    P = [[Fraction(float(v)) for v in row] for row in T.points]
    Q = [[Fraction(float(v)) for v in row] for row in T.duals]
    m = len(T)
    for i in range(m):
        for j in range(i + 1, m):
            s = sum((P[i][k] - P[j][k]) * (Q[i][k] - Q[j][k]) for k in range(T.d))
            if s < 0:
                return MonotonicityReport(False, (i, j), float(s))
    return MonotonicityReport(True)


def _require_monotone(T: OperatorSample) -> None:
    rep = monotonicity_check(T)
    if not rep:
        i, j = rep.pair
        raise PreconditionError(
            f"operator sample is not monotone: pairs {i} and {j} give {rep.value}"
        )


def fitzpatrick_value(T: OperatorSample, x, xstar, check: bool = True) -> ExtReal:
    """``max_{(y, y*) in T} <x - y, y* - x*> + <x, x*>`` (exact)."""
    if check:
        _require_monotone(T)
    x, xstar = np.atleast_1d(x), np.atleast_1d(xstar)
    if x.size != T.d or xstar.size != T.d:
        raise ContractError(f"query point must have dimension {T.d}")
    base = _pairing(x, xstar)
    best = max(
        sum(
            (Fraction(float(a)) - Fraction(float(b))) * (Fraction(float(c)) - Fraction(float(e)))
            for a, b, c, e in zip(x, y, ys, xstar)
        )
        for y, ys in zip(T.points, T.duals)
    )
    return ExtReal.of(best + base)


def _exact_nodes(grid: ProductGrid, extra: Optional[OperatorSample] = None):
    """Node (and optionally sample) coordinates as ints at one exponent."""
    X, XS = grid.nodes()
    parts = [X, XS]
    if extra is not None:
        parts += [extra.points, extra.duals]
    units, e = float_units(np.concatenate([p.ravel() for p in parts]))
    out, pos = [], 0
    for p in parts:
        out.append(units[pos:pos + p.size].reshape(p.shape))
        pos += p.size
    return out, e


def pi_grid(grid: ProductGrid) -> Valuation:
    """The duality product at every node."""
    (Xu, XSu), e = _exact_nodes(grid)
    pu = sum(Xu[:, i] * XSu[:, i] for i in range(grid.d))
    return Valuation.from_parts(np.zeros(grid.size, dtype=np.int8), pu, 2 * e)


def fitzpatrick_grid(T: OperatorSample, grid: ProductGrid) -> Valuation:
    """The Fitzpatrick function of ``T`` at every node of ``grid``."""
    _require_monotone(T)
    if T.d != grid.d:
        raise ContractError(f"operator dimension {T.d} != grid dimension {grid.d}")
    (Xu, XSu, Yu, YSu), e = _exact_nodes(grid, T)
    # (node, sample) table of <x - y, y* - x*>
    cross = sum(
        (Xu[:, None, i] - Yu[None, :, i]) * (YSu[None, :, i] - XSu[:, None, i]) for i in range(T.d)
    )
    base = sum(Xu[:, i] * XSu[:, i] for i in range(T.d))
    return Valuation.from_parts(np.zeros(grid.size, dtype=np.int8), cross.max(axis=1) + base, 2 * e)


def build_grid_coupling(grid: ProductGrid, cap: Optional[int] = None) -> CouplingMatrix:
    """Dense ``<x, y*> + <y, x*>`` over the node set (symmetric)."""
    limit = node_cap(cap)
    if grid.size > limit:
        raise ResourceError(
            f"grid has {grid.size} nodes, above the cap of {limit} (set {NODE_CAP_ENV} to raise it)"
        )
    (Xu, XSu), e = _exact_nodes(grid)
    cross = sum(Xu[:, None, i] * XSu[None, :, i] for i in range(grid.d))
    return CouplingMatrix(cross + cross.T, 2 * e)


def j_transform_grid(grid: ProductGrid, h, coupling: Optional[CouplingMatrix] = None) -> Valuation:
    """``(J h)(x, x*) = max_{(y, y*)} <x, y*> + <y, x*> - h(y, y*)`` over nodes."""
    coupling = coupling if coupling is not None else build_grid_coupling(grid)
    return conjugate1(coupling, as_valuation(h, grid.size))


def sample_nodes(T: OperatorSample, grid: ProductGrid) -> list[int]:
    """Node index of every sample pair; raises if one is off the grid."""
    if T.d != grid.d:
        raise ContractError(f"operator dimension {T.d} != grid dimension {grid.d}")
    out = []
    for k, (x, xs) in enumerate(zip(T.points, T.duals)):
        idx = grid.node_index(x, xs)
        if idx is None:
            raise PreconditionError(
                f"sample pair {k} ({x.tolist()}, {xs.tolist()}) is not a grid node"
            )
        out.append(idx)
    return out


def delta_T_plus_pi(T: OperatorSample, grid: ProductGrid) -> Valuation:
    """``pi`` on the nodes of ``T``, ``+inf`` elsewhere."""
    idx = set(sample_nodes(T, grid))
    pi = pi_grid(grid)
    kind = np.where(np.isin(np.arange(grid.size), sorted(idx)), FIN, 1).astype(np.int8)
    return Valuation.from_parts(kind, pi.units, pi.exp)


@dataclass(frozen=True)
class FtMembershipReport:
    """Violations of each defining condition of the representing family.

    ``below_pi``: nodes with ``h < pi - tol``.  ``off_graph``: sample nodes
    with ``|h - pi| > tol``.  ``nonconvex``: axis-aligned node triples
    ``(left, mid, right)`` with finite values where ``h(mid)`` exceeds the
    linear interpolation of its neighbours by more than ``tol``.
    """

    below_pi: tuple
    off_graph: tuple
    nonconvex: tuple
    triples_checked: int

    @property
    def passed(self) -> dict:
        return {
            "lower_bound": not self.below_pi,
            "graph": not self.off_graph,
            "convexity": not self.nonconvex,
        }

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def _axis_triples(grid: ProductGrid):
    shape = grid.shape
    idx = np.arange(grid.size).reshape(shape)
    for k, axis in enumerate(grid.axes):
        if axis.size < 3:
            continue
        moved = np.moveaxis(idx, k, -1).reshape(-1, axis.size)
        fr = [Fraction(float(a)) for a in axis]
        for j in range(1, axis.size - 1):
            lam = (fr[j + 1] - fr[j]) / (fr[j + 1] - fr[j - 1])
            for line in moved:
                yield int(line[j - 1]), int(line[j]), int(line[j + 1]), lam


def ft_membership_grid(T: OperatorSample, grid: ProductGrid, h, tol: float = 0.0) -> FtMembershipReport:
    h = as_valuation(h, grid.size)
    tnodes = sample_nodes(T, grid)
    slack = Fraction(tol)
    pi = pi_grid(grid)
    below = tuple(
        i for i in range(grid.size) if h[i] < ExtReal(FIN, pi[i].value - slack)
    )
    off = tuple(
        i
        for i in sorted(set(tnodes))
        if not (h[i].is_finite and abs(h[i].value - pi[i].value) <= slack)
    )
    bad, count = [], 0
    fin = h.finite
    for l, m, r, lam in _axis_triples(grid):
        if not (fin[l] and fin[m] and fin[r]):
            continue
        count += 1
        if h[m].value > lam * h[l].value + (1 - lam) * h[r].value + slack:
            bad.append((l, m, r))
    return FtMembershipReport(below, off, tuple(bad), count)


@dataclass(frozen=True, eq=False)
class RepresenterResult:
    result: FixpointResult
    membership: FtMembershipReport
    start: str  # "delta_T_plus_pi" or "infinity" (fallback)
    start_check: bool  # J g <= g held for g = delta_T + pi


def self_conjugate_representer(
    T: OperatorSample,
    grid: ProductGrid,
    cfg: Optional[DescentConfig] = None,
    cap: Optional[int] = None,
    tol: Optional[float] = None,
) -> RepresenterResult:
    """A node function ``h = J h`` with ``h >= pi`` and ``h = pi`` on ``T``.

    Descends from ``delta_T + pi`` (whose J image is the Fitzpatrick
    function); if ``J g <= g`` fails there the descent starts from ``+inf``
    instead and ``start`` records the fallback.
    """
    cfg = cfg or DescentConfig()
    _require_monotone(T)
    coupling = build_grid_coupling(grid, cap)
    g = delta_T_plus_pi(T, grid)
    ok = bool(np.all(conjugate1(coupling, g).le(g)))
    start = g if ok else Valuation.constant(grid.size, INF)
    res = solve_fixpoint(coupling, start, cfg)
    report = ft_membership_grid(T, grid, res.h, cfg.tolerance if tol is None else tol)
    return RepresenterResult(res, report, "delta_T_plus_pi" if ok else "infinity", ok)
