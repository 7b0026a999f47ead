from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracle
from conftest import as_oracle
from conjfix.core import diag_halves
from conjfix.errors import ContractError, PreconditionError, ResourceError
from conjfix.extreal import ExtReal
from conjfix.fitzpatrick import (
    NODE_CAP_ENV,
    OperatorSample,
    ProductGrid,
    build_grid_coupling,
    delta_T_plus_pi,
    duality_product,
    fitzpatrick_grid,
    fitzpatrick_value,
    ft_membership_grid,
    j_transform_grid,
    monotonicity_check,
    node_cap,
    pi_grid,
    sample_nodes,
    self_conjugate_representer,
)
from conjfix.fixpoint import DescentConfig, minimality_probe
from conjfix.valuation import Valuation

AXIS = np.linspace(-2, 2, 11)
GRID = ProductGrid((AXIS,), (AXIS,))
IDENTITY = OperatorSample.from_pairs([(x, x) for x in AXIS])


def oracle_nodes(grid):
    return list(oracle.grid_nodes([a.tolist() for a in grid.x_axes], [a.tolist() for a in grid.xstar_axes]))


def test_duality_product():
    assert duality_product([0], [7.5]) == 0
    assert duality_product(2, 3) == 6
    assert duality_product([1, 2], [3, 4]) == 11
    with pytest.raises(ContractError):
        duality_product([1, 2], [3])


def test_monotonicity():
    assert monotonicity_check(IDENTITY)
    rep = monotonicity_check(OperatorSample.from_pairs([(0, 1), (1, 0)]))
    assert not rep and rep.pair == (0, 1) and rep.value == -1
    assert monotonicity_check(OperatorSample.from_pairs([(3, -4)]))


@pytest.mark.parametrize(
    "points, duals",
    [(np.zeros((0, 1)), np.zeros((0, 1))), ([[0, 0, 0]], [[1, 1, 1]]), ([[0]], [[np.nan]]), ([[0]], [[1, 2]])],
)
def test_operator_validation(points, duals):
    with pytest.raises(ContractError):
        OperatorSample(points, duals)


def test_grid_validation():
    with pytest.raises(ContractError):
        ProductGrid(([0, 0, 1],), ([0],))
    with pytest.raises(ContractError):
        ProductGrid(([0],), ())
    with pytest.raises(ContractError):
        ProductGrid(([],), ([0],))


def test_grid_ordering_row_major():
    g = ProductGrid(([0, 1],), ([10, 20, 30],))
    X, XS = g.nodes()
    np.testing.assert_array_equal(X[:, 0], [0, 0, 0, 1, 1, 1])
    np.testing.assert_array_equal(XS[:, 0], [10, 20, 30, 10, 20, 30])
    assert g.node_index(1, 20) == 4 and g.node_index(0.5, 20) is None


def test_fitzpatrick_value_examples():
    T0 = OperatorSample.from_pairs([(0, 0)])
    for x, xs in [(1, 2), (-3, 0.5), (0, 0)]:
        assert fitzpatrick_value(T0, x, xs) == ExtReal.of(0)
    for x in AXIS:
        assert fitzpatrick_value(IDENTITY, x, x) == ExtReal.of(Fraction(x) * Fraction(x))
    T = OperatorSample.from_pairs([(y, y) for y in np.arange(-2, 2.01, 0.5)])
    assert fitzpatrick_value(T, 1, 0) == ExtReal.of(0.25)


def test_fitzpatrick_value_rejects_non_monotone():
    with pytest.raises(PreconditionError):
        fitzpatrick_value(OperatorSample.from_pairs([(0, 1), (1, 0)]), 0, 0)


def test_grid_coupling_examples():
    one = build_grid_coupling(ProductGrid(([1.5],), ([-2.0],)))
    np.testing.assert_array_equal(one.phi, [[-6.0]])
    two = ProductGrid(([0, 1],), ([0, 1],))
    P = build_grid_coupling(two)
    # nodes (0,0), (0,1), (1,0), (1,1)
    assert P.phi[0, 3] == 0 and P.phi[3, 3] == 2 and P.phi[1, 2] == 1
    assert P.symmetric


def test_diag_halves_equal_pi():
    for grid in (GRID, ProductGrid.uniform(2, -1, 1, 3), ProductGrid(([0.1, 0.7],), ([-0.3, 0.2, 0.9],))):
        assert diag_halves(build_grid_coupling(grid)) == pi_grid(grid)


def test_node_cap(monkeypatch):
    monkeypatch.setenv(NODE_CAP_ENV, "100")
    assert node_cap() == 100
    with pytest.raises(ResourceError):
        build_grid_coupling(GRID)
    assert build_grid_coupling(GRID, cap=200).n == 121
    monkeypatch.delenv(NODE_CAP_ENV)
    assert node_cap() == 5000


def test_j_transform_examples():
    g = ProductGrid(([1.5],), ([-2.0],))
    assert j_transform_grid(g, [1]).tokens() == [-7.0]
    assert j_transform_grid(GRID, Valuation.constant(GRID.size)).tokens() == ["-inf"] * GRID.size


@given(st.lists(st.one_of(st.floats(-5, 5), st.just(np.inf)), min_size=16, max_size=16))
def test_j_squared_below_identity(values):
    grid = ProductGrid.uniform(1, -1, 1, 4)
    h = Valuation.from_floats(values)
    jj = j_transform_grid(grid, j_transform_grid(grid, h))
    assert np.all(jj.le(h))
    nodes = oracle_nodes(grid)
    hh = [oracle.ext(float(v)) for v in values]
    assert as_oracle(j_transform_grid(grid, h)) == oracle.j_transform(nodes, hh)


def test_fitzpatrick_grid_matches_oracle():
    pairs = [(tuple(x), tuple(xs)) for x, xs in zip(IDENTITY.points.tolist(), IDENTITY.duals.tolist())]
    got = as_oracle(fitzpatrick_grid(IDENTITY, GRID))
    want = [oracle.fitzpatrick(pairs, x, xs) for x, xs in oracle_nodes(GRID)]
    assert got == want


def test_j_of_delta_plus_pi_is_fitzpatrick():
    coupling = build_grid_coupling(GRID)
    assert j_transform_grid(GRID, delta_T_plus_pi(IDENTITY, GRID), coupling) == fitzpatrick_grid(IDENTITY, GRID)


def test_two_dimensional_identities():
    ax = [-1.0, 0.0, 1.0]
    grid = ProductGrid((ax, ax), (ax, ax))
    T = OperatorSample.from_pairs([((a, b), (a, b)) for a in ax for b in ax])
    ft = fitzpatrick_grid(T, grid)
    assert j_transform_grid(grid, delta_T_plus_pi(T, grid)) == ft
    pi = pi_grid(grid)
    assert all(ft[i] == pi[i] for i in sample_nodes(T, grid))
    rep = self_conjugate_representer(T, grid)
    assert rep.result.exact and rep.membership.passed["lower_bound"] and rep.membership.passed["graph"]


def test_sample_nodes_off_grid():
    with pytest.raises(PreconditionError, match="sample pair 0"):
        sample_nodes(OperatorSample.from_pairs([(0.3, 0.3)]), GRID)


def test_ft_membership_examples():
    ft = fitzpatrick_grid(IDENTITY, GRID)
    rep = ft_membership_grid(IDENTITY, GRID, ft)
    assert rep.passed["lower_bound"] and rep.passed["graph"]
    # pi is affine along each axis, so every condition holds for it
    rep = ft_membership_grid(IDENTITY, GRID, pi_grid(GRID))
    assert rep.ok and rep.triples_checked == 2 * 11 * 9
    rep = ft_membership_grid(IDENTITY, GRID, Valuation.constant(GRID.size))
    assert rep.passed == {"lower_bound": True, "graph": False, "convexity": True}
    assert len(rep.off_graph) == 11 and rep.triples_checked == 0


def test_ft_membership_flags_each_condition():
    pi = pi_grid(GRID)
    i = GRID.node_index(AXIS[6], AXIS[4])
    below = pi.replace(i, float(pi[i]) - 1)
    rep = ft_membership_grid(IDENTITY, GRID, below)
    # the dip is an endpoint of every broken triple, never the middle
    assert rep.below_pi == (i,) and rep.off_graph == ()
    assert rep.nonconvex and all(t[1] != i and i in t for t in rep.nonconvex)
    bump = pi.replace(i, float(pi[i]) + 1)
    rep = ft_membership_grid(IDENTITY, GRID, bump)
    assert rep.below_pi == () and any(t[1] == i for t in rep.nonconvex)
    j = GRID.node_index(AXIS[6], AXIS[6])
    rep = ft_membership_grid(IDENTITY, GRID, pi.replace(j, float(pi[j]) + 1e-3), tol=1e-2)
    assert rep.ok


def test_uneven_axis_uses_weighted_convexity():
    # h = x* ** 2 sampled on uneven x* nodes is convex though not midpoint-linear
    grid = ProductGrid(([0.0],), ([0.0, 1.0, 3.0],))
    T = OperatorSample.from_pairs([(0, 0)])
    rep = ft_membership_grid(T, grid, [0, 1, 9])
    assert rep.passed["convexity"]
    rep = ft_membership_grid(T, grid, [0, 4, 9])
    assert not rep.passed["convexity"]


def test_representer_single_node():
    grid = ProductGrid(([0.0],), ([0.0],))
    rep = self_conjugate_representer(OperatorSample.from_pairs([(0, 0)]), grid)
    assert rep.result.h.tokens() == [0.0] and rep.start == "delta_T_plus_pi"


def test_representer_single_pair_sandwich():
    grid = ProductGrid(([0, 1],), ([0, 1],))
    T = OperatorSample.from_pairs([(1, 1)])
    rep = self_conjugate_representer(T, grid)
    res = rep.result
    g = delta_T_plus_pi(T, grid)
    assert res.converged and rep.start_check
    assert np.all(j_transform_grid(grid, g).le(res.h)) and np.all(res.h.le(g))
    nodes = oracle_nodes(grid)
    assert oracle.j_transform(nodes, as_oracle(res.h)) == as_oracle(res.h)


def test_representer_identity_grid():
    rep = self_conjugate_representer(IDENTITY, GRID, DescentConfig(tolerance=1e-6))
    h = rep.result.h
    assert rep.result.converged and rep.membership.passed["lower_bound"] and rep.membership.passed["graph"]
    assert np.all(pi_grid(GRID).le(h))
    assert oracle.j_transform(oracle_nodes(GRID), as_oracle(h)) == as_oracle(h)
    assert minimality_probe(build_grid_coupling(GRID), h, 1e-3, tolerance=0.0).ok


def test_representer_rejects_non_monotone():
    with pytest.raises(PreconditionError):
        self_conjugate_representer(OperatorSample.from_pairs([(0, 1), (1, 0)]), ProductGrid(([0, 1],), ([0, 1],)))
