import re
import numpy as np
import pytest
from hypothesis import given, settings

import oracle
from conftest import as_oracle, coupling_and_h, exact_h, exact_phi
from conjfix.core import (
    CouplingMatrix,
    conjugate1,
    conjugate2,
    diag_halves,
    indicator,
    is_in_H,
    max_conjugate,
    sym_conjugate,
    symmetrize,
)
from conjfix.errors import ContractError, PreconditionError
from conjfix.valuation import Valuation

SWAP = CouplingMatrix.from_floats([[0, 1], [1, 0]])


def counterexample():
    return CouplingMatrix.from_floats([[0, -3], [0, -3]], labels=["a", "b"]), Valuation.of([1, -1])


def test_two_point_table():
    phi, h = counterexample()
    assert conjugate1(phi, h) == Valuation.of([1, -2])
    assert conjugate2(phi, h) == Valuation.of([-1, -1])


def test_all_inf_gives_all_neg_inf():
    phi = CouplingMatrix.from_floats(np.arange(9.0).reshape(3, 3))
    h = Valuation.constant(3)
    assert conjugate1(phi, h).tokens() == ["-inf"] * 3
    assert conjugate2(phi, h).tokens() == ["-inf"] * 3


def test_neg_inf_entry_gives_all_inf():
    h = Valuation.of(["-inf", 0])
    assert conjugate1(SWAP, h).tokens() == ["inf", "inf"]
    assert not is_in_H(SWAP, h)


def test_swap_examples():
    assert conjugate1(SWAP, [0, 0]) == Valuation.of([1, 1])
    assert conjugate2(SWAP, [0, "inf"]) == Valuation.of([0, 1])


def test_sym_conjugate_requires_symmetry():
    phi, h = counterexample()
    with pytest.raises(PreconditionError):
        sym_conjugate(phi, h)
    assert sym_conjugate(SWAP, [0, 0]) == conjugate1(SWAP, [0, 0])


def test_dimension_mismatch():
    with pytest.raises(ContractError):
        conjugate1(SWAP, [0, 0, 0])


def test_symmetrize_examples():
    phi, _ = counterexample()
    s = symmetrize(phi)
    np.testing.assert_array_equal(s.phi, [[0, 0], [0, -3]])
    assert s.symmetric and not phi.symmetric
    np.testing.assert_array_equal(symmetrize(CouplingMatrix.from_floats([[1, 5], [2, 3]])).phi, [[1, 5], [5, 3]])
    np.testing.assert_array_equal(symmetrize(SWAP).phi, SWAP.phi)


def test_symmetry_is_bit_exact():
    eps = np.nextafter(1.0, 2.0)
    assert not CouplingMatrix.from_floats([[0, 1.0], [eps, 0]]).symmetric


def test_indicator():
    assert indicator(2, {0}).tokens() == [0.0, "inf"]
    assert indicator(3, {0, 2}, 5).tokens() == [5.0, "inf", 5.0]
    with pytest.raises(ContractError):
        indicator(3, set())
    with pytest.raises(ContractError):
        indicator(3, {0}, "-inf")
    with pytest.raises(ContractError):
        indicator(3, {3})


def test_conjugate_of_indicator_is_a_row():
    phi = CouplingMatrix.from_floats(np.array([[1.5, -2, 3], [0, 4, -1], [2, 2, 2]]))
    out = conjugate1(phi, indicator(3, {1}, 0.25))
    np.testing.assert_array_equal(out.to_floats(), phi.phi[1] - 0.25)


def test_membership_examples():
    phi, h = counterexample()
    assert is_in_H(phi, h)
    assert is_in_H(phi, Valuation.constant(2))
    m = is_in_H(SWAP, [0, 0])
    assert not m and m.witness == 0


def test_diag_halves():
    phi, _ = counterexample()
    assert diag_halves(phi).tokens() == [0.0, -1.5]
    assert diag_halves(CouplingMatrix.from_floats(np.zeros((3, 3)))).tokens() == [0.0] * 3
    assert diag_halves(CouplingMatrix.from_floats([[4]])).tokens() == [2.0]


@pytest.mark.parametrize(
    "rows, message",
    [([[0, 1], [2]], "row 1"), ([[0, float("nan")], [1, 2]], "phi[0][1]"), ([], "square")],
)
def test_coupling_validation(rows, message):
    with pytest.raises(ContractError, match=re.escape(message)):
        CouplingMatrix.from_floats(rows)


def test_labels_must_be_distinct():
    with pytest.raises(ContractError):
        CouplingMatrix.from_floats([[0, 0], [0, 0]], labels=["a", "a"])


@given(coupling_and_h())
def test_conjugates_match_brute_force(case):
    phi, h = case
    P = CouplingMatrix.from_floats(phi)
    v = Valuation.from_floats(h)
    ph, hh = exact_phi(phi), exact_h(h)
    assert as_oracle(conjugate1(P, v)) == oracle.conj1(ph, hh)
    assert as_oracle(conjugate2(P, v)) == oracle.conj2(ph, hh)
    assert bool(is_in_H(P, v)) == oracle.le(oracle.conj1(ph, hh), hh)


@given(coupling_and_h())
def test_symmetrized_conjugate_is_max(case):
    phi, h = case
    P = CouplingMatrix.from_floats(phi)
    assert conjugate1(symmetrize(P), h) == max_conjugate(P, h)
    assert bool(is_in_H(symmetrize(P), h)) == bool(is_in_H(P, h))


@settings(max_examples=50)
@given(coupling_and_h(max_n=40))
def test_conjugation_deterministic(case):
    phi, h = case
    P = CouplingMatrix.from_floats(phi)
    a, b = conjugate1(P, h), conjugate1(P, h)
    assert a == b and a.tokens() == b.tokens()


def test_blocked_reduction_matches_oracle():
    rng = np.random.default_rng(7)
    phi = rng.uniform(-10, 10, (300, 300))
    h = rng.uniform(-10, 10, 300)
    h[rng.random(300) < 0.3] = np.inf
    got = as_oracle(conjugate2(CouplingMatrix.from_floats(phi), h))
    assert got == oracle.conj2(exact_phi(phi), exact_h(h))
