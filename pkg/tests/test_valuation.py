from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conjfix.errors import ContractError
from conjfix.extreal import INF, NEG_INF, ExtReal
from conjfix.valuation import (
    Valuation,
    abs_difference,
    as_valuation,
    compare,
    difference,
    maximum,
    minimum,
)

ext_floats = st.one_of(
    st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False), st.sampled_from([np.inf, -np.inf])
)


def test_mixed_constructor():
    v = Valuation.of([1, "inf", -0.5, Fraction(3, 8), "-inf"])
    assert v.tokens() == [1.0, "inf", -0.5, 0.375, "-inf"]
    assert len(v) == 5
    assert v[1] == INF and v[4] == NEG_INF


def test_constant_and_replace():
    v = Valuation.constant(3)
    assert all(x == INF for x in v)
    w = v.replace(1, 2.5)
    assert w.tokens() == ["inf", 2.5, "inf"]
    assert v.tokens() == ["inf"] * 3


def test_arrays_read_only():
    v = Valuation.of([1, 2])
    with pytest.raises(ValueError):
        v.units[0] = 7


def test_from_floats_rejects_nan():
    with pytest.raises(ValueError):
        Valuation.from_floats([0.0, np.nan])


@given(st.lists(ext_floats, min_size=1, max_size=12))
def test_float_roundtrip(values):
    v = Valuation.from_floats(values)
    np.testing.assert_array_equal(v.to_floats(), np.array(values))
    assert Valuation.of(v.tokens()) == v


@given(st.lists(st.tuples(ext_floats, ext_floats), min_size=1, max_size=10))
def test_comparisons_match_floats(pairs):
    a = Valuation.from_floats([p for p, _ in pairs])
    b = Valuation.from_floats([q for _, q in pairs])
    af, bf = np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])
    np.testing.assert_array_equal(a.le(b), af <= bf)
    np.testing.assert_array_equal(a.lt(b), af < bf)
    np.testing.assert_array_equal(compare(a, b), (af > bf).astype(int) - (af < bf).astype(int))
    np.testing.assert_array_equal(maximum(a, b).to_floats(), np.maximum(af, bf))
    np.testing.assert_array_equal(minimum(a, b).to_floats(), np.minimum(af, bf))


def test_difference_conventions():
    a = Valuation.of(["inf", "-inf", 3, "inf"])
    b = Valuation.of(["inf", "-inf", 1, 0])
    assert difference(a, b).tokens() == [0.0, 0.0, 2.0, "inf"]
    assert abs_difference(b, a).tokens() == [0.0, 0.0, 2.0, "inf"]


def test_argmax_ties_lowest_index():
    assert Valuation.of([1, 3, 3, 2]).argmax() == 1
    assert Valuation.of(["inf", 1, "inf"]).argmax() == 0
    assert Valuation.of(["-inf", "-inf"]).max() == NEG_INF


def test_equality_is_exact():
    a = Valuation.of([Fraction(1) + Fraction(1, 2**70)])
    b = Valuation.of([1])
    assert a != b
    assert a.to_floats()[0] == 1.0


def test_as_valuation_length_check():
    with pytest.raises(ContractError):
        as_valuation([1, 2], 3)
    assert as_valuation(np.array([1.0, np.inf]), 2).tokens() == [1.0, "inf"]


def test_common_exponent_mixes_scales():
    v = Valuation.of([1e300, 5e-324, 0])
    assert v[0] == ExtReal.of(1e300) and v[1] == ExtReal.of(5e-324)
