from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gsedtiles.dyadic import Dyadic

dy = st.builds(Dyadic, st.integers(-10 ** 6, 10 ** 6), st.integers(0, 40))


@given(dy, dy)
def test_arithmetic_matches_fractions(a, b):
    fa, fb = a.to_fraction(), b.to_fraction()
    assert (a + b).to_fraction() == fa + fb
    assert (a - b).to_fraction() == fa - fb
    assert (a * b).to_fraction() == fa * fb
    assert (a < b) == (fa < fb)


@given(dy)
def test_canonical_and_binary_round_trip(a):
    assert a.numerator % 2 == 1 or a.exponent == 0
    assert Dyadic.parse(a.binary()) == a


def test_examples():
    assert Dyadic(1, 9).binary() == "0b0.000000001"
    assert Dyadic(4, 3) == Dyadic(1, 1)
    assert Dyadic.parse("0b0.0001") == Fraction(1, 16)
    with pytest.raises(ValueError):
        Dyadic.from_fraction(Fraction(1, 3))


@given(st.fractions(), st.integers(0, 30))
def test_floor_ceil_bracket(q, bits):
    lo, hi = Dyadic.floor(q, bits), Dyadic.ceil(q, bits)
    assert lo.to_fraction() <= q <= hi.to_fraction()
    assert hi.to_fraction() - lo.to_fraction() <= Fraction(1, 2 ** bits)
