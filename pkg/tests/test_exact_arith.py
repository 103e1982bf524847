from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mnfield.errors import InvalidPrime
from mnfield.exact_arith import INF, check_prime, frac_str, is_odd_prime, parse_frac, vp_rational


@pytest.mark.parametrize("q, p, v", [
    (Fraction(9, 2), 3, 2),
    (0, 5, INF),
    (Fraction(11, 6), 3, -1),
    (Fraction(50, 7), 5, 2),
    (1, 7, 0),
])
def test_vp_rational_examples(q, p, v):
    assert vp_rational(q, p) == v


@pytest.mark.parametrize("p", [2, 4, 1, 0, -3, 9, 15])
def test_invalid_primes(p):
    assert not is_odd_prime(p)
    with pytest.raises(InvalidPrime):
        vp_rational(3, p)


def test_primes():
    assert [p for p in range(30) if is_odd_prime(p)] == [3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert check_prime(11) == 11


@pytest.mark.parametrize("q, s", [(Fraction(2, 3), "2/3"), (Fraction(-1, 9), "-1/9"), (0, "0/1"), (4, "4/1")])
def test_frac_str_roundtrip(q, s):
    assert frac_str(q) == s
    assert parse_frac(s) == q


nonzero = st.fractions(max_denominator=10 ** 6).filter(lambda x: x != 0)


@given(nonzero, nonzero, st.sampled_from([3, 5, 7]))
def test_valuation_is_a_valuation(a, b, p):
    assert vp_rational(a * b, p) == vp_rational(a, p) + vp_rational(b, p)
    va, vb = vp_rational(a, p), vp_rational(b, p)
    s = vp_rational(a + b, p)
    assert s >= min(va, vb)
    if va != vb:
        assert s == min(va, vb)
