import json
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from mnfield.errors import DomainError, IndeterminateValuation, OutOfWindow
from mnfield.expansions import Expander
from mnfield.mn_series import (MNContext, mn_add, mn_coeff_at, mn_inv, mn_mul, mn_normalize,
                               mn_pth_root, mn_valuation)
from strategies import mn_elements, nonempty

CTX = {3: MNContext(3), 5: MNContext(5)}


def terms(a):
    return [(x, a.ctx.field.fmt(d)) for x, d in a.terms]


def test_normalize_examples():
    c3, c5 = CTX[3], CTX[5]
    W = c3.witt(4)
    assert terms(mn_normalize(c3, [(Fr(0), W.from_int(4))], 3)) == [(0, "1"), (1, "1")]
    assert terms(mn_normalize(c3, [(Fr(0), W.teich(2))], 3)) == [(0, "2")]
    a = mn_normalize(c5, [(Fr(0), c5.witt(3).from_int(2))], 2)
    assert terms(a) == [(0, "2"), (1, "4")] and a.trunc == 2


def test_normalize_order_independent():
    c = CTX[3]
    W = c.witt(4)
    raw = [(Fr(0), W.from_int(5)), (Fr(1, 2), W.teich(2)), (Fr(0), W.from_int(7)), (Fr(1), W.teich(1))]
    a = mn_normalize(c, raw, 3)
    assert a == mn_normalize(c, raw[::-1], 3)
    assert mn_normalize(c, [(x, W.teich(d)) for x, d in a.terms], 3) == a


def test_add_examples():
    c = CTX[3]
    z = mn_add(c.monomial(1, 0, 2), c.monomial(2, 0, 2))
    assert z.is_empty() and z.trunc == 2
    a = mn_add(c.monomial(1, Fr(1, 2), 2), c.monomial(1, Fr(1, 3), 2))
    assert terms(a) == [(Fr(1, 3), "1"), (Fr(1, 2), "1")]
    # -2 = [1] + [2]*3 in Z_3
    b = mn_add(c.monomial(2, 0, 3), c.monomial(2, 0, 3))
    assert terms(b) == [(0, "1"), (1, "2")]
    assert b == c.from_rational(-2, 3)


def test_mul_examples():
    c = CTX[3]
    a = mn_mul(c.monomial(1, Fr(1, 2), 3), c.monomial(1, Fr(1, 3), 3))
    assert terms(a) == [(Fr(5, 6), "1")]
    x = c.one(3) + c.monomial(1, Fr(1, 2), 3)
    assert terms(x * x) == [(0, "1"), (Fr(1, 2), "2"), (1, "1"), (Fr(3, 2), "1")]
    y = c.from_rational(Fr(1, 2), 1)
    z = c.monomial(1, 2, 10) * y
    assert z.trunc == 3 and all(e >= 2 for e, _ in z.terms)


def test_inv_examples():
    c = CTX[3]
    assert terms(mn_inv(c.monomial(1, Fr(1, 2), 2))) == [(Fr(-1, 2), "1")]
    a = mn_inv(c.from_rational(-2, 3))
    assert terms(a) == [(0, "1"), (1, "1"), (2, "1")] and a.trunc == 3
    with pytest.raises(IndeterminateValuation):
        mn_inv(c.zero(2))


def test_valuation_and_coeff():
    c = CTX[3]
    a = c.monomial(1, Fr(-1, 9), 2) + c.one(2)
    assert mn_valuation(a) == Fr(-1, 9)
    with pytest.raises(IndeterminateValuation):
        mn_valuation(c.zero(2))
    assert mn_coeff_at(c.monomial(1, Fr(1, 2), 2), Fr(1, 2)) == 1
    assert mn_coeff_at(c.monomial(1, Fr(1, 2), 2), Fr(1, 3)) == 0
    with pytest.raises(OutOfWindow):
        mn_coeff_at(a, 7)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_lambda_leading(p):
    E = Expander(p)
    lam = E.Lambda(2)
    assert mn_coeff_at(lam, 0) == 1
    assert mn_valuation(lam - E.ctx.one(2)) == Fr(1, p * (p - 1))


def test_pth_root_examples():
    c = CTX[3]
    assert terms(mn_pth_root(c.one(1))) == [(0, "1")]
    assert terms(mn_pth_root(c.monomial(2, Fr(1, 9), 1))) == [(Fr(1, 27), "2")]
    with pytest.raises(DomainError):
        mn_pth_root(c.monomial(1, Fr(-1, 3), 1))


@pytest.mark.parametrize("p", [3, 5])
def test_pth_root_guarantee(p):
    c = CTX[p]
    a = c.one(1) + c.monomial(2, Fr(1, p * p), 1) + c.monomial(1, Fr(1, 2 * p), 1)
    b = mn_pth_root(a)
    assert ((b ** p) - a).truncate(1).is_empty()


def test_json_golden():
    c = CTX[3]
    a = c.monomial(1, Fr(-1, 9), Fr(2, 3)) + c.monomial(c.field.parse("g"), Fr(1, 6), Fr(2, 3))
    want = ('{"p": 3, "modulus": "g^2+1", "trunc": "2/3", "terms": '
            '[{"exp": "-1/9", "digit": "1"}, {"exp": "1/6", "digit": "g"}]}')
    assert json.dumps(a.to_json()) == want
    assert c.from_json(json.loads(want)) == a


def _eq(a, b):
    return a.congruent(b, min(a.trunc, b.trunc))


@pytest.mark.parametrize("p", [3, 5])
def test_ring_axioms(p):
    c = CTX[p]
    el = mn_elements(c)

    @settings(max_examples=1000)
    @given(el, el, el)
    def check(a, b, d):
        assert _eq(a + b, b + a)
        assert _eq(a * b, b * a)
        assert _eq((a + b) + d, a + (b + d))
        assert _eq((a * b) * d, a * (b * d))
        assert _eq(a * (b + d), a * b + a * d)
        assert (a - a).is_empty()
    check()


@pytest.mark.parametrize("p", [3, 5])
def test_valuation_multiplicative(p):
    c = CTX[p]
    ne = nonempty(c, lo=0)

    @settings(max_examples=300)
    @given(ne, ne)
    def check(a, b):
        prod = a * b
        if not prod.is_empty():
            assert prod.valuation() == a.valuation() + b.valuation()
        else:
            assert a.valuation() + b.valuation() >= prod.trunc
    check()


@pytest.mark.parametrize("p", [3, 5])
def test_inverse_roundtrip(p):
    c = CTX[p]

    @settings(max_examples=200)
    @given(nonempty(c, lo=0, trunc=Fr(3)))
    def check(a):
        b = a.inv()
        assert (a * b).congruent(c.one(5), (a * b).trunc)
        bb = b.inv()
        assert bb.congruent(a, min(bb.trunc, a.trunc))
    check()


@pytest.mark.parametrize("p", [3, 5])
def test_normalize_idempotent(p):
    c = CTX[p]
    W = c.witt(6)

    @settings(max_examples=200)
    @given(mn_elements(c), st.randoms(use_true_random=False))
    def check(a, rnd):
        raw = [(x, W.teich(d)) for x, d in a.terms]
        rnd.shuffle(raw)
        assert mn_normalize(c, raw, a.trunc) == a
    check()


@pytest.mark.parametrize("p", [3, 5])
def test_carry_confinement(p):
    # carries move mass by whole integers only
    c = CTX[p]

    @settings(max_examples=200)
    @given(mn_elements(c), mn_elements(c))
    def check(a, b):
        cosets = {x % 1 for x, _ in a.terms} | {x % 1 for x, _ in b.terms}
        assert all(x % 1 in cosets for x, _ in (a + b).terms)
    check()


@pytest.mark.parametrize("p", [3, 5])
def test_pth_power_small_support(p):
    c = CTX[p]
    F = c.field

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.integers(0, p * p - 1), st.integers(1, F.q - 1)),
                    min_size=1, max_size=4, unique_by=lambda t: t[0]))
    def check(parts):
        t = Fr(2)
        A = c.sum([c.monomial(d, Fr(e, p ** 3), t) for e, d in parts], t)
        r = 1 + p * A.valuation()
        rhs = c.sum([c.monomial(F.pow(d, p), p * x, r) for x, d in A.terms], r)
        assert (A ** p).congruent(rhs, r)
    check()
