import pytest

from mnfield.errors import DomainError
from mnfield.gfq import FieldCtx, parse_modulus, smallest_irreducible


def test_examples():
    F = FieldCtx(3)
    assert F.modulus_str() == "g^2+1"
    g = F.parse("g")
    assert F.mul(g, g) == F.from_int(2)
    assert F.inv(1) == 1
    F5 = FieldCtx(5, 1)
    assert F5.add(2, 4) == 1


def test_orders():
    F = FieldCtx(3)
    assert F.mult_order(1) == 1
    assert F.mult_order(F.parse("g")) == 4
    F5 = FieldCtx(5)
    assert max(F5.mult_order(a) for a in range(1, 25)) == 24
    with pytest.raises(DomainError):
        F.mult_order(0)


def test_roots():
    F3 = FieldCtx(3, 1)
    assert F3.poly_roots([1, 0, 2]) == [1, 2]
    assert F3.poly_roots([1, 0, 1]) == []
    F = FieldCtx(3)
    assert [F.fmt(x) for x in F.poly_roots([1, 0, 1])] == ["g", "2*g"]
    # T^6 + T^3 + 1 = (T - 1)^6 mod 3
    assert F.poly_roots([1, 0, 0, 1, 0, 0, 1]) == [1]


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_modulus_is_lex_smallest(p):
    F = FieldCtx(p)
    c, b = F.modulus
    for bb in range(p):
        for cc in range(p):
            if (bb, cc) >= (b, c):
                break
            # every lexicographically smaller candidate has a root
            assert any((x * x + bb * x + cc) % p == 0 for x in range(p))
    assert smallest_irreducible(p, 2) == F.modulus


def test_alternative_modulus():
    F = FieldCtx(3, 2, "g^2+g+2")
    assert F.modulus == (2, 1)
    assert parse_modulus(3, F.modulus_str()) == (2, 1)
    with pytest.raises(DomainError):
        FieldCtx(3, 2, "g^2+2")


@pytest.mark.parametrize("p", [3, 5, 7])
def test_frobenius_automorphism(p):
    F = FieldCtx(p)
    fr = [F.frobenius(a) for a in range(F.q)]
    assert sorted(fr) == list(range(F.q))
    for a in range(F.q):
        for b in range(F.q):
            assert fr[F.add(a, b)] == F.add(fr[a], fr[b])
            assert fr[F.mul(a, b)] == F.mul(fr[a], fr[b])
    for a in range(p):
        assert fr[F.from_int(a)] == F.from_int(a)


def test_field_axioms_exhaustive():
    F = FieldCtx(5)
    for a in range(F.q):
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1
        assert F.fmt(a) == F.fmt(F.parse(F.fmt(a)))
        assert F.parse(F.fmt(a)) == a
