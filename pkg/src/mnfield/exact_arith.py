"""Exact rationals and p-adic valuations.

Rationals are :class:`fractions.Fraction` throughout; nothing here ever
touches floating point.
"""
from fractions import Fraction
from math import inf

from .errors import InvalidPrime

__all__ = ["Fraction", "INF", "is_odd_prime", "check_prime", "vp_int",
           "vp_rational", "frac_str", "parse_frac", "as_frac"]

INF = inf


def is_odd_prime(p):
    if not isinstance(p, int) or isinstance(p, bool) or p < 3 or p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def check_prime(p):
    if not is_odd_prime(p):
        raise InvalidPrime(f"{p!r} is not an odd prime")
    return p


def vp_int(n, p):
    """Exponent of p in the nonzero integer n."""
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def vp_rational(q, p):
    """p-adic valuation of a rational; +inf for zero."""
    check_prime(p)
    q = Fraction(q)
    if q == 0:
        return INF
    return vp_int(q.numerator, p) - vp_int(q.denominator, p)


def as_frac(x):
    if isinstance(x, str):
        return parse_frac(x)
    return Fraction(x)


def frac_str(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_frac(s):
    return Fraction(s.strip())
