"""Bell polynomials, Stirling numbers and the complete-Bell map.

All results are exact integers or Fractions.
"""
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .errors import DomainError

__all__ = ["MultiIndex", "harmonic", "falling_factorial", "bell_incomplete",
           "stirling2", "stirling2_restricted", "stirling2_restricted_rec",
           "restricted_egf_coeffs", "bell_complete_seq", "bell_inverse"]


class MultiIndex(tuple):
    """(j_1, ..., j_l) with norm sum(j) and weight sum(k * j_k)."""

    @property
    def norm(self):
        return sum(self)

    @property
    def weight(self):
        return sum((i + 1) * j for i, j in enumerate(self))

    def factorial(self):
        out = 1
        for j in self:
            out *= factorial(j)
        return out


def harmonic(k):
    if k <= 0:
        raise DomainError("harmonic(k) needs k >= 1")
    return sum((Fraction(1, i) for i in range(1, k + 1)), Fraction(0))


def falling_factorial(x, n):
    if n < 0:
        raise DomainError("falling factorial order must be >= 0")
    out = Fraction(1)
    for i in range(n):
        out *= x - i
    return out


def bell_incomplete(n, k, xs):
    """B_{n,k}(x_1, ..., x_{n-k+1})."""
    if not (n >= k >= 0):
        raise DomainError("bell_incomplete needs n >= k >= 0")
    if len(xs) != n - k + 1:
        raise DomainError(f"B_{{{n},{k}}} takes {n - k + 1} arguments, got {len(xs)}")
    xs = [Fraction(x) for x in xs]
    # table[m][j] = B_{m,j}, using the block that contains the last element
    table = [[Fraction(0)] * (k + 1) for _ in range(n + 1)]
    table[0][0] = Fraction(1)
    for m in range(1, n + 1):
        for j in range(1, min(m, k) + 1):
            acc = Fraction(0)
            for i in range(1, m - j + 2):
                if i - 1 < len(xs) and xs[i - 1]:
                    acc += comb(m - 1, i - 1) * xs[i - 1] * table[m - i][j - 1]
            table[m][j] = acc
    return table[n][k]


@lru_cache(maxsize=None)
def restricted_egf_coeffs(k, r, N):
    """Coefficients of t^0..t^N in (sum_{m=1}^r t^m/m!)^k / k!."""
    base = [Fraction(0)] + [Fraction(1, factorial(m)) if m <= r else Fraction(0)
                            for m in range(1, N + 1)]
    out = [Fraction(1)] + [Fraction(0)] * N
    for _ in range(k):
        nxt = [Fraction(0)] * (N + 1)
        for i, a in enumerate(out):
            if a:
                for j in range(1, N + 1 - i):
                    if base[j]:
                        nxt[i + j] += a * base[j]
        out = nxt
    return tuple(c / factorial(k) for c in out)


def stirling2_restricted(n, k, r):
    """Partitions of an n-set into k blocks of size at most r."""
    if r < 1:
        raise DomainError("restriction r must be >= 1")
    if n < 0 or k < 0:
        raise DomainError("negative index")
    if n < k:
        return 0
    c = restricted_egf_coeffs(k, min(r, n), n)[n] * factorial(n)
    assert c.denominator == 1
    return int(c)


@lru_cache(maxsize=None)
def stirling2_restricted_rec(n, k, r):
    """Same count as stirling2_restricted, by the last-element recurrence."""
    if n == 0:
        return 1 if k == 0 else 0
    if k == 0 or n < k:
        return 0
    return sum(comb(n - 1, i - 1) * stirling2_restricted_rec(n - i, k - 1, r)
               for i in range(1, min(r, n) + 1))


def stirling2(n, k):
    if n < 0 or k < 0:
        raise DomainError("negative index")
    if n < k:
        return 0
    return stirling2_restricted(n, k, max(n, 1))


def bell_complete_seq(xs):
    """(B_1(x_1), ..., B_n(x_1..x_n)) for complete Bell polynomials B_i."""
    if not xs:
        raise DomainError("empty input")
    xs = [Fraction(x) for x in xs]
    B = [Fraction(1)]
    for n in range(len(xs)):
        B.append(sum((comb(n, i) * B[n - i] * xs[i] for i in range(n + 1)), Fraction(0)))
    return B[1:]


def bell_inverse(ys, method="recurrence"):
    """The unique xs with bell_complete_seq(xs) == ys."""
    if not ys:
        raise DomainError("empty input")
    ys = [Fraction(y) for y in ys]
    n = len(ys)
    if method == "recurrence":
        xs = []
        for m in range(n):
            # x_{m+1} = y_{m+1} - sum_{i<m} C(m, i) B_{m-i} x_{i+1}; B_j is y_j
            acc = ys[m]
            for i in range(m):
                acc -= comb(m, i) * ys[m - i - 1] * xs[i]
            xs.append(acc)
        return xs
    if method == "riordan":
        return [sum(((-1) ** (k - 1) * factorial(k - 1) * bell_incomplete(i, k, ys[:i - k + 1])
                     for k in range(1, i + 1)), Fraction(0))
                for i in range(1, n + 1)]
    raise DomainError(f"unknown method {method!r}")
