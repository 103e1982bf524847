"""The residue fields F_p and F_{p^2}.

An element is stored as an integer code ``a0 + a1*p`` holding its
coordinates in the basis (1, g), g a root of the field modulus.  Codes
give the fixed enumeration order 0, 1, ..., p^m - 1 used for root
selection.  Arithmetic goes through precomputed tables (q <= 121 for
p <= 11).
"""
import re

from .errors import DomainError
from .exact_arith import check_prime

__all__ = ["FieldCtx", "fq_arith", "fq_mult_order", "fq_poly_roots", "parse_modulus",
           "smallest_irreducible"]


def _has_root(p, low):
    # low = (c0, c1, ...) of a monic polynomial without its leading 1
    deg = len(low)
    for x in range(p):
        v = 1
        for c in reversed(low):
            v = (v * x + c) % p
        if v == 0:
            return True
    return False


def smallest_irreducible(p, m):
    """Lexicographically smallest monic irreducible of degree m (m <= 2).

    Order is on the coefficient list read from the top: (1, b, c) for
    g^2 + b*g + c.  Returned as (c, b).
    """
    if m == 1:
        return (0,)
    for b in range(p):
        for c in range(p):
            if not _has_root(p, (c, b)):
                return (c, b)
    raise AssertionError("unreachable: F_p always has an irreducible quadratic")


def parse_modulus(p, s):
    """'g^2+b*g+c' (or 'g' for F_p) -> coefficient tuple (c, b)."""
    s = s.replace(" ", "")
    if s == "g":
        return (0,)
    if not s.startswith("g^2"):
        raise DomainError(f"cannot parse modulus {s!r}")
    b = c = 0
    for tok in filter(None, s[3:].split("+")):
        m = re.fullmatch(r"(?:(\d+)\*)?g", tok)
        if m:
            b += int(m.group(1) or 1)
        elif tok.isdigit():
            c += int(tok)
        else:
            raise DomainError(f"cannot parse modulus {s!r}")
    return (c % p, b % p)


class FieldCtx:
    def __init__(self, p, m=2, modulus=None):
        check_prime(p)
        if m not in (1, 2):
            raise DomainError("only F_p and F_{p^2} are supported")
        self.p = p
        self.m = m
        self.q = p ** m
        if modulus is None:
            modulus = smallest_irreducible(p, m)
        elif isinstance(modulus, str):
            modulus = parse_modulus(p, modulus)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != m:
            raise DomainError("modulus has the wrong degree")
        if m == 2 and _has_root(p, modulus):
            raise DomainError(f"{self._mod_str(modulus)} is reducible over F_{p}")
        self.modulus = modulus
        q = self.q
        self._add = [[self._enc_add(a, b) for b in range(q)] for a in range(q)]
        self._mul = [[self._enc_mul(a, b) for b in range(q)] for a in range(q)]
        self._neg = [self._add_inv(a) for a in range(q)]
        self._inv = [0] * q
        for a in range(1, q):
            for b in range(1, q):
                if self._mul[a][b] == 1:
                    self._inv[a] = b
                    break
        self.zero = 0
        self.one = 1
        self.gen = p if m == 2 else None

    # raw coordinate arithmetic used only to fill the tables
    def coeffs(self, a):
        return (a % self.p, a // self.p) if self.m == 2 else (a,)

    def elem(self, coeffs):
        coeffs = [int(c) % self.p for c in coeffs]
        coeffs += [0] * (self.m - len(coeffs))
        if len(coeffs) > self.m:
            raise DomainError("too many coordinates")
        return coeffs[0] + (coeffs[1] * self.p if self.m == 2 else 0)

    def _enc_add(self, a, b):
        return self.elem([x + y for x, y in zip(self.coeffs(a), self.coeffs(b))])

    def _add_inv(self, a):
        return self.elem([-x for x in self.coeffs(a)])

    def _enc_mul(self, a, b):
        p = self.p
        if self.m == 1:
            return a * b % p
        a0, a1 = self.coeffs(a)
        b0, b1 = self.coeffs(b)
        c, bb = self.modulus
        # g^2 = -bb*g - c
        hi = a1 * b1
        return self.elem([a0 * b0 - hi * c, a0 * b1 + a1 * b0 - hi * bb])

    def add(self, a, b):
        return self._add[a][b]

    def sub(self, a, b):
        return self._add[a][self._neg[b]]

    def mul(self, a, b):
        return self._mul[a][b]

    def neg(self, a):
        return self._neg[a]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in F_q")
        return self._inv[a]

    def pow(self, a, k):
        if k < 0:
            a, k = self.inv(a), -k
        out = 1
        while k:
            if k & 1:
                out = self._mul[out][a]
            a = self._mul[a][a]
            k >>= 1
        return out

    def from_int(self, n):
        return n % self.p

    def frobenius(self, a):
        return self.pow(a, self.p)

    def root_p(self, a):
        """The unique b with b^p = a."""
        return self.pow(a, self.q // self.p)

    def mult_order(self, a):
        if a == 0:
            raise DomainError("0 has no multiplicative order")
        t, x = 1, a
        while x != 1:
            x = self._mul[x][a]
            t += 1
        return t

    def elements(self):
        return range(self.q)

    def eval_poly(self, poly, x):
        """Evaluate a polynomial given highest-degree coefficient first."""
        v = 0
        for c in poly:
            v = self._add[self._mul[v][x]][c]
        return v

    def poly_roots(self, poly):
        if not any(poly):
            raise DomainError("zero polynomial")
        return [x for x in range(self.q) if self.eval_poly(poly, x) == 0]

    # text form
    def fmt(self, a):
        if self.m == 1:
            return str(a)
        a0, a1 = self.coeffs(a)
        parts = []
        if a1:
            parts.append("g" if a1 == 1 else f"{a1}*g")
        if a0 or not parts:
            parts.append(str(a0))
        return "+".join(parts)

    def parse(self, s):
        s = s.replace(" ", "")
        a0 = a1 = 0
        for tok in s.split("+"):
            m = re.fullmatch(r"(?:(\d+)\*)?g", tok)
            if m:
                a1 += int(m.group(1) or 1)
            elif re.fullmatch(r"\d+", tok):
                a0 += int(tok)
            else:
                raise DomainError(f"cannot parse field element {s!r}")
        if a1 and self.m == 1:
            raise DomainError("no generator in F_p")
        return self.elem([a0, a1])

    @staticmethod
    def _mod_str(modulus):
        if len(modulus) == 1:
            return "g"
        c, b = modulus
        s = "g^2"
        if b:
            s += "+g" if b == 1 else f"+{b}*g"
        if c:
            s += f"+{c}"
        return s

    def modulus_str(self):
        return self._mod_str(self.modulus)

    def __eq__(self, other):
        return (isinstance(other, FieldCtx) and self.p == other.p
                and self.m == other.m and self.modulus == other.modulus)

    def __hash__(self):
        return hash((self.p, self.m, self.modulus))

    def __repr__(self):
        return f"FieldCtx(p={self.p}, modulus={self.modulus_str()!r})"


def fq_arith(ctx, a, b, op):
    if op == "add":
        return ctx.add(a, b)
    if op == "mul":
        return ctx.mul(a, b)
    if op == "neg":
        return ctx.neg(a)
    if op == "inv":
        return ctx.inv(a)
    raise DomainError(f"unknown op {op!r}")


def fq_mult_order(ctx, a):
    return ctx.mult_order(a)


def fq_poly_roots(ctx, poly):
    return ctx.poly_roots(poly)
