"""Truncated canonical elements of the p-adic Mal'cev-Neumann field.

An :class:`MNElement` is a finite sum of Teichmueller monomials
``[d] p^e`` with distinct rational exponents, plus a truncation order
``t`` meaning ``+ O(p^t)``.  The finite sum is treated as an exact
representative; ``t`` is the error bound.

Exponents live on the lattice (1/D)Z with D = p^N (p - 1) and are stored
as integers ``e * D``; every exponent the engine meets (k/(p^n (p-1)),
1/p^k, their sums) is on that lattice for N large enough.  Carries only
ever move mass by integer steps, so normalisation works one coset of
Q/Z at a time and only where two terms actually collide.
"""
from collections import defaultdict
from fractions import Fraction
from math import comb

from .errors import (DomainError, IndeterminateValuation, OutOfWindow,
                     PrecisionError)
from .exact_arith import check_prime, frac_str, vp_int
from .gfq import FieldCtx
from .witt import WittCtx

__all__ = ["MNContext", "MNElement", "mn_normalize", "mn_add", "mn_mul",
           "mn_inv", "mn_valuation", "mn_coeff_at", "mn_pth_root"]

LATTICE_DEPTH = 16


def _ceil_div(a, b):
    return -((-a) // b)


class MNContext:
    """Ambient data shared by elements: residue field, lattice, Witt caches."""

    def __init__(self, p, modulus=None, guard_digits=2, depth=LATTICE_DEPTH):
        check_prime(p)
        if guard_digits < 1:
            raise DomainError("guard_digits must be >= 1")
        self.p = p
        self.field = FieldCtx(p, 2, modulus)
        self.guard = guard_digits
        self.D = p ** depth * (p - 1)
        self._witt = {}

    def witt(self, s):
        w = self._witt.get(s)
        if w is None:
            w = self._witt[s] = WittCtx(self.field, s)
        return w

    # lattice conversion
    def to_lat(self, x):
        x = Fraction(x)
        n = x * self.D
        if n.denominator != 1:
            raise DomainError(f"exponent {x} is off the lattice 1/{self.D}")
        return n.numerator

    def from_lat(self, n):
        return Fraction(n, self.D)

    # constructors
    def zero(self, trunc):
        return MNElement(self, (), (), self.to_lat(trunc))

    def one(self, trunc):
        return self.monomial(1, 0, trunc)

    def monomial(self, digit, exp, trunc):
        """[digit] p^exp + O(p^trunc)."""
        if isinstance(digit, str):
            digit = self.field.parse(digit)
        e, t = self.to_lat(exp), self.to_lat(trunc)
        if digit == 0 or e >= t:
            return MNElement(self, (), (), t)
        return MNElement(self, (e,), (digit,), t)

    def from_rational(self, q, trunc, exp=0):
        """q * p^exp for rational q, canonicalised below trunc."""
        q = Fraction(q)
        t = self.to_lat(trunc)
        if q == 0:
            return MNElement(self, (), (), t)
        v = vp_int(q.numerator, self.p) - vp_int(q.denominator, self.p)
        e = self.to_lat(exp) + v * self.D
        if e >= t:
            return MNElement(self, (), (), t)
        s = _ceil_div(t - e, self.D) + self.guard
        mod = self.p ** s
        u = q / Fraction(self.p) ** v
        w = u.numerator * pow(u.denominator, -1, mod) % mod
        return _canon(self, {}, {e: (w, 0)}, t)

    def from_witt(self, w, exp, trunc):
        """A Witt-ring value (a0, a1) placed at p^exp."""
        t = self.to_lat(trunc)
        return _canon(self, {}, {self.to_lat(exp): (int(w[0]), int(w[1]))}, t)

    def normalize(self, raw, trunc):
        """Canonical form of sum(w * p^exp) over raw (exp, WittElem) pairs."""
        t = self.to_lat(trunc)
        extra = defaultdict(lambda: [0, 0])
        for exp, w in raw:
            e = self.to_lat(exp)
            acc = extra[e]
            acc[0] += int(w[0])
            acc[1] += int(w[1])
        return _canon(self, {}, {e: tuple(w) for e, w in extra.items()}, t)

    def sum(self, items, trunc=None):
        items = list(items)
        if not items:
            if trunc is None:
                raise DomainError("empty sum needs an explicit trunc")
            return self.zero(trunc)
        t = min(a._t for a in items)
        if trunc is not None:
            t = min(t, self.to_lat(trunc))
        buckets = defaultdict(list)
        for a in items:
            for e, d in zip(a._e, a._d):
                if e < t:
                    buckets[e].append(d)
        return _canon(self, buckets, {}, t)

    def from_json(self, obj):
        if obj["p"] != self.p or obj["modulus"] != self.field.modulus_str():
            raise DomainError("JSON element belongs to a different context")
        t = self.to_lat(Fraction(obj["trunc"]))
        es, ds = [], []
        for term in obj["terms"]:
            es.append(self.to_lat(Fraction(term["exp"])))
            ds.append(self.field.parse(term["digit"]))
        return MNElement(self, tuple(es), tuple(ds), t)

    def __eq__(self, other):
        return (isinstance(other, MNContext) and self.field == other.field
                and self.D == other.D)

    def __hash__(self):
        return hash((self.field, self.D))

    def __repr__(self):
        return f"MNContext(p={self.p}, modulus={self.field.modulus_str()!r})"


def _canon(ctx, buckets, extra, t):
    """Canonical element from Teichmueller buckets and raw Witt values.

    buckets: exponent -> list of digit codes (each contributes [code]);
    extra: exponent -> (a0, a1) integers in the lifted basis.
    Everything at exponents >= t is discarded.
    """
    D, p = ctx.D, ctx.p
    by_coset = defaultdict(list)
    for e in buckets:
        if e < t:
            by_coset[e % D].append(e)
    for e in extra:
        if e < t and e not in buckets:
            by_coset[e % D].append(e)
    out = []
    for es in by_coset.values():
        clean = all(len(buckets.get(e, ())) + (e in extra) == 1 for e in es)
        if clean and not any(e in extra for e in es):
            for e in es:
                d = buckets[e][0]
                if d:
                    out.append((e, d))
            continue
        es.sort()
        base = es[0]
        s = _ceil_div(t - base, D)
        W = ctx.witt(s + ctx.guard)
        mod = W.N
        w0 = w1 = 0
        for e in es:
            k = (e - base) // D
            if k >= s:
                break
            pk = p ** k
            b = buckets.get(e)
            if b:
                for d in b:
                    if d:
                        tc = W.teich(d)
                        w0 += pk * tc[0]
                        w1 += pk * tc[1]
            x = extra.get(e)
            if x:
                w0 += pk * x[0]
                w1 += pk * x[1]
        w0 %= mod
        w1 %= mod
        for i in range(s):
            if not (w0 or w1):
                break
            d = (w0 % p) + (w1 % p) * p
            if d:
                out.append((base + i * D, d))
                tc = W.teich(d)
                w0 -= tc[0]
                w1 -= tc[1]
            w0 = (w0 // p) % mod
            w1 = (w1 // p) % mod
    out.sort()
    return MNElement(ctx, tuple(e for e, _ in out), tuple(d for _, d in out), t)


def _mul_terms(ctx, a, b, t):
    """Exact product of the finite representatives, kept below t."""
    F = ctx.field._mul
    buckets = defaultdict(list)
    be, bd = b._e, b._d
    for ea, da in zip(a._e, a._d):
        row = F[da]
        lim = t - ea
        for eb, db in zip(be, bd):
            if eb >= lim:
                break
            buckets[ea + eb].append(row[db])
    return _canon(ctx, buckets, {}, t)


class MNElement:
    __slots__ = ("ctx", "_e", "_d", "_t")

    def __init__(self, ctx, exps, digits, t):
        self.ctx = ctx
        self._e = exps
        self._d = digits
        self._t = t

    # basic views
    @property
    def p(self):
        return self.ctx.p

    @property
    def trunc(self):
        return self.ctx.from_lat(self._t)

    @property
    def terms(self):
        return [(self.ctx.from_lat(e), d) for e, d in zip(self._e, self._d)]

    def is_empty(self):
        return not self._e

    def __len__(self):
        return len(self._e)

    def valuation(self):
        if not self._e:
            raise IndeterminateValuation(
                f"no terms below p^{frac_str(self.trunc)}; valuation unknown")
        return self.ctx.from_lat(self._e[0])

    def _vlb(self):
        """Lattice lower bound for the valuation (trunc when empty)."""
        return self._e[0] if self._e else self._t

    def valuation_bound(self):
        return self.ctx.from_lat(self._vlb())

    def leading(self):
        if not self._e:
            raise IndeterminateValuation("no leading term")
        return self.ctx.from_lat(self._e[0]), self._d[0]

    def coeff_at(self, x):
        e = self.ctx.to_lat(x)
        if e >= self._t:
            raise OutOfWindow(f"C_{x} requested but element is O(p^{frac_str(self.trunc)})")
        for ee, d in zip(self._e, self._d):
            if ee == e:
                return d
            if ee > e:
                break
        return 0

    # truncation helpers
    def truncate(self, r):
        t = min(self._t, self.ctx.to_lat(r))
        return self._cut(t)

    def _cut(self, t):
        if t >= self._t:
            if t == self._t:
                return self
            return MNElement(self.ctx, self._e, self._d, self._t)
        n = 0
        while n < len(self._e) and self._e[n] < t:
            n += 1
        return MNElement(self.ctx, self._e[:n], self._d[:n], t)

    def with_trunc(self, r):
        """Same representative, error bound set to r (the caller vouches for it)."""
        t = self.ctx.to_lat(r)
        out = self._cut(t)
        return MNElement(self.ctx, out._e, out._d, t)

    def shift(self, x):
        """Multiply by p^x exactly."""
        s = self.ctx.to_lat(x)
        return MNElement(self.ctx, tuple(e + s for e in self._e), self._d, self._t + s)

    def scale_digit(self, d):
        """Multiply by the Teichmueller lift [d]; carry free."""
        if d == 0:
            raise DomainError("use zero() for multiplication by 0")
        F = self.ctx.field
        return MNElement(self.ctx, self._e, tuple(F.mul(x, d) for x in self._d), self._t)

    # arithmetic
    def _coerce(self, other, t_hint):
        if isinstance(other, MNElement):
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise DomainError("elements from different contexts")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.from_rational(other, self.ctx.from_lat(t_hint))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other, self._t)
        if other is NotImplemented:
            return other
        return self.ctx.sum([self, other])

    __radd__ = __add__

    def __neg__(self):
        return self.scale_int(-1)

    def __sub__(self, other):
        other = self._coerce(other, self._t)
        if other is NotImplemented:
            return other
        return self.ctx.sum([self, -other])

    def __rsub__(self, other):
        return (-self) + other

    def scale_int(self, q):
        """Multiply by an exact rational q."""
        q = Fraction(q)
        if q == 1:
            return self
        v = vp_int(q.numerator, self.p) - vp_int(q.denominator, self.p) if q else 0
        t = self._t + v * self.ctx.D
        if q == 0 or not self._e:
            return MNElement(self.ctx, (), (), t)
        c = self.ctx.from_rational(q, self.ctx.from_lat(t - self._e[0]))
        return _mul_terms(self.ctx, self, c, t)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale_int(other)
        if not isinstance(other, MNElement):
            return NotImplemented
        t = min(self._t + other._vlb(), other._t + self._vlb())
        if not self._e or not other._e:
            return MNElement(self.ctx, (), (), t)
        return _mul_terms(self.ctx, self, other, t)

    __rmul__ = __mul__

    def mul_trunc(self, other, r):
        """Product computed only below min(r, usual bound)."""
        t = min(self._t + other._vlb(), other._t + self._vlb(), self.ctx.to_lat(r))
        if not self._e or not other._e:
            return MNElement(self.ctx, (), (), t)
        return _mul_terms(self.ctx, self, other, t)

    def power_trunc(self, k):
        """Error bound of a^k from the binomial expansion of (a + O(p^t))^k."""
        v, t, D, p = self._vlb(), self._t, self.ctx.D, self.p
        return min(vp_int(comb(k, j), p) * D + (k - j) * v + j * t for j in range(1, k + 1))

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inv() ** (-k)
        if k == 0:
            return self.ctx.one(self.trunc)
        if k == 1:
            return self
        tk = self.power_trunc(k)
        if not self._e:
            return MNElement(self.ctx, (), (), tk)
        v = self._e[0]
        # a^i only needs terms below tk - (k - i) v
        result = None
        base, bi = self, 1
        n = k
        acc_i = 0
        while True:
            if n & 1:
                if result is None:
                    result, acc_i = base, bi
                else:
                    acc_i += bi
                    result = _mul_terms(self.ctx, result, base, tk - (k - acc_i) * v)
            n >>= 1
            if not n:
                break
            bi *= 2
            base = _mul_terms(self.ctx, base, base, tk - (k - bi) * v)
        return MNElement(self.ctx, result._e, result._d, tk)._cut(tk)

    def inv(self):
        """Inverse by geometric series; trunc becomes trunc - 2v."""
        if not self._e:
            raise IndeterminateValuation("cannot invert an element with no known terms")
        ctx, F = self.ctx, self.ctx.field
        v, d = self._e[0], self._d[0]
        t_out = self._t - 2 * v
        di = F.inv(d)
        # a = [d] p^v (1 + eps), eps known to relative precision t - v
        rel = MNElement(ctx, tuple(e - v for e in self._e),
                        tuple(F.mul(x, di) for x in self._d), self._t - v)
        eps = rel - ctx.one(ctx.from_lat(rel._t))
        t_rel = t_out + v  # needed precision of the series before scaling by p^-v
        series = ctx.one(ctx.from_lat(t_rel))
        if eps._e:
            ve = eps._e[0]
            n_terms = _ceil_div(t_rel, ve)
            neg = -eps
            neg = MNElement(ctx, neg._e, neg._d, max(neg._t, t_rel))
            powk = ctx.one(ctx.from_lat(t_rel))
            acc = [powk]
            for _ in range(n_terms):
                powk = _mul_terms(ctx, powk, neg, t_rel)
                if not powk._e:
                    break
                acc.append(powk)
            series = ctx.sum(acc, ctx.from_lat(t_rel))
        out = MNElement(ctx, tuple(e - v for e in series._e),
                        tuple(F.mul(x, di) for x in series._d), t_rel - v)
        return out._cut(t_out)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale_int(Fraction(1) / Fraction(other))
        return self * other.inv()

    def pth_root(self):
        """B0 = sum [a_g^(1/p)] p^(g/p) over the 1-truncation of a."""
        ctx, F, D, p = self.ctx, self.ctx.field, self.ctx.D, self.p
        cut = min(self._t, D)
        if any(e < 0 for e in self._e):
            raise DomainError("p-th root needs support in [0, 1)")
        es, ds = [], []
        for e, d in zip(self._e, self._d):
            if e >= cut:
                break
            if e % p:
                raise DomainError("exponent not divisible on the lattice; deepen LATTICE_DEPTH")
            es.append(e // p)
            ds.append(F.root_p(d))
        exact = MNElement(ctx, tuple(es), tuple(ds), cut)
        check = _mul_pow_exact(exact, p, cut) - self._cut(cut)
        if check._e and check._e[0] < cut:
            raise PrecisionError("v(B0^p - A) >= min(1, trunc) failed")
        return MNElement(ctx, tuple(es), tuple(ds), cut // p)

    def congruent(self, other, r):
        rr = self.ctx.to_lat(r)
        if rr > self._t or rr > other._t:
            raise PrecisionError("comparison beyond the known precision")
        diff = self - other
        return not diff._e or diff._e[0] >= rr

    def __eq__(self, other):
        return (isinstance(other, MNElement) and self.ctx == other.ctx
                and self._e == other._e and self._d == other._d and self._t == other._t)

    def __hash__(self):
        return hash((self._e, self._d, self._t))

    def to_json(self):
        F = self.ctx.field
        return {"p": self.p, "modulus": F.modulus_str(), "trunc": frac_str(self.trunc),
                "terms": [{"exp": frac_str(x), "digit": F.fmt(d)} for x, d in self.terms]}

    def __str__(self):
        F = self.ctx.field
        parts = [f"[{F.fmt(d)}]p^{x}" for x, d in self.terms]
        parts.append(f"O(p^{self.trunc})")
        return " + ".join(parts)

    def __repr__(self):
        return f"MNElement({self})"


def _mul_pow_exact(a, k, t):
    """a^k with a's representative treated as exact, kept below lattice t."""
    out = a.ctx.one(a.ctx.from_lat(t))
    for _ in range(k):
        out = _mul_terms(a.ctx, out, a, t)
    return out


def mn_normalize(ctx, raw, trunc):
    return ctx.normalize(raw, trunc)


def mn_add(a, b):
    return a + b


def mn_mul(a, b):
    return a * b


def mn_inv(a):
    return a.inv()


def mn_valuation(a):
    return a.valuation()


def mn_coeff_at(a, x):
    return a.coeff_at(x)


def mn_pth_root(a):
    return a.pth_root()
