"""Polynomials in the accumulation series sigma_n = sum_{k>=n} p^(-1/p^k).

A :class:`SigmaElement` at level n stands for sum_j c_j sigma_n^j with
MN coefficients, j < p after reduction, plus a global O(p^trunc).  Since
v(sigma_n) = -1/p^n, coefficient j only needs to be known below
trunc + j/p^n; each c_j carries exactly that bound.

Reduction uses sigma_n^p = p^(-1/p^(n-1)) + sigma_n + E_n.  Expanding the
p-th power, every cross term has a multinomial coefficient divisible by
p, and the smallest exponent among them is -(p-1)/p^n - 1/p^(n+1), so
v(E_n) = 1 - (p-1)/p^n - 1/p^(n+1).  The weaker bound 1 - 1/p^(n-1) is
the default ("conservative"); "sharp" uses the exact one.
"""
from fractions import Fraction
from math import comb

from .errors import DomainError, IndeterminateValuation, NotInvertible, PrecisionError
from .exact_arith import frac_str, vp_int
from .mn_series import MNElement

__all__ = ["SigmaElement", "sig_mul", "sig_level_shift", "sig_valuation",
           "sig_congruent", "sig_pow", "sig_inv", "sigma_truncated",
           "substitute"]

REWRITE_MODES = ("conservative", "sharp")


def rewrite_error(p, n, mode="conservative"):
    """Valuation bound of sigma_n^p - p^(-1/p^(n-1)) - sigma_n."""
    if mode == "conservative":
        return 1 - Fraction(1, p ** (n - 1))
    if mode == "sharp":
        return 1 - Fraction(p - 1, p ** n) - Fraction(1, p ** (n + 1))
    raise DomainError(f"unknown rewrite mode {mode!r}")


class SigmaElement:
    __slots__ = ("ctx", "level", "coeffs", "trunc", "mode")

    def __init__(self, ctx, level, coeffs, trunc, mode="conservative"):
        if level < 1:
            raise DomainError("sigma level must be >= 1")
        if mode not in REWRITE_MODES:
            raise DomainError(f"unknown rewrite mode {mode!r}")
        p = ctx.p
        self.ctx, self.level, self.mode = ctx, level, mode
        trunc = Fraction(trunc)
        coeffs = list(coeffs)
        # fold in the error bounds of the given coefficients
        for j, c in enumerate(coeffs):
            if c is not None:
                trunc = min(trunc, c.trunc - Fraction(j, p ** level))
        if len(coeffs) > p:
            raise DomainError("unreduced sigma polynomial; use from_poly")
        while len(coeffs) < p:
            coeffs.append(None)
        out = []
        for j, c in enumerate(coeffs):
            tj = trunc + Fraction(j, p ** level)
            out.append(ctx.zero(tj) if c is None else c.truncate(tj))
        self.coeffs = tuple(out)
        self.trunc = trunc

    # constructors
    @classmethod
    def constant(cls, c, level, mode="conservative"):
        return cls(c.ctx, level, [c], c.trunc, mode)

    @classmethod
    def sigma(cls, ctx, level, trunc, mode="conservative"):
        one = ctx.one(trunc + 1)
        return cls(ctx, level, [None, one], trunc, mode)

    @classmethod
    def from_poly(cls, ctx, level, coeffs, trunc, mode="conservative"):
        """Reduce an arbitrary-degree polynomial in sigma_level."""
        p = ctx.p
        trunc = Fraction(trunc)
        coeffs = [c for c in coeffs]
        err = rewrite_error(p, level, mode)
        shift = -Fraction(1, p ** (level - 1))
        for j in range(len(coeffs) - 1, p - 1, -1):
            c = coeffs[j]
            if c is None:
                continue
            e = j - p
            # c sigma^(p+e) = c sigma^e (p^shift + sigma) + c sigma^e E
            if not c.is_empty():
                vc = c.valuation()
                trunc = min(trunc, vc - Fraction(e, p ** level) + err)
            else:
                trunc = min(trunc, c.trunc - Fraction(j, p ** level))
            coeffs[j] = None
            _acc(coeffs, e, c.shift(shift))
            _acc(coeffs, e + 1, c)
        return cls(ctx, level, coeffs[:p], trunc, mode)

    # views
    @property
    def p(self):
        return self.ctx.p

    def _like(self, coeffs, trunc, level=None):
        return SigmaElement.from_poly(self.ctx, self.level if level is None else level,
                                      coeffs, trunc, self.mode)

    def valuation(self):
        """(min_j v(c_j) - j/p^n, exact?) ; exact iff the minimiser is unique."""
        p, n = self.p, self.level
        vals = []
        for j, c in enumerate(self.coeffs):
            if not c.is_empty():
                vals.append((c.valuation() - Fraction(j, p ** n), j))
        if not vals:
            return self.trunc, False
        m = min(v for v, _ in vals)
        if m >= self.trunc:
            return self.trunc, False
        return m, sum(1 for v, _ in vals if v == m) == 1

    def valuation_bound(self):
        return min(self.valuation()[0], self.trunc)

    def is_empty(self):
        return all(c.is_empty() for c in self.coeffs)

    # arithmetic
    def _check(self, other):
        if not isinstance(other, SigmaElement):
            raise DomainError("expected a SigmaElement")
        if other.ctx != self.ctx or other.mode != self.mode:
            raise DomainError("sigma elements from different contexts or modes")
        if other.level != self.level:
            lo, hi = sorted((self, other), key=lambda s: s.level)
            raise DomainError(f"level mismatch {lo.level} vs {hi.level}; shift first")

    def _lift(self, other):
        if isinstance(other, MNElement):
            return SigmaElement.constant(other, self.level, self.mode)
        if isinstance(other, (int, Fraction)):
            return SigmaElement.constant(
                self.ctx.from_rational(other, self.trunc + 1), self.level, self.mode)
        return other

    def __add__(self, other):
        other = self._lift(other)
        self._check(other)
        t = min(self.trunc, other.trunc)
        return SigmaElement(self.ctx, self.level,
                            [a + b for a, b in zip(self.coeffs, other.coeffs)], t, self.mode)

    __radd__ = __add__

    def __neg__(self):
        return SigmaElement(self.ctx, self.level, [-c for c in self.coeffs], self.trunc, self.mode)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, x):
        """Multiply by an MN element or rational constant."""
        if isinstance(x, (int, Fraction)):
            x = Fraction(x)
            if x == 0:
                return SigmaElement(self.ctx, self.level, [], self.trunc, self.mode)
            v = vp_int(x.numerator, self.p) - vp_int(x.denominator, self.p)
            return SigmaElement(self.ctx, self.level, [c.scale_int(x) for c in self.coeffs],
                                self.trunc + v, self.mode)
        return self * SigmaElement.constant(x, self.level, self.mode)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._lift(other)
        self._check(other)
        return self._mul(other, None)

    __rmul__ = __mul__

    def _mul(self, other, target):
        p = self.p
        t = min(self.trunc + other.valuation_bound(), other.trunc + self.valuation_bound())
        if target is not None:
            t = min(t, target)
        prod = [None] * (2 * p - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_empty():
                continue
            for j, b in enumerate(other.coeffs):
                if b.is_empty():
                    continue
                _acc(prod, i + j, _mul_to(a, b, t + Fraction(i + j, p ** self.level)))
        return self._like(prod, t)

    def _exact(self, t):
        """Same representative with its error bound pushed out to t."""
        p = self.p
        return SigmaElement(self.ctx, self.level,
                            [c.with_trunc(t + Fraction(j, p ** self.level))
                             for j, c in enumerate(self.coeffs)], t, self.mode)

    def scale_monomial(self, digit, x):
        """Exact multiplication by [digit] p^x."""
        return SigmaElement(self.ctx, self.level,
                            [c.scale_digit(digit).shift(x) for c in self.coeffs],
                            self.trunc + Fraction(x), self.mode)

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inv() ** (-k)
        if k == 0:
            return SigmaElement.constant(self.ctx.one(self.trunc), self.level, self.mode)
        if k == 1:
            return self
        p = self.p
        v, t = self.valuation_bound(), self.trunc
        # error of the input, propagated through the binomial expansion
        tk = min(vp_int(comb(k, j), p) + (k - j) * v + j * t for j in range(1, k + 1))
        big = tk + k * abs(v) + 1
        result, base, n = None, self._exact(big), k
        bi, ri = 1, 0
        while True:
            if n & 1:
                if result is None:
                    result, ri = base, bi
                else:
                    ri += bi
                    result = result._mul(base, tk - (k - ri) * v)
            n >>= 1
            if not n:
                break
            bi *= 2
            base = base._mul(base, tk - (k - bi) * v)
        return SigmaElement(self.ctx, self.level, result.coeffs, min(tk, result.trunc), self.mode)

    def inv(self):
        """Inverse when the sigma^0 term strictly dominates."""
        v, exact = self.valuation()
        c0 = self.coeffs[0]
        if c0.is_empty() or not exact or c0.valuation() != v:
            raise NotInvertible("leading term is not the constant coefficient; "
                                "not invertible at this precision")
        F = self.ctx.field
        dinv = F.inv(c0.leading()[1])
        t_rel = self.trunc - v
        u = self.scale_monomial(dinv, -v)
        eps = u - SigmaElement.constant(self.ctx.one(t_rel + 1), self.level, self.mode)
        series = SigmaElement.constant(self.ctx.one(t_rel), self.level, self.mode)
        if not eps.truncate(t_rel).is_empty():
            ve = eps.valuation_bound()
            neg = -eps
            term = series
            for _ in range(int((t_rel / ve).__ceil__())):
                term = term._mul(neg, t_rel)
                series = series + term
        return series.scale_monomial(dinv, -v)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(1 / Fraction(other))
        other = self._lift(other)
        return self * other.inv()

    def shift_level(self, target=None):
        """Rewrite in terms of sigma_(n+1) using sigma_n = p^(-1/p^n) + sigma_(n+1)."""
        if target is None:
            target = self.level + 1
        if target < self.level:
            raise DomainError("can only shift to a deeper level")
        out = self
        while out.level < target:
            out = out._shift1()
        return out

    def _shift1(self):
        p, n = self.p, self.level
        s = -Fraction(1, p ** n)
        t = self.trunc
        new = [None] * p
        for j, c in enumerate(self.coeffs):
            if c.is_empty():
                continue
            for i in range(j + 1):
                term = c.scale_int(comb(j, i)).shift(s * (j - i))
                _acc(new, i, term)
        return SigmaElement(self.ctx, n + 1, new, t, self.mode)

    def truncate(self, r):
        return SigmaElement(self.ctx, self.level, self.coeffs, min(self.trunc, Fraction(r)), self.mode)

    def congruent(self, other, r):
        """Componentwise test of self == other mod p^r; errors if r > trunc."""
        other = self._lift(other)
        if other.level != self.level:
            lvl = max(self.level, other.level)
            return self.shift_level(lvl).congruent(other.shift_level(lvl), r)
        r = Fraction(r)
        if r > self.trunc or r > other.trunc:
            raise PrecisionError(f"r = {r} exceeds known precision "
                                 f"{min(self.trunc, other.trunc)}")
        d = (self - other).truncate(r)
        return d.is_empty()

    def __eq__(self, other):
        return (isinstance(other, SigmaElement) and self.ctx == other.ctx
                and (self.level, self.trunc, self.mode, self.coeffs)
                == (other.level, other.trunc, other.mode, other.coeffs))

    def __hash__(self):
        return hash((self.level, self.trunc, self.coeffs))

    def to_json(self):
        return {"level": self.level, "trunc": frac_str(self.trunc),
                "coeffs": [c.to_json() for c in self.coeffs]}

    @classmethod
    def from_json(cls, ctx, obj, mode="conservative"):
        return cls(ctx, obj["level"], [ctx.from_json(c) for c in obj["coeffs"]],
                   Fraction(obj["trunc"]), mode)

    def __str__(self):
        parts = []
        for j, c in enumerate(self.coeffs):
            if c.is_empty():
                continue
            body = " + ".join(s for s in str(c).split(" + ") if not s.startswith("O("))
            parts.append(f"({body})" + (f"*s{self.level}^{j}" if j else ""))
        parts.append(f"O(p^{self.trunc})")
        return " + ".join(parts)

    def __repr__(self):
        return f"SigmaElement(level={self.level}, {self})"


def _acc(lst, i, x):
    lst[i] = x if lst[i] is None else lst[i] + x


def _mul_to(a, b, t):
    """Product of MN representatives kept below t, error bound t."""
    from .mn_series import _mul_terms
    ctx = a.ctx
    tl = ctx.to_lat(t)
    bound = min(a._t + b._vlb(), b._t + a._vlb())
    return _mul_terms(ctx, a, b, min(tl, bound))


def sigma_truncated(ctx, n, K, trunc):
    """sum_{k=n}^{n+K-1} p^(-1/p^k) as an MN element."""
    if K < 1:
        raise DomainError("need at least one sigma term")
    p = ctx.p
    return ctx.sum([ctx.monomial(1, -Fraction(1, p ** k), trunc) for k in range(n, n + K)], trunc)


def substitute(x, K):
    """Replace sigma_n by its K-term truncation; returns an MN element.

    The error of coefficient j's contribution is bounded by
    v(c_j) - (j-1)/p^n - 1/p^(n+K).
    """
    if K < 1:
        raise DomainError("need at least one sigma term")
    p, n = x.p, x.level
    tail = -Fraction(1, p ** (n + K))
    t = x.trunc
    for j, c in enumerate(x.coeffs):
        if j and not c.is_empty():
            t = min(t, c.valuation() - Fraction(j - 1, p ** n) + tail)
        elif j:
            t = min(t, c.trunc - Fraction(j, p ** n))
    s = sigma_truncated(x.ctx, n, K, t + 1)
    acc = []
    for j, c in enumerate(x.coeffs):
        if c.is_empty():
            continue
        acc.append((c * (s ** j)).truncate(t) if j else c.truncate(t))
    return x.ctx.sum(acc, t) if acc else x.ctx.zero(t)


def sig_mul(a, b):
    return a * b


def sig_level_shift(a, target=None):
    return a.shift_level(target)


def sig_valuation(a):
    if a.is_empty():
        raise IndeterminateValuation(f"all coefficients vanish mod their truncation (O(p^{a.trunc}))")
    return a.valuation()


def sig_congruent(a, b, r):
    return a.congruent(b, r)


def sig_pow(a, k):
    return a ** k


def sig_inv(a):
    return a.inv()
