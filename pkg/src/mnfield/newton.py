"""Newton polygons and the transfinite Newton iteration over L_p.

Polynomials are stored highest degree first: ``P(T) = sum_k a_k T^(n-k)``
so a_0 is the leading coefficient.  The Newton polygon is built on the
points (k, v(a_k)); with this orientation the slope of a segment is the
valuation of the roots it accounts for.
"""
from fractions import Fraction
from math import comb

from .errors import DomainError, PrecisionError, ResidueRootMissing
from .exact_arith import INF, frac_str
from .mn_series import MNElement

__all__ = ["MNPoly", "phi_cyclotomic", "perturb", "perturb_horner",
           "newton_polygon", "residue_polynomial", "newton_run",
           "NewtonStep", "NewtonResult"]


class MNPoly:
    """Coefficients a_0..a_n (a_0 leading); None marks an exact zero."""

    def __init__(self, ctx, coeffs):
        coeffs = list(coeffs)
        if not coeffs or coeffs[0] is None:
            raise DomainError("leading coefficient must be nonzero")
        self.ctx = ctx
        self.coeffs = coeffs

    @classmethod
    def from_ints(cls, ctx, ints, trunc):
        return cls(ctx, [None if c == 0 else ctx.from_rational(c, trunc) for c in ints])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x, trunc):
        """Horner evaluation at an MN element."""
        acc = None
        for c in self.coeffs:
            if acc is not None:
                acc = acc.mul_trunc(x, trunc)
            if c is not None:
                acc = c if acc is None else acc + c
            elif acc is None:
                acc = self.ctx.zero(trunc)
        return acc.truncate(trunc)

    def to_json(self):
        return {"p": self.ctx.p, "coeffs": [None if c is None else c.to_json() for c in self.coeffs]}


def phi_cyclotomic(ctx, n, trunc):
    """Phi_{p^n}(T) = sum_{k<p} T^(p^(n-1) k)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    p = ctx.p
    step = p ** (n - 1)
    deg = step * (p - 1)
    ints = [0] * (deg + 1)
    for k in range(p):
        ints[deg - step * k] = 1
    return MNPoly.from_ints(ctx, ints, trunc)


def _powers(mu, upto, trunc):
    out = [mu.ctx.one(trunc)]
    for _ in range(upto):
        out.append(out[-1].mul_trunc(mu, trunc))
    return out


def perturb(P, mu, trunc):
    """Coefficients of P(T + mu): b_k = sum_j a_(k-j) C(n-k+j, j) mu^j."""
    n, a = P.degree, P.coeffs
    live = [i for i, c in enumerate(a) if c is not None]
    need = max((n - i for i in live), default=0)
    vmin = min(c.valuation_bound() for c in a if c is not None)
    pw = _powers(mu, need, Fraction(trunc) - min(vmin, 0))
    out = []
    for k in range(n + 1):
        terms = []
        for i in live:
            j = k - i
            if j < 0:
                break
            terms.append((a[i] * pw[j].scale_int(comb(n - i, j))).truncate(trunc) if j
                         else a[i].truncate(trunc))
        out.append(P.ctx.sum(terms, trunc) if terms else P.ctx.zero(trunc))
    return MNPoly(P.ctx, out)


def perturb_horner(P, mu, trunc):
    """P(T + mu) by repeated synthetic division; reference implementation."""
    ctx, n = P.ctx, P.degree
    b = [c if c is not None else ctx.zero(trunc) for c in P.coeffs]
    for i in range(n):
        for k in range(1, n + 1 - i):
            b[k] = (b[k] + b[k - 1].mul_trunc(mu, trunc)).truncate(trunc)
    return MNPoly(ctx, [c.truncate(trunc) for c in b])


def _lower_hull(points):
    hull = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it is strictly below the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def newton_polygon(P):
    """Vertices of the lower hull of {(k, v(a_k))}, plus (s_max, m_max).

    An exactly vanishing constant term gives s_max = inf.  Coefficients
    whose digits all cancelled below their truncation are only known to
    lie at height >= trunc; if such a point could touch the hull the
    polygon is undetermined and PrecisionError is raised.
    """
    n = P.degree
    if P.coeffs[n] is None:
        return [(0, P.coeffs[0].valuation())], INF, n
    pts, unknown = [], []
    for k, c in enumerate(P.coeffs):
        if c is None:
            continue
        if c.is_empty():
            unknown.append((k, c.trunc))
        else:
            pts.append((k, c.valuation()))
    if not pts or pts[0][0] != 0 or pts[-1][0] != n:
        raise PrecisionError("end coefficients of the polygon are not known")
    hull = _lower_hull(pts)
    for k, h in unknown:
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= k <= x2:
                line = y1 + (y2 - y1) * Fraction(k - x1, x2 - x1)
                if h <= line:
                    raise PrecisionError(f"coefficient {k} is O(p^{h}) and may lie on the polygon")
                break
    (xa, ya), (xb, yb) = hull[-2], hull[-1]
    s_max = Fraction(yb - ya) / (xb - xa)
    return hull, s_max, xa


def residue_polynomial(P, m, s):
    """Res(T) = sum_{k=0}^{n-m} C_0(a_(n-k) p^(-v(a_m) - s(n-m-k))) T^k, highest first."""
    n = P.degree
    vm = P.coeffs[m].valuation()
    out = []
    for k in range(n - m, -1, -1):
        c = P.coeffs[n - k]
        if c is None:
            out.append(0)
            continue
        x = vm + s * (n - m - k)
        if c.is_empty() and c.trunc <= x:
            raise PrecisionError(f"coefficient {n - k} unknown at the residue exponent")
        out.append(c.coeff_at(x) if x < c.trunc else 0)
    return out


class NewtonStep:
    __slots__ = ("m_max", "s_max", "residue", "root", "valuation", "approx")

    def __init__(self, m_max, s_max, residue, root, valuation, approx):
        self.m_max, self.s_max, self.residue = m_max, s_max, residue
        self.root, self.valuation, self.approx = root, valuation, approx

    def to_json(self, F):
        return {"m_max": self.m_max,
                "s_max": "inf" if self.s_max == INF else frac_str(self.s_max),
                "residue": [F.fmt(c) for c in self.residue],
                "root": None if self.root is None else F.fmt(self.root),
                "valuation": "inf" if self.valuation == INF else frac_str(self.valuation),
                "approx": self.approx.to_json()}


class NewtonResult:
    def __init__(self, ctx, steps, approximations, exact):
        self.ctx = ctx
        self.steps = steps
        self.approximations = approximations
        self.exact = exact

    @property
    def root(self):
        return self.approximations[-1]

    def to_json(self):
        F = self.ctx.field
        return {"p": self.ctx.p, "modulus": F.modulus_str(), "exact": self.exact,
                "steps": [s.to_json(F) for s in self.steps]}


def newton_run(P, steps, trunc, method="binomial", until=None, choose=None):
    """Run the iteration r <- r + [c] p^(s_max) for a number of steps.

    Each step re-expands the original P at the current approximation.
    Stops early if the constant term vanishes exactly, or once a step's
    slope reaches ``until`` when that is given.  ``choose(i, roots)`` picks
    the residue root at step i; the default is the first nonzero root.
    """
    ctx = P.ctx
    trunc = Fraction(trunc)
    expand = perturb if method == "binomial" else perturb_horner
    r = ctx.zero(trunc)
    approxs, out = [r], []
    exact = False
    F = ctx.field
    for _ in range(steps):
        Q = expand(P, r, trunc) if not r.is_empty() else _as_trunc(P, trunc)
        hull, s_max, m_max = newton_polygon(Q)
        if s_max == INF:
            out.append(NewtonStep(m_max, s_max, [], None, INF, r))
            exact = True
            break
        val = Q.coeffs[-1].valuation()
        res = residue_polynomial(Q, m_max, s_max)
        roots = F.poly_roots(res)
        roots = [c for c in roots if c != 0]
        if not roots:
            raise ResidueRootMissing(f"residue {[F.fmt(c) for c in res]} has no root in F_q")
        c = roots[0] if choose is None else choose(len(out), roots)
        r = (r + ctx.monomial(c, s_max, trunc)).truncate(trunc)
        approxs.append(r)
        out.append(NewtonStep(m_max, s_max, res, c, val, r))
        if until is not None and s_max >= until:
            break
    return NewtonResult(ctx, out, approxs, exact)


def _as_trunc(P, trunc):
    return MNPoly(P.ctx, [None if c is None else c.truncate(trunc) for c in P.coeffs])
