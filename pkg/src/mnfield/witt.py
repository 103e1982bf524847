"""W(F_{p^2}) modulo p^s, realised as (Z/p^s)[y]/(lifted modulus).

Elements are pairs (a0, a1) meaning a0 + a1*y.  The lifted modulus is the
field modulus with its integer coefficients read in Z/p^s, so reduction
mod p recovers the residue-field coordinates of :mod:`gfq` directly.
"""
from .errors import DomainError, NotInvertible

__all__ = ["WittCtx", "teich_lift", "teich_digits", "witt_arith"]


class WittCtx:
    def __init__(self, field, s):
        if field.m != 2:
            raise DomainError("Witt layer is built over F_{p^2}")
        if s < 1:
            raise DomainError("precision s must be >= 1")
        self.field = field
        self.p = field.p
        self.s = s
        self.N = field.p ** s
        self.c, self.b = field.modulus  # y^2 = -b*y - c
        self._teich = {}
        self.lift_steps = {}

    def reduce(self, w):
        return (w[0] % self.N, w[1] % self.N)

    def from_int(self, n):
        return (n % self.N, 0)

    def add(self, u, v):
        return ((u[0] + v[0]) % self.N, (u[1] + v[1]) % self.N)

    def sub(self, u, v):
        return ((u[0] - v[0]) % self.N, (u[1] - v[1]) % self.N)

    def neg(self, u):
        return (-u[0] % self.N, -u[1] % self.N)

    def mul(self, u, v):
        hi = u[1] * v[1]
        return ((u[0] * v[0] - hi * self.c) % self.N,
                (u[0] * v[1] + u[1] * v[0] - hi * self.b) % self.N)

    def pow(self, u, k):
        out = (1, 0)
        while k:
            if k & 1:
                out = self.mul(out, u)
            u = self.mul(u, u)
            k >>= 1
        return out

    def inv(self, u):
        a0, a1 = u
        norm = (a0 * a0 - self.b * a0 * a1 + self.c * a1 * a1) % self.N
        if norm % self.p == 0:
            raise NotInvertible("Witt element is not a unit")
        ni = pow(norm, -1, self.N)
        return ((a0 - self.b * a1) * ni % self.N, -a1 * ni % self.N)

    def residue(self, u):
        return self.field.elem((u[0], u[1]))

    def teich(self, a):
        """Teichmueller lift of the residue code a."""
        t = self._teich.get(a)
        if t is None:
            w = self.field.coeffs(a)
            w = (w[0], w[1])
            q = self.field.q
            steps = 0
            for _ in range(self.s):
                nxt = self.pow(w, q)
                if nxt == w:
                    break
                w = nxt
                steps += 1
            self.lift_steps[a] = steps
            t = self._teich[a] = w
        return t

    def digits(self, w):
        """Teichmueller digits (c_0, ..., c_{s-1}) with w = sum [c_i] p^i."""
        out = []
        w0, w1 = w[0] % self.N, w[1] % self.N
        p = self.p
        for _ in range(self.s):
            d = (w0 % p) + (w1 % p) * p
            out.append(d)
            if d:
                t = self.teich(d)
                w0, w1 = w0 - t[0], w1 - t[1]
            w0, w1 = (w0 // p) % self.N, (w1 // p) % self.N
        return out

    def recompose(self, digits):
        w = (0, 0)
        pk = 1
        for d in digits:
            t = self.teich(d)
            w = ((w[0] + pk * t[0]) % self.N, (w[1] + pk * t[1]) % self.N)
            pk *= self.p
        return w


def teich_lift(ctx, a):
    return ctx.teich(a)


def teich_digits(ctx, w):
    return ctx.digits(w)


def witt_arith(ctx, a, b, op):
    if op == "add":
        return ctx.add(a, b)
    if op == "mul":
        return ctx.mul(a, b)
    if op == "neg":
        return ctx.neg(a)
    if op == "inv":
        return ctx.inv(a)
    raise DomainError(f"unknown op {op!r}")
