"""Command-line driver: verify, expand, newton, uniformizer, selftest.

Exit codes: 0 all good, 1 some report FAILed or ERRORed, 2 usage error.
"""
import argparse
import json
import random
import sys
from fractions import Fraction

from .errors import MNError
from .exact_arith import is_odd_prime
from .expansions import (NAMED, REGISTRY, Expander, build_named, chk_lem_16960,
                         step_one_root, uniformizer, verify_identity)
from .mn_series import MNContext, MNElement
from .newton import MNPoly, newton_polygon, newton_run, phi_cyclotomic
from .sigma_ring import SigmaElement, substitute

METHODS = ("CONGRUENCE", "MN-EXACT", "SIGMA-SYMBOLIC", "SLOPE-BOUND")


def _prime(s):
    try:
        p = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{s!r} is not an integer")
    if not is_odd_prime(p):
        raise argparse.ArgumentTypeError(f"{p} is not an odd prime")
    return p


def _pos(s):
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _frac(s):
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{s!r} is not a rational number")


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2)


def build_parser():
    ap = argparse.ArgumentParser(prog="mnfield", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify", help="run registry identity checks")
    v.add_argument("--prime", type=_prime, required=True)
    g = v.add_mutually_exclusive_group(required=True)
    g.add_argument("--id", choices=sorted(REGISTRY))
    g.add_argument("--all", action="store_true")
    v.add_argument("--method", choices=METHODS, help="with --all, only this method")
    v.add_argument("--modulus", help="F_{p^2} modulus, e.g. g^2+g+2")
    v.add_argument("--mode", choices=("conservative", "sharp"), default="conservative")
    v.add_argument("--json", action="store_true")

    e = sub.add_parser("expand", help="print a named closed-form object")
    e.add_argument("--name", choices=sorted(NAMED), required=True)
    e.add_argument("--prime", type=_prime, required=True)
    e.add_argument("--n", type=_pos)
    e.add_argument("--m", type=_pos)
    e.add_argument("--beta", type=int, default=0)
    e.add_argument("--sigma-terms", type=_pos, default=3, dest="K")
    e.add_argument("--trunc", type=_frac)
    e.add_argument("--modulus")
    e.add_argument("--format", choices=("text", "json"), default="text")

    n = sub.add_parser("newton", help="Newton iteration on Phi_{p^n}")
    n.add_argument("--prime", type=_prime, required=True)
    n.add_argument("--n", type=_pos, required=True)
    n.add_argument("--steps", type=_pos, required=True)
    n.add_argument("--trunc", type=_frac)
    n.add_argument("--modulus")
    n.add_argument("--json", action="store_true")

    u = sub.add_parser("uniformizer", help="build pi_p^{m,1} and certify its valuation")
    u.add_argument("--prime", type=_prime, required=True)
    u.add_argument("--m", type=int, required=True)
    u.add_argument("--modulus")
    u.add_argument("--show-element", action="store_true")
    u.add_argument("--json", action="store_true")

    s = sub.add_parser("selftest", help="property checks at reduced sizes")
    s.add_argument("--seed", type=int, default=0)
    return ap


# ---------------------------------------------------------------- subcommands

def cmd_verify(a, out):
    ids = [a.id] if a.id else sorted(i for i, e in REGISTRY.items()
                                     if a.method is None or e.method == a.method)
    reports = [verify_identity(i, a.prime, a.modulus, a.mode) for i in ids]
    if a.json:
        out.write(_dump([r.to_json() for r in reports]) + "\n")
    else:
        for r in reports:
            out.write(str(r) + "\n")
    return 0 if all(r.passed for r in reports) else 1


def cmd_expand(a, out):
    params = {"n": a.n, "m": a.m, "beta": a.beta, "K": a.K, "trunc": a.trunc}
    x = build_named(a.name, a.prime, a.modulus, **params)
    if a.format == "json":
        obj = {"name": a.name, "p": a.prime, "value": x.to_json()}
        if isinstance(x, SigmaElement):
            obj["value"]["p"] = a.prime
        out.write(_dump(obj) + "\n")
    else:
        out.write(f"{a.name} = {x}\n")
    return 0


def cmd_newton(a, out):
    ctx = MNContext(a.prime, a.modulus)
    # the constant term's valuation stays below n + 1 along the run
    trunc = a.trunc if a.trunc is not None else Fraction(a.n + 1)
    c1 = step_one_root(ctx, a.n) if a.n >= 2 else None
    res = newton_run(phi_cyclotomic(ctx, a.n, trunc), a.steps, trunc,
                     choose=lambda i, roots: c1 if i == 1 and c1 is not None else roots[0])
    if a.json:
        obj = res.to_json()
        obj["approximation"] = res.root.to_json()
        out.write(_dump(obj) + "\n")
    else:
        F = ctx.field
        for i, st in enumerate(res.steps):
            root = "-" if st.root is None else F.fmt(st.root)
            out.write(f"step {i}: slope {st.s_max}, root {root}, v(P(r)) {st.valuation}\n")
        out.write(f"approximation: {res.root}\n")
    return 0


def cmd_uniformizer(a, out):
    pi, v = uniformizer(a.prime, a.m, a.modulus)
    if a.json:
        out.write(_dump({"p": a.prime, "m": a.m, "valuation": str(v),
                         "element": pi.to_json()}) + "\n")
    else:
        if a.show_element:
            out.write(f"pi = {pi}\n")
        out.write(f"{v}\n")
    return 0


# ---------------------------------------------------------------- selftest

def _rand_mn(ctx, rng, t, terms=4, den=None):
    p = ctx.p
    den = den or p * p * (p - 1)
    parts = []
    for _ in range(rng.randint(0, terms)):
        x = Fraction(rng.randrange(-den, int(t * den)), den)
        if x < t:
            parts.append(ctx.monomial(rng.randrange(1, ctx.field.q), x, t))
    return ctx.sum(parts, t) if parts else ctx.zero(t)


def _agree(a, b):
    r = min(a.trunc, b.trunc)
    return a.congruent(b, r)


def st_ring(rng, cases=60):
    for p in (3, 5):
        ctx = MNContext(p)
        for _ in range(cases):
            a, b, c = (_rand_mn(ctx, rng, Fraction(rng.randint(1, 3))) for _ in range(3))
            if not (_agree(a + b, b + a) and _agree(a * b, b * a)
                    and _agree((a + b) + c, a + (b + c)) and _agree((a * b) * c, a * (b * c))
                    and _agree(a * (b + c), a * b + a * c) and _agree(a - a, ctx.zero(a.trunc))):
                return False
    return True


def st_teich(rng):
    ctx = MNContext(3)
    F = ctx.field
    for s in range(1, 5):
        W = ctx.witt(s)
        for x in range(F.q):
            if W.residue(W.teich(x)) != x:
                return False
            for y in range(F.q):
                if W.teich(F.mul(x, y)) != W.mul(W.teich(x), W.teich(y)):
                    return False
        for _ in range(20):
            w = W.reduce((rng.randrange(3 ** s), rng.randrange(3 ** s)))
            if W.recompose(W.digits(w)) != w:
                return False
    return True


def st_sigma(rng, cases=6):
    for p in (3, 5):
        ctx = MNContext(p)
        for n in (2, 3):
            for _ in range(cases):
                t = Fraction(1)
                a = SigmaElement(ctx, n, [_rand_mn(ctx, rng, t + 1, 2) for _ in range(2)], t)
                b = SigmaElement(ctx, n, [_rand_mn(ctx, rng, t + 1, 2) for _ in range(2)], t)
                for K in (2, 3):
                    lhs = substitute(a * b, K)
                    rhs = substitute(a, K) * substitute(b, K)
                    if not _agree(lhs, rhs):
                        return False
    return True


def st_16960(rng):
    for p in (3, 5):
        wit = chk_lem_16960(Expander(p), samples=10, seed=rng.randrange(10 ** 6))
        if not all(w.ok for w in wit):
            return False
    return True


def st_hull(rng, cases=50):
    ctx = MNContext(3)
    for _ in range(cases):
        deg = rng.randint(1, 6)
        coeffs = [ctx.monomial(1, Fraction(rng.randint(-6, 12), 6), 4) for _ in range(deg + 1)]
        hull, s, m = newton_polygon(MNPoly(ctx, coeffs))
        pts = [(k, c.valuation()) for k, c in enumerate(coeffs)]
        for k, y in pts:
            for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
                if x1 <= k <= x2 and y < y1 + (y2 - y1) * Fraction(k - x1, x2 - x1):
                    return False
        if hull[0][0] != 0 or hull[-1][0] != deg:
            return False
    return True


def st_congruence(rng):
    return all(verify_identity(i, 3).passed
               for i, e in sorted(REGISTRY.items()) if e.method == "CONGRUENCE")


SELFTESTS = [("ring axioms", st_ring), ("teichmueller lifts", st_teich),
             ("sigma substitution", st_sigma), ("p-th power of small support", st_16960),
             ("newton polygon hull", st_hull), ("congruence registry p=3", st_congruence)]


def cmd_selftest(a, out):
    ok = True
    for name, fn in SELFTESTS:
        passed = fn(random.Random(f"{a.seed}:{name}"))
        ok &= passed
        out.write(f"{'PASS' if passed else 'FAIL'} {name}\n")
    return 0 if ok else 1


COMMANDS = {"verify": cmd_verify, "expand": cmd_expand, "newton": cmd_newton,
            "uniformizer": cmd_uniformizer, "selftest": cmd_selftest}


def run(argv, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return COMMANDS[a.cmd](a, out)
    except MNError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
