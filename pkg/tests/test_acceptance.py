"""Acceptance gate: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``.
All mathematical comparisons are exact rationals; the only tolerances are
the wall-clock budgets below.
"""
import json
import random
import subprocess
import sys
import time
from fractions import Fraction as Fr

import pytest

from mnfield.expansions import (REGISTRY, Expander, chk_lem_16960, residual_check, residual_r_eff,
                                uniformizer, verify_identity)
from mnfield.mn_series import MNContext
from mnfield.newton import MNPoly, newton_polygon, newton_run, phi_cyclotomic
from mnfield.sigma_ring import SigmaElement, substitute

# pinned budgets (seconds) and sizes
BUDGET_CONGRUENCE_PER_PRIME = 30.0
BUDGET_NEWTON = 60.0
BUDGET_SYMBOLIC = 300.0
RING_CASES = 1000
SUPPORT_CASES = 200
HULL_CASES = 500
SIGMA_CASES = 10

SYMBOLIC_METHODS = ("MN-EXACT", "SIGMA-SYMBOLIC", "SLOPE-BOUND")


LINES = []


def report(n, ok, detail, secs):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}  ({secs:.1f}s)"
    LINES.append(line)
    print(line, flush=True)
    return line


def crit1():
    details, ok = [], True
    for p in (3, 5, 7, 11):
        t0 = time.perf_counter()
        reps = [verify_identity(i, p) for i, e in sorted(REGISTRY.items()) if e.method == "CONGRUENCE"]
        dt = time.perf_counter() - t0
        good = all(r.status == "PASS" for r in reps) and dt < BUDGET_CONGRUENCE_PER_PRIME
        harm = next(r for r in reps if r.id == "thm-harmonic")
        good &= len(harm.witness) == p - 1 and all(w.slack >= 0 for w in harm.witness)
        ok &= good
        details.append(f"p={p} {sum(r.passed for r in reps)}/{len(reps)} in {dt:.1f}s")
    return ok, "congruence ids " + ", ".join(details)


def _closed_form(E, i, t):
    p = E.p
    if i <= p - 1:
        return E.total([E.d(E.F.mul(E.inv_fact(k), E.z(k)), k * E.a1, t) for k in range(i + 1)], t)
    return E.Lambda(t) + E.total([E.d(E.zeta, E.b1 - Fr(1, p ** l), t) for l in range(2, i - p + 3)], t)


def crit2():
    t0 = time.perf_counter()
    ok, checked = True, 0
    for p in (3, 5):
        E = Expander(p)
        ok &= E.F.mult_order(E.zeta) == 2 * (p - 1)
        t = Fr(3)
        res = newton_run(phi_cyclotomic(E.ctx, 2, t), p + 4, t,
                         choose=lambda i, r: E.zeta if i == 1 else r[0])
        for i in range(p + 3):
            ok &= res.approximations[i + 1] == _closed_form(E, i, t)
            checked += 1
    dt = time.perf_counter() - t0
    ok &= dt < BUDGET_NEWTON
    return ok, f"zeta_(p^2) approximations i<=p+2 for p=3,5: {checked} exact matches"


def crit3():
    t0 = time.perf_counter()
    ids = sorted(i for i, e in REGISTRY.items() if e.method in SYMBOLIC_METHODS)
    bad = []
    for p in (3, 5, 7):
        for i in ids:
            r = verify_identity(i, p)
            if r.status != "PASS":
                bad.append(f"{i}@{p}:{r.status}")
    dt = time.perf_counter() - t0
    ok = not bad and dt < BUDGET_SYMBOLIC
    return ok, f"{len(ids)} symbolic ids x p=3,5,7" + (f"; failing {bad}" if bad else "")


def crit4():
    bad, n_ok = [], 0
    for p in (3, 5):
        for n in (2, 3):
            for K in (1, 2, 3):
                rep = residual_check(p, n, K)
                r = residual_r_eff(p, n, K)
                w = rep.witness[-1]
                if rep.status == "PASS" and Fr(w.achieved) >= r:
                    n_ok += 1
                else:
                    bad.append((p, n, K, rep.status))
    return not bad, f"residual v(xhat - x*) >= r_eff on {n_ok}/12 (p,n,K)" + (f"; failing {bad}" if bad else "")


def crit5():
    got = []
    ok = True
    for p in (3, 5):
        for m in (2, 3, 4):
            pi, v = uniformizer(p, m)
            good = v == Fr(1, p ** m * (p - 1)) and pi.valuation() == (v, True)
            ok &= good
            got.append(f"({p},{m})={v}")
    return ok, "uniformizer valuations " + " ".join(got)


def _rand_mn(ctx, rng, t, terms=4, lo=-1):
    p = ctx.p
    den = p * (p - 1)
    parts = [ctx.monomial(rng.randrange(1, ctx.field.q), Fr(rng.randrange(lo * den, int(t * den)), den), t)
             for _ in range(rng.randint(0, terms))]
    return ctx.sum(parts, t) if parts else ctx.zero(t)


def _eq(a, b):
    return a.congruent(b, min(a.trunc, b.trunc))


def crit6():
    rng = random.Random(6)
    counts, ok = {}, True
    for p in (3, 5):
        c = MNContext(p)
        n = 0
        for _ in range(RING_CASES):
            t = Fr(rng.randint(1, 3))
            a, b, d = (_rand_mn(c, rng, t) for _ in range(3))
            ok &= (_eq(a + b, b + a) and _eq(a * b, b * a) and _eq((a + b) + d, a + (b + d))
                   and _eq((a * b) * d, a * (b * d)) and _eq(a * (b + d), a * b + a * d))
            n += 1
        counts[f"ring p={p}"] = n
    c = MNContext(3)
    F = c.field
    n = 0
    for s in range(1, 5):
        W = c.witt(s)
        for x in range(F.q):
            ok &= W.residue(W.teich(x)) == x and W.digits(W.teich(x))[0] == x
            for y in range(F.q):
                ok &= W.mul(W.teich(x), W.teich(y)) == W.teich(F.mul(x, y))
                n += 1
        for a0 in range(3 ** s):
            for a1 in range(3 ** s):
                w = (a0, a1)
                ok &= W.recompose(W.digits(w)) == w
    counts["teich p=3"] = n
    n = 0
    for p in (3, 5):
        c = MNContext(p)
        for lvl in (2, 3):
            for K in (2, 3, 4):
                for _ in range(SIGMA_CASES):
                    x, y = (SigmaElement(c, lvl, [_rand_mn(c, rng, Fr(2), 2, 0) for _ in range(2)], 1)
                            for _ in range(2))
                    ok &= _eq(substitute(x * y, K), substitute(x, K) * substitute(y, K))
                    ok &= _eq(substitute(x + y, K), substitute(x, K) + substitute(y, K))
                    n += 1
    counts["sigma subst"] = n
    n = 0
    for p in (3, 5):
        wit = chk_lem_16960(Expander(p), samples=SUPPORT_CASES, seed=16960 + p)
        ok &= len(wit) >= SUPPORT_CASES and all(w.ok for w in wit)
        n += len(wit)
    counts["p-th power supports"] = n
    c = MNContext(3)
    for _ in range(HULL_CASES):
        deg = rng.randint(1, 7)
        coeffs = [c.monomial(1, Fr(rng.randint(-6, 12), 6), 4) for _ in range(deg + 1)]
        hull, s, m = newton_polygon(MNPoly(c, coeffs))
        ok &= hull[0][0] == 0 and hull[-1][0] == deg
        for k, a in enumerate(coeffs):
            for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
                if x1 <= k <= x2:
                    ok &= a.valuation() >= y1 + (y2 - y1) * Fr(k - x1, x2 - x1)
    counts["hull"] = HULL_CASES
    return ok, "property cases " + ", ".join(f"{k}={v}" for k, v in counts.items())


DETERMINISM_SCRIPT = r"""
import json
from mnfield.expansions import REGISTRY, residual_check, uniformizer, verify_identity
from mnfield.cli import run
import io
out = {}
for p in (3, 5, 7):
    out[f"verify-{p}"] = [verify_identity(i, p).to_json() for i in sorted(REGISTRY)]
for p, m in ((3, 2), (3, 3), (5, 2)):
    out[f"pi-{p}-{m}"] = uniformizer(p, m)[0].to_json()
out["residual"] = residual_check(3, 2, 2).to_json()
buf = io.StringIO()
run(["newton", "--prime", "5", "--n", "2", "--steps", "6", "--json"], buf)
out["newton"] = json.loads(buf.getvalue())
print(json.dumps(out, sort_keys=True, indent=2))
"""


def crit7():
    runs = [subprocess.run([sys.executable, "-c", DETERMINISM_SCRIPT], capture_output=True, check=True).stdout
            for _ in range(2)]
    ok = runs[0] == runs[1] and len(runs[0]) > 1000
    json.loads(runs[0])
    return ok, f"two fresh-process runs, {len(runs[0])} bytes of JSON, identical={runs[0] == runs[1]}"


CRITERIA = [crit1, crit2, crit3, crit4, crit5, crit6, crit7]


@pytest.mark.parametrize("n", range(1, 8))
def test_criterion(n):
    t0 = time.perf_counter()
    ok, detail = CRITERIA[n - 1]()
    report(n, ok, detail, time.perf_counter() - t0)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, fn in enumerate(CRITERIA, 1):
        t0 = time.perf_counter()
        ok, detail = fn()
        report(n, ok, detail, time.perf_counter() - t0)
        failed += not ok
    sys.exit(1 if failed else 0)
