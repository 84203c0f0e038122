"""Acceptance criteria 1-12, each printed as one PASS/FAIL line.

Every criterion is a function ``check(threads) -> (ok, detail, payload)``.
``payload`` collects every computed number; criterion 12 reruns all of
them at 8 threads and compares the serialized payloads byte for byte.

Run directly with ``python tests/test_acceptance.py`` or via pytest.
"""

from __future__ import annotations

import json
import math
import random
from fractions import Fraction as F

import pytest

from nymanlab.blaschke import ZeroMultiset, b_at_one, bsy_sum
from nymanlab.cli import semigroup_rhs
from nymanlab.gram_projection import (
    build_gram,
    distance_to_one,
    reciprocal_family,
    residual_norm_squared,
)
from nymanlab.line_integrals import (
    LineFunction,
    LineQuadratureSpec,
    bsy_integral,
    cauchy_eval,
    factorization_check,
    lemma_orthogonality,
    outer_integral,
    synthetic_projection_norm,
)
from nymanlab.step_kernels import (
    KernelSpec,
    eval_rho,
    kernel_inner_product,
    mellin_frac_identity_residual,
    mellin_rho_closed,
    mellin_step,
    rho_as_step,
    rho_fractional_form,
    semigroup_apply,
)
from nymanlab.zeta_engine import bundled_zero_table, zeta

from oracles import brute_force_distance

SEED = 20240601
TABLE = bundled_zero_table(1000)


def c1(threads):
    z2, z4 = zeta(2), zeta(4)
    e2 = abs(z2.value - 1.6449340668482264)
    e4 = abs(z4.value - 1.0823232337111382)
    mags = [abs(zeta(complex(0.5, g)).value) for g in TABLE.ordinates[:10]]
    ok = e2 <= 1e-10 and e4 <= 1e-10 and max(mags) < 1e-5
    detail = f"|zeta(2) err| {e2:.1e}, |zeta(4) err| {e4:.1e}, max |zeta(1/2+i gamma)| {max(mags):.1e}"
    return ok, detail, [z2.value, z4.value, mags]


def c2(threads):
    rng = random.Random(SEED)
    mismatches = 0
    for _ in range(10**4):
        q = rng.randint(2, 1000)
        alpha = F(rng.randint(1, q - 1), q)
        t = F(rng.randint(1, 10**6), rng.randint(1, 10**6))
        spec = KernelSpec(alpha)
        mismatches += rho_fractional_form(spec, t) != eval_rho(spec, t)
    beyond = [eval_rho(KernelSpec(F(rng.randint(1, 99), 100)), 1 + F(rng.randint(1, 10**6), 10**3))
              for _ in range(1000)]
    semigroup_fail = 0
    for _ in range(20):
        alpha = F(rng.randint(1, 19), 20)
        lam = F(rng.randint(1, 15), 16)
        cutoff = min(F(1, 200), alpha / 4)
        lhs = semigroup_apply(lam, rho_as_step(KernelSpec(alpha), cutoff))
        semigroup_fail += lhs != semigroup_rhs(alpha, lam, cutoff)
    ok = mismatches == 0 and all(v == 0 for v in beyond) and semigroup_fail == 0
    detail = (f"{mismatches} floor/fractional mismatches in 10^4, "
              f"{sum(v != 0 for v in beyond)} nonzero beyond t=1, {semigroup_fail}/20 semigroup failures")
    return ok, detail, [mismatches, semigroup_fail]


def c3(threads):
    errs = []
    for a in (F(1, 10), F(1, 4), F(1, 3), F(1, 2), F(9, 10)):
        r = kernel_inner_product(None, KernelSpec(a), F(1, 10**10))
        errs.append(abs(r.value - (-float(a) * math.log(a))))
    return max(errs) <= 1e-8, f"max error {max(errs):.1e} over 5 alphas", [repr(e) for e in errs]


def c4(threads):
    rng = random.Random(SEED + 4)
    cutoff = F(1, 10**4)
    worst, fails, rows = 0.0, 0, []
    for _ in range(50):
        q = rng.randint(2, 40)
        alpha = F(rng.randint(1, q - 1), q)
        s = complex(rng.uniform(0.6, 3.0), rng.uniform(-10, 10))
        m = mellin_step(rho_as_step(KernelSpec(alpha), cutoff), s)
        closed = mellin_rho_closed(KernelSpec(alpha), s)
        # The closed form carries the zeta tolerance scaled by |alpha - alpha^s| / |s|.
        bound = m.abs_error_bound + 2 * 1e-13 * abs(zeta(s).value) + 1e-15
        err = abs(m.value - closed)
        fails += err > bound
        worst = max(worst, err / bound)
        rows.append([m.value, closed])
    spot = mellin_step(rho_as_step(KernelSpec(F(1, 2)), cutoff), 2)
    spot_err = abs(spot.value - math.pi**2 / 48)
    ok = fails == 0 and spot_err <= 1e-8
    detail = f"{fails}/50 outside bounds (worst err/bound {worst:.2f}), spot error {spot_err:.1e}"
    return ok, detail, [rows, spot.value]


def c5(threads):
    inv = cauchy_eval(LineFunction.analytic(lambda w: 1 / w, 1.0, True), 2,
                      LineQuadratureSpec(1e4), threads)
    rho = cauchy_eval(LineFunction.mellin_rho(KernelSpec(F(1, 2))), 2,
                      LineQuadratureSpec(2000), threads)
    e1 = abs(inv.value - 0.5)
    e2 = abs(rho.value - math.pi**2 / 48)
    ok = e1 <= 1e-3 and e2 <= 1e-3
    return ok, f"1/w error {e1:.1e} (T=1e4), rho_1/2 error {e2:.1e} (T=2000)", [
        inv.to_json(), rho.to_json()]


def c6(threads):
    res = [mellin_frac_identity_residual(s) for s in (2, 3, 2.5 + 1j)]
    return max(res) <= 1e-8, f"max residual {max(res):.1e}", res


def c7(threads):
    r200 = bsy_integral(LineQuadratureSpec(200), TABLE, threads)
    r400 = bsy_integral(LineQuadratureSpec(400), TABLE, threads)
    hand = abs(bsy_sum(ZeroMultiset.of(0.75)) - math.log(3))
    ok = (abs(r200.value) <= 0.05
          and abs(r400.value) < abs(r200.value) + r200.truncation_tail_estimate
          and hand <= 1e-12)
    detail = (f"|I(200)| {abs(r200.value):.2e}, |I(400)| {abs(r400.value):.2e}, "
              f"tail(200) {r200.truncation_tail_estimate:.1e}, log 3 error {hand:.1e}")
    return ok, detail, [r200.to_json(), r400.to_json()]


def c8(threads):
    # Re s = 0.75 forces a singularity halfwidth below (0.75 - 1/2) / 10.
    rows, ok, parts = [], True, []
    for s in (0.75, 1.5, 2.0):
        lo = factorization_check(s, None, LineQuadratureSpec(500, singularity_halfwidth=0.02),
                                 TABLE, threads)
        hi = factorization_check(s, None, LineQuadratureSpec(1000, singularity_halfwidth=0.02),
                                 TABLE, threads)
        ok &= lo.residual <= 0.02 and hi.residual < lo.residual
        parts.append(f"s={s:g}: {lo.residual:.1e} -> {hi.residual:.1e}")
        rows.append([lo.to_json(), hi.to_json()])
    outer = outer_integral(LineFunction.neg_log_abs_w(), 2, LineQuadratureSpec(1e4), threads)
    err = abs(outer.value - math.log(0.5))
    ok &= err <= 1e-3
    parts.append(f"outer -log|w| error {err:.2e}")
    rows.append(outer.to_json())
    return ok, ", ".join(parts), rows


def c9(threads):
    h = LineFunction.analytic(lambda w: 1 / (w + 1), 1.0, True)
    spec = LineQuadratureSpec(1e4)
    one = lemma_orthogonality(ZeroMultiset.of(0.75), h, spec, threads)
    empty = lemma_orthogonality(ZeroMultiset(), h, spec, threads)
    ok = abs(one.value) <= 1e-3 and empty.value == 0
    return ok, f"|pairing| {abs(one.value):.1e}, empty multiset gives {empty.value!r}", [
        one.to_json(), empty.to_json()]


def c10(threads):
    spec = LineQuadratureSpec(1e4)
    a = synthetic_projection_norm(ZeroMultiset.of(0.75), spec, threads)
    b = synthetic_projection_norm(ZeroMultiset.of(0.6), spec, threads)
    da, db = abs(a.value - 8 / 9), abs(b.value - 5 / 9)
    dbl = abs(b_at_one(ZeroMultiset.of((0.6, 2))) - 4 / 9)
    ok = da <= 1e-3 and db <= 1e-3 and dbl <= 1e-12
    return ok, f"{{0.75}} discrepancy {da:.1e}, {{0.6}} discrepancy {db:.1e}, B(1) error {dbl:.1e}", [
        a.to_json(), b.to_json(), dbl]


def c11(threads):
    empty = distance_to_one(build_gram([], 1e-8, threads)).distance
    eps = F(1, 500)
    pair_err = 0.0
    for a, b in ((F(1, 2), F(1, 3)), (F(2, 5), F(3, 7))):
        got = distance_to_one(build_gram([KernelSpec(a), KernelSpec(b)], eps, threads)).distance
        pair_err = max(pair_err, abs(got - brute_force_distance(a, b, eps)))
    cutoff = 1e-8
    full = build_gram(reciprocal_family(20), cutoff, threads)
    ds, pyth = [], 0.0
    for n in range(1, 21):
        sub = full.leading(n)
        res = distance_to_one(sub)
        ds.append(res.distance)
        gap = abs(residual_norm_squared(sub, res.coefficients) - res.distance**2)
        pyth = max(pyth, gap / (10 * n * cutoff))
    monotone = all(d > 0 for d in ds) and all(y <= x for x, y in zip(ds, ds[1:]))
    ok = empty == 1.0 and pair_err <= 1e-10 and monotone and pyth <= 1
    detail = (f"empty d={empty!r}, brute-force error {pair_err:.1e}, "
              f"d_20={ds[-1]:.6f} monotone={monotone}, Pythagoras gap/bound {pyth:.1e}")
    return ok, detail, [empty, pair_err, ds]


CRITERIA = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11]
_cache: dict = {}


def result(n: int, threads: int = 1):
    key = (n, threads)
    if key not in _cache:
        _cache[key] = CRITERIA[n - 1](threads)
    return _cache[key]


def serialize(payload) -> str:
    def default(x):
        if isinstance(x, complex):
            return [x.real, x.imag]
        return repr(x)

    return json.dumps(payload, default=default, sort_keys=True)


def c12():
    differing = []
    for n in range(1, 12):
        if serialize(result(n, 1)[2]) != serialize(result(n, 8)[2]):
            differing.append(n)
    detail = "outputs identical at 1 and 8 threads" if not differing else f"differ: {differing}"
    return not differing, detail


def report(n: int, ok: bool, detail: str) -> str:
    return f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"


@pytest.mark.parametrize("n", range(1, 12))
def test_criterion(n, capsys):
    ok, detail, _ = result(n)
    with capsys.disabled():
        print("\n" + report(n, ok, detail))
    assert ok, detail


def test_criterion_12_determinism(capsys):
    ok, detail = c12()
    with capsys.disabled():
        print("\n" + report(12, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for n in range(1, 12):
        print(report(n, *result(n)[:2]), flush=True)
    print(report(12, *c12()))
