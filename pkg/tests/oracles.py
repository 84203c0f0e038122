"""Reference computations that share no code with the package.

* ``zeta_series_tail``: for real s > 1, the partial sum plus the integral
  tail bracket (a rigorous enclosure, midpoint returned with half-width).
* ``zeta_borwein``: Borwein's alternating-series algorithm for eta(s),
  run in mpmath at 40 digits; valid in the critical strip.
* ``exact_pairings``: inner products of rho kernels by an exact rational
  sweep over all breakpoints (slow; small cutoffs only).
* ``brute_force_distance``: the 2-kernel least-squares problem solved in
  exact rationals, then confirmed as a minimum on a local grid.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product

import mpmath


def zeta_series_tail(s: float, n_terms: int = 200000) -> tuple[float, float]:
    """(midpoint, half-width) enclosure of zeta(s) for real s > 1.

    sum_{n>N} n^-s lies between int_{N+1}^inf and int_N^inf of x^-s dx.
    """
    assert s > 1
    partial = math.fsum(n ** -s for n in range(1, n_terms + 1))
    lo = partial + (n_terms + 1) ** (1 - s) / (s - 1)
    hi = partial + n_terms ** (1 - s) / (s - 1)
    return 0.5 * (lo + hi), 0.5 * (hi - lo) + 1e-15 * hi


def zeta_borwein(s: complex, n: int = 80, dps: int = 40) -> complex:
    """zeta(s) = eta(s) / (1 - 2^(1-s)) with Borwein's d_k weights."""
    with mpmath.workdps(dps):
        s = mpmath.mpc(s)
        d = []
        acc = mpmath.mpf(0)
        for i in range(n + 1):
            acc += mpmath.mpf(n) * mpmath.factorial(n + i - 1) * 4**i / (
                mpmath.factorial(n - i) * mpmath.factorial(2 * i)
            )
            d.append(acc)
        total = mpmath.mpf(0)
        for k in range(n):
            total += (-1) ** k * (d[k] - d[n]) / mpmath.power(k + 1, s)
        eta = -total / d[n]
        return complex(eta / (1 - mpmath.power(2, 1 - s)))


def rho_exact(alpha: Fraction, t: Fraction) -> Fraction:
    """{alpha/t} - alpha {1/t} straight from the definition."""
    def frac(x: Fraction) -> Fraction:
        return x - (x.numerator // x.denominator)

    return frac(alpha / t) - alpha * frac(1 / t)


def _breakpoints(alphas, eps: Fraction):
    pts = {Fraction(1)}
    for a in alphas:
        n = 1
        while Fraction(1, n) > eps:
            pts.add(Fraction(1, n))
            n += 1
        n = 1
        while a / n > eps:
            pts.add(a / n)
            n += 1
    return sorted(p for p in pts if p > eps)


def exact_pairings(alphas, eps: Fraction):
    """Exact <1, rho_a> and <rho_a, rho_b> over (eps, 1] as Fractions."""
    pts = [eps] + _breakpoints(alphas, eps)
    vals = {a: [] for a in alphas}
    widths = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = (lo + hi) / 2
        widths.append(hi - lo)
        for a in alphas:
            vals[a].append(rho_exact(a, mid))
    ones = [sum(w * v for w, v in zip(widths, vals[a])) for a in alphas]
    gram = [[sum(w * x * y for w, x, y in zip(widths, vals[a], vals[b])) for b in alphas]
            for a in alphas]
    return ones, gram


def brute_force_distance(a: Fraction, b: Fraction, eps: Fraction) -> float:
    """min_c ||1 - c1 rho_a - c2 rho_b||^2 with ||1||^2 = 1, returned as a distance."""
    (v1, v2), ((g11, g12), (_, g22)) = exact_pairings([a, b], eps)

    def q(c1, c2):
        return 1 - 2 * (c1 * v1 + c2 * v2) + c1 * c1 * g11 + 2 * c1 * c2 * g12 + c2 * c2 * g22

    det = g11 * g22 - g12 * g12
    c1 = (v1 * g22 - v2 * g12) / det
    c2 = (v2 * g11 - v1 * g12) / det
    best = q(c1, c2)
    # Confirm it is the minimum over a small exact grid around the solution.
    step = Fraction(1, 1000)
    for d1, d2 in product((-1, 0, 1), repeat=2):
        assert q(c1 + d1 * step, c2 + d2 * step) >= best
    return math.sqrt(float(best))
