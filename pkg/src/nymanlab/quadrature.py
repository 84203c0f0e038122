"""Panel Gauss-Legendre quadrature with bisection and singular grading.

Regular panels are integrated with a 16-point rule and checked against
the same rule on both halves; disagreeing panels are bisected.  Panels
that end on an integrable log singularity are graded geometrically
(ratio 1/2) toward it: the half away from the singularity becomes a
regular panel and the half touching it is split again, until the
innermost panel's whole contribution fits in its share of the
tolerance.  That innermost contribution is kept and also counted as its
own error.

All panel values are reduced in a fixed order, and the integrand is
assumed pointwise, so splitting evaluation across threads does not
change any bit of the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = ["QuadResult", "integrate", "GL_ORDER"]

GL_ORDER = 16
_X, _W = np.polynomial.legendre.leggauss(GL_ORDER)

REGULAR, SING_LEFT, SING_RIGHT = 0, 1, 2
_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    octave_mass: float  # integral of |f| over |x| >= octave_start
    panels: int


def _evaluate(f: Callable, x: np.ndarray, threads: int) -> np.ndarray:
    if threads <= 1 or x.size < 2048:
        return np.asarray(f(x), dtype=complex)
    chunks = np.array_split(x, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: np.asarray(f(c), dtype=complex), chunks))
    return np.concatenate(parts)


def _rule(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = mid[:, None] + half[:, None] * _X[None, :]
    weights = half[:, None] * _W[None, :]
    return nodes, weights


def _unresolvable(a: float, b: float) -> bool:
    # Nodes of narrower panels collide in floating point.
    return b - a <= 4096 * _EPS * max(abs(a), abs(b), 1.0)


def _noise_floor(a: float, b: float, mass: float) -> float:
    # Disagreement that node rounding alone can produce: nodes carry an
    # absolute error ~eps*|x|, which near a singularity is a large relative
    # error in the distance to it.
    return 16 * _EPS * max(abs(a), abs(b), 1.0) * mass / (b - a) + 16 * _EPS * mass


def _layout(lo, hi, base_count, singular, halfwidth, extra_points):
    """Split [lo, hi] into (a, b, kind) panels."""
    windows = []
    sing = sorted(g for g in singular if lo < g < hi)
    for i, g in enumerate(sing):
        left = g - halfwidth
        right = g + halfwidth
        if i:
            left = max(left, 0.5 * (sing[i - 1] + g))
        if i + 1 < len(sing):
            right = min(right, 0.5 * (g + sing[i + 1]))
        windows.append((max(left, lo), g, min(right, hi)))

    def inside_window(x):
        for w0, _, w1 in windows:
            if w0 < x < w1:
                return True
        return False

    points = set(np.linspace(lo, hi, base_count + 1).tolist())
    points.update(p for p in extra_points if lo < p < hi)
    points = {p for p in points if not inside_window(p)}
    for w0, g, w1 in windows:
        points.update((w0, g, w1))
    points = sorted(points)
    sing_set = set(sing)
    panels = []
    for a, b in zip(points[:-1], points[1:]):
        if b <= a:
            continue
        if a in sing_set:
            panels.append((a, b, SING_LEFT))
        elif b in sing_set:
            panels.append((a, b, SING_RIGHT))
        else:
            panels.append((a, b, REGULAR))
    return panels


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    *,
    base_count: int = 64,
    tol: float = 1e-10,
    refinement_limit: int = 40,
    singular: Sequence[float] = (),
    halfwidth: float = 0.05,
    extra_points: Sequence[float] = (),
    octave_start: float = math.inf,
    threads: int = 1,
) -> QuadResult:
    """Integrate a vectorised ``f`` over [lo, hi].

    ``singular`` lists points with integrable log singularities; each gets
    a graded window of half-width ``halfwidth``.  ``octave_start`` marks
    where the reported |f| mass starts (used for truncation-tail
    estimates).
    """
    if not hi > lo:
        raise ValueError("need hi > lo")
    length = hi - lo
    per_unit = tol / length
    # Panel breaks at +-octave_start so the octave mass covers exactly |x| >= it.
    octave_breaks = [x for x in (octave_start, -octave_start) if math.isfinite(x)]
    panels = _layout(lo, hi, base_count, singular, halfwidth,
                     list(extra_points) + octave_breaks)
    n_sing_ends = sum(1 for p in panels if p[2] != REGULAR)
    sing_budget = tol / max(1, n_sing_ends)

    # Each active entry: a, b, kind, depth, coarse value, coarse |f| mass.
    a0 = np.array([p[0] for p in panels])
    b0 = np.array([p[1] for p in panels])
    nodes, weights = _rule(a0, b0)
    vals = _evaluate(f, nodes.ravel(), threads).reshape(nodes.shape)
    coarse = (vals * weights).sum(axis=1)
    coarse_abs = (np.abs(vals) * weights).sum(axis=1)
    active = [
        (p[0], p[1], p[2], 0, coarse[i], coarse_abs[i]) for i, p in enumerate(panels)
    ]
    accepted = []  # (a, b, value, abs_mass, err)

    while active:
        sing_items = [e for e in active if e[2] != REGULAR]
        reg_items = [e for e in active if e[2] == REGULAR]
        next_active = []

        # Singular ends: accept when the whole innermost piece is negligible.
        pending_sing = []
        for a, b, kind, depth, c, cabs in sing_items:
            if abs(c) <= sing_budget or depth >= refinement_limit or _unresolvable(a, b):
                accepted.append((a, b, c, cabs, abs(c)))
            else:
                pending_sing.append((a, b, kind, depth))

        # Halves of every regular panel and of every singular panel being split.
        la, lb, ra, rb = [], [], [], []
        for a, b, *_ in reg_items:
            m = 0.5 * (a + b)
            la.append(a), lb.append(m), ra.append(m), rb.append(b)
        for a, b, kind, depth in pending_sing:
            m = 0.5 * (a + b)
            la.append(a), lb.append(m), ra.append(m), rb.append(b)
        if la:
            halves_a = np.array(la + ra)
            halves_b = np.array(lb + rb)
            nodes, weights = _rule(halves_a, halves_b)
            vals = _evaluate(f, nodes.ravel(), threads).reshape(nodes.shape)
            hv = (vals * weights).sum(axis=1)
            habs = (np.abs(vals) * weights).sum(axis=1)
            k = len(la)
            left_v, right_v = hv[:k], hv[k:]
            left_abs, right_abs = habs[:k], habs[k:]
        for i, (a, b, kind, depth, c, cabs) in enumerate(reg_items):
            fine = left_v[i] + right_v[i]
            err = abs(fine - c)
            mass = left_abs[i] + right_abs[i]
            if (
                err <= per_unit * (b - a)
                or err <= _noise_floor(a, b, mass)
                or depth >= refinement_limit
                or _unresolvable(a, b)
            ):
                accepted.append((a, b, fine, mass, err))
            else:
                m = 0.5 * (a + b)
                next_active.append((a, m, REGULAR, depth + 1, left_v[i], left_abs[i]))
                next_active.append((m, b, REGULAR, depth + 1, right_v[i], right_abs[i]))
        off = len(reg_items)
        for j, (a, b, kind, depth) in enumerate(pending_sing):
            i = off + j
            m = 0.5 * (a + b)
            if kind == SING_LEFT:
                next_active.append((a, m, SING_LEFT, depth + 1, left_v[i], left_abs[i]))
                next_active.append((m, b, REGULAR, 0, right_v[i], right_abs[i]))
            else:
                next_active.append((a, m, REGULAR, 0, left_v[i], left_abs[i]))
                next_active.append((m, b, SING_RIGHT, depth + 1, right_v[i], right_abs[i]))
        active = next_active

    accepted.sort(key=lambda e: (e[0], e[1]))
    value = complex(
        math.fsum(complex(e[2]).real for e in accepted),
        math.fsum(complex(e[2]).imag for e in accepted),
    )
    error = math.fsum(float(e[4]) for e in accepted)
    octave = math.fsum(
        float(e[3]) for e in accepted if abs(0.5 * (e[0] + e[1])) >= octave_start
    )
    return QuadResult(value, error, octave, len(accepted))
