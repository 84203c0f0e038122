"""The fractional-part kernels rho_alpha and exact step-function algebra.

rho_alpha(t) = {alpha/t} - alpha {1/t} = alpha floor(1/t) - floor(alpha/t).

The second form shows rho_alpha is piecewise constant with jumps only at
t = 1/n and t = alpha/n, so everything here works on explicit step
functions over (cutoff, 1].  When alpha is a ``Fraction`` all breakpoints
and values stay exact rationals; float alphas take a floating path.

For tiny cutoffs the breakpoint count explodes (about (1 + alpha)/cutoff),
so :func:`kernel_inner_product` works in the variable u = 1/t instead,
where rho_alpha(1/u) = alpha floor(u) - floor(alpha u) is periodic with
period q for alpha = p/q.  One period of the merged breakpoints is swept
exactly and the sum over periods of the weights du/u^2 is folded into
digamma differences.
"""

from __future__ import annotations

import bisect
import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational, Real
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import InputParseError, PreconditionError
from .zeta_engine import as_point, zeta

__all__ = [
    "KernelSpec",
    "StepFunction",
    "InnerProductResult",
    "MellinResult",
    "exact",
    "frac",
    "eval_rho",
    "rho_fractional_form",
    "rho_as_step",
    "one_step",
    "inner_product",
    "kernel_inner_product",
    "mellin_step",
    "mellin_rho_closed",
    "mellin_frac_identity",
    "mellin_frac_identity_residual",
    "semigroup_apply",
    "inv_sqrt",
]

Number = Union[Fraction, float]
EPS = float(np.finfo(float).eps)


def exact(x) -> Number:
    """Exact rational for ints, Fractions and decimal strings; floats pass through.

    Strings accept ``"p/q"`` and decimals (``"0.1"`` is exactly 1/10).
    """
    if isinstance(x, bool):
        raise PreconditionError(f"not a number: {x!r}")
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputParseError(f"cannot read {x!r} as a rational") from exc
    if isinstance(x, Real):
        x = float(x)
        if not math.isfinite(x):
            raise PreconditionError(f"non-finite value {x!r}")
        return x
    raise PreconditionError(f"not a real number: {x!r}")


def _as_cutoff(x) -> Fraction:
    # A float cutoff like 1e-8 is read as the decimal it prints as.
    if isinstance(x, float):
        return Fraction(repr(x))
    v = exact(x)
    return v if isinstance(v, Fraction) else Fraction(repr(v))


def frac(x: Number) -> Number:
    return x - math.floor(x)


@dataclass(frozen=True)
class KernelSpec:
    alpha: Number

    def __post_init__(self):
        a = exact(self.alpha)
        if not 0 < a < 1:
            raise PreconditionError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        return cls(exact(text))

    @property
    def is_rational(self) -> bool:
        return isinstance(self.alpha, Fraction)

    def __str__(self):
        return str(self.alpha)


def _same_kind(spec: KernelSpec, t) -> tuple[Number, Number]:
    a, t = spec.alpha, exact(t)
    if isinstance(a, float) or isinstance(t, float):
        return Fraction(a), Fraction(t)
    return a, t


def eval_rho(spec: KernelSpec, t) -> Number:
    """Exact rho_alpha(t); a Fraction when alpha and t are both rational.

    Float inputs are evaluated exactly on their binary values and rounded
    once at the end.
    """
    a, x = _same_kind(spec, t)
    if x <= 0:
        raise PreconditionError(f"t must be positive, got {t!r}")
    value = a * math.floor(1 / x) - math.floor(a / x)
    if spec.is_rational and not isinstance(exact(t), float):
        return value
    return float(value)


def rho_fractional_form(spec: KernelSpec, t) -> Number:
    """{alpha/t} - alpha {1/t}, in the same arithmetic as :func:`eval_rho`."""
    a, x = _same_kind(spec, t)
    if x <= 0:
        raise PreconditionError(f"t must be positive, got {t!r}")
    value = frac(a / x) - a * frac(1 / x)
    if spec.is_rational and not isinstance(exact(t), float):
        return value
    return float(value)


def inv_sqrt(lam: Number) -> Number:
    """lam**-0.5, exact when lam is the square of a rational."""
    if isinstance(lam, Fraction):
        rn, rd = math.isqrt(lam.numerator), math.isqrt(lam.denominator)
        if rn * rn == lam.numerator and rd * rd == lam.denominator:
            return Fraction(rd, rn)
    return 1.0 / math.sqrt(lam)


@dataclass(frozen=True, eq=True)
class StepFunction:
    """Piecewise constant function on (cutoff, 1].

    ``values[i]`` holds on (breakpoints[i-1], breakpoints[i]], with
    breakpoints[-1] read as ``cutoff``.  Outside (0, 1] the function is 0;
    on (0, cutoff] only ``|f| <= tail_bound`` is known.  Construction
    merges equal neighbours, so equal functions compare equal.
    """

    breakpoints: tuple
    values: tuple
    cutoff: Number
    tail_bound: float = field(default=1.0, compare=False)

    def __post_init__(self):
        bps = tuple(self.breakpoints)
        vals = tuple(self.values)
        if len(bps) != len(vals) or not bps:
            raise PreconditionError("need one value per breakpoint and at least one breakpoint")
        if bps[-1] != 1:
            raise PreconditionError("last breakpoint must be 1")
        if not 0 < self.cutoff < bps[0]:
            raise PreconditionError("breakpoints must lie in (cutoff, 1] with cutoff > 0")
        if self.tail_bound < 0:
            raise PreconditionError("tail_bound must be nonnegative")
        merged_b, merged_v = [], []
        prev = self.cutoff
        for b, v in zip(bps, vals):
            if not b > prev:
                raise PreconditionError("breakpoints must strictly increase")
            prev = b
            if merged_v and merged_v[-1] == v:
                merged_b[-1] = b
            else:
                merged_b.append(b)
                merged_v.append(v)
        object.__setattr__(self, "breakpoints", tuple(merged_b))
        object.__setattr__(self, "values", tuple(merged_v))

    def __len__(self):
        return len(self.breakpoints)

    def __call__(self, t) -> Number:
        if t > 1:
            return 0
        if t <= self.cutoff:
            raise PreconditionError(f"t = {t} lies in the untracked tail (0, {self.cutoff}]")
        return self.values[bisect.bisect_left(self.breakpoints, t)]

    def restrict(self, cutoff) -> "StepFunction":
        """The same function known only on (cutoff, 1], cutoff >= self.cutoff."""
        if cutoff < self.cutoff:
            raise PreconditionError("cannot extend below the current cutoff")
        if cutoff == self.cutoff:
            return self
        if cutoff >= 1:
            raise PreconditionError("cutoff must stay below 1")
        i = bisect.bisect_right(self.breakpoints, cutoff)
        return StepFunction(self.breakpoints[i:], self.values[i:], cutoff, self.tail_bound)

    def _binary(self, other: "StepFunction", op: Callable, tail_bound: float) -> "StepFunction":
        cut = max(self.cutoff, other.cutoff)
        f, g = self.restrict(cut), other.restrict(cut)
        points = sorted(set(f.breakpoints) | set(g.breakpoints))
        values = []
        i = j = 0
        for p in points:
            while f.breakpoints[i] < p:
                i += 1
            while g.breakpoints[j] < p:
                j += 1
            values.append(op(f.values[i], g.values[j]))
        return StepFunction(tuple(points), tuple(values), cut, tail_bound)

    def __add__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self._binary(other, lambda x, y: x + y, self.tail_bound + other.tail_bound)

    def __sub__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self._binary(other, lambda x, y: x - y, self.tail_bound + other.tail_bound)

    def __mul__(self, c):
        if isinstance(c, StepFunction) or not isinstance(c, (Real, Fraction)):
            return NotImplemented
        return StepFunction(
            self.breakpoints,
            tuple(v * c for v in self.values),
            self.cutoff,
            self.tail_bound * abs(float(c)),
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def integral(self) -> float:
        prev = self.cutoff
        terms = []
        for b, v in zip(self.breakpoints, self.values):
            terms.append(float(v * (b - prev)))
            prev = b
        return math.fsum(terms)

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).value, 0.0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_right", "value"])
        for b, v in zip(self.breakpoints, self.values):
            w.writerow([repr(float(b)), repr(float(v))])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "cutoff": _json_number(self.cutoff),
            "tail_bound": self.tail_bound,
            "breakpoints": [_json_number(b) for b in self.breakpoints],
            "values": [_json_number(v) for v in self.values],
        }


def _json_number(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return f"{x}/1"
    return float(x)


def one_step(cutoff=Fraction(1, 10**8)) -> StepFunction:
    """The constant function 1 on (0, 1]."""
    return StepFunction((Fraction(1),), (Fraction(1),), _as_cutoff(cutoff), 1.0)


def rho_as_step(spec: KernelSpec, cutoff) -> StepFunction:
    """rho_alpha as a StepFunction on (cutoff, 1]; needs 0 < cutoff < alpha/2."""
    a = spec.alpha
    if spec.is_rational:
        eps = _as_cutoff(cutoff)
    else:
        eps = float(cutoff)
    if not 0 < eps < a / 2:
        raise PreconditionError(f"cutoff must lie in (0, alpha/2) = (0, {a / 2}), got {cutoff!r}")
    n_max = math.floor(1 / eps)
    if spec.is_rational:
        one = Fraction(1)
        points = {one / n for n in range(1, n_max + 1)}
        points.update(a / n for n in range(1, math.floor(a / eps) + 1))
        points = sorted(p for p in points if p > eps)
        # Constant on (prev, b] and right-continuous in 1/t: value at b.
        values = [a * math.floor(1 / b) - math.floor(a / b) for b in points]
    else:
        ns = np.arange(1, n_max + 1, dtype=float)
        pts = np.unique(np.concatenate([1.0 / ns, a / ns[: math.floor(a / eps)]]))
        pts = pts[pts > eps]
        left = np.concatenate([[eps], pts[:-1]])
        mid = 0.5 * (left + pts)
        vals = a * np.floor(1.0 / mid) - np.floor(a / mid)
        points, values = [float(p) for p in pts], [float(v) for v in vals]
        points[-1] = 1.0
    return StepFunction(tuple(points), tuple(values), eps, 1.0)


@dataclass(frozen=True)
class InnerProductResult:
    value: float
    abs_error_bound: float


def inner_product(f: StepFunction, g: StepFunction) -> InnerProductResult:
    """L^2(0,1) pairing by an exact merged-breakpoint sweep.

    Each term f*g*dt is formed exactly (for rational data) and rounded
    once; terms are summed with ``math.fsum``.  The untracked tail (0, eps]
    contributes at most eps * f.tail_bound * g.tail_bound.
    """
    cut = max(f.cutoff, g.cutoff)
    f, g = f.restrict(cut), g.restrict(cut)
    points = sorted(set(f.breakpoints) | set(g.breakpoints))
    terms = []
    i = j = 0
    prev = cut
    for p in points:
        while f.breakpoints[i] < p:
            i += 1
        while g.breakpoints[j] < p:
            j += 1
        terms.append(float(f.values[i] * g.values[j] * (p - prev)))
        prev = p
    value = math.fsum(terms)
    rounding = EPS * math.fsum(abs(x) for x in terms)
    return InnerProductResult(value, float(cut) * f.tail_bound * g.tail_bound + rounding)


# ---------------------------------------------------------------------------
# Period-folded sweep for rational kernels at tiny cutoffs.

# B_2k / 2k for the digamma asymptotic series, k = 1..8.
_PSI_COEFFS = [
    1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12, -3617 / 8160,
]
_PSI_MIN_ARG = 10.0


def _psi_step(b: float, delta: float) -> float:
    """digamma(b + delta) - digamma(b) for b >= 10 without cancellation."""
    r = delta / b
    out = math.log1p(r) + delta / (2.0 * b * (b + delta))
    lr = math.log1p(r)
    inv_b2 = 1.0 / (b * b)
    pw = 1.0
    for k, c in enumerate(_PSI_COEFFS, start=1):
        pw *= inv_b2
        out += c * pw * -math.expm1(-2 * k * lr)
    return out


def _u_profile(spec: Optional[KernelSpec]) -> tuple[int, Callable[[Fraction], Fraction], list]:
    """(period, u -> phi(u), breakpoint generator) for 1 or rho_alpha in u = 1/t."""
    if spec is None:
        return 1, (lambda u: Fraction(1)), (lambda lo, hi: [])
    a = spec.alpha
    step = 1 / a

    def phi(u: Fraction) -> Fraction:
        return a * math.floor(u) - math.floor(a * u)

    def jumps(lo: Fraction, hi: Fraction):
        m0 = math.floor(lo * a) + 1
        out = []
        m = m0
        while m * step < hi:
            out.append(m * step)
            m += 1
        return out

    return a.denominator, phi, jumps


_FOLD_EXPLICIT_PERIODS = 12


def kernel_inner_product(
    a: Optional[KernelSpec], b: Optional[KernelSpec], cutoff=1e-8
) -> InnerProductResult:
    """<f, g> on (cutoff, 1] where f, g are rho kernels or ``None`` for 1.

    Rational kernels use the period-folded sweep, so the cost depends on
    the period lcm(q_a, q_b) rather than on 1/cutoff.  Float kernels fall
    back to :func:`inner_product` on explicit step functions.
    """
    for spec in (a, b):
        if spec is not None and not spec.is_rational:
            eps = float(cutoff)
            f = rho_as_step(a, eps) if a is not None else one_step(eps)
            g = rho_as_step(b, eps) if b is not None else one_step(eps)
            return inner_product(f, g)
    eps = _as_cutoff(cutoff)
    if not 0 < eps < 1:
        raise PreconditionError("cutoff must lie in (0, 1)")
    period_a, phi_a, jumps_a = _u_profile(a)
    period_b, phi_b, jumps_b = _u_profile(b)
    period = math.lcm(period_a, period_b)
    u_max = 1 / eps
    one = Fraction(1)

    # Merged breakpoints of one period [1, 1 + L].
    start, end = one, one + period
    pts = set(Fraction(k) for k in range(1, period + 2))
    pts.update(jumps_a(start, end))
    pts.update(jumps_b(start, end))
    pts = sorted(pts)
    lows = pts[:-1]
    highs = pts[1:]
    coeffs = [phi_a(x) * phi_b(x) for x in lows]  # right-continuous in u

    full_periods = math.floor((u_max - 1) / period)
    explicit = min(full_periods, _FOLD_EXPLICIT_PERIODS)
    terms: list[float] = []

    def piece(c, lo, hi):
        if c:
            terms.append(float(c * (hi - lo) / (lo * hi)))

    for k in range(explicit):
        shift = k * period
        for c, lo, hi in zip(coeffs, lows, highs):
            piece(c, lo + shift, hi + shift)

    if full_periods > explicit:
        # sum_{k=explicit}^{K-1} [1/(x + kL) - 1/(y + kL)]
        #   = (psi(x/L + k0) - psi(y/L + k0) - psi(x/L + K) + psi(y/L + K)) / L
        k0, kk = explicit, full_periods
        for c, lo, hi in zip(coeffs, lows, highs):
            if not c:
                continue
            delta = float((hi - lo) / period)
            x = float(lo / period)
            folded = (_psi_step(x + k0, delta) - _psi_step(x + kk, delta)) / period
            terms.append(float(c) * folded)

    shift = full_periods * period
    for c, lo, hi in zip(coeffs, lows, highs):
        lo, hi = lo + shift, min(hi + shift, u_max)
        if lo >= u_max:
            break
        piece(c, lo, hi)

    value = math.fsum(terms)
    rounding = 4 * EPS * (math.fsum(abs(x) for x in terms) + len(terms))
    return InnerProductResult(value, float(eps) + rounding)


# ---------------------------------------------------------------------------
# Mellin transforms.


@dataclass(frozen=True)
class MellinResult:
    value: complex
    abs_error_bound: float


def _power_diffs(lows, highs, s: complex) -> np.ndarray:
    """highs**s - lows**s elementwise, accurate when the two are close."""
    lo = np.array([float(x) for x in lows])
    ratio_m1 = np.array([float((h - l) / l) for l, h in zip(lows, highs)])
    return np.exp(s * np.log(lo)) * np.expm1(s * np.log1p(ratio_m1))


def _fsum_c(arr: np.ndarray) -> complex:
    return complex(math.fsum(arr.real), math.fsum(arr.imag))


def mellin_step(f: StepFunction, s) -> MellinResult:
    """int_0^1 f(t) t^(s-1) dt integrated exactly interval by interval.

    The tail (0, eps] is bounded by eps^Re(s) * tail_bound / Re(s).
    """
    s = as_point(s)
    if s.real <= 0:
        raise PreconditionError("Re(s) must be positive")
    lows = (f.cutoff,) + f.breakpoints[:-1]
    diffs = _power_diffs(lows, f.breakpoints, s)
    coeffs = np.array([float(v) for v in f.values])
    terms = coeffs * diffs / s
    value = _fsum_c(terms)
    eps = float(f.cutoff)
    tail = eps**s.real * f.tail_bound / s.real
    rounding = 8 * EPS * float(np.abs(terms).sum()) * (1 + abs(s) * abs(math.log(eps)))
    return MellinResult(value, tail + rounding)


def mellin_rho_closed(spec: KernelSpec, s, tol: float = 1e-13) -> complex:
    """(alpha - alpha^s) zeta(s) / s, with the s -> 1 limit -alpha log(alpha)."""
    s = as_point(s)
    if s.real <= 0.5:
        raise PreconditionError("Re(s) must exceed 1/2")
    a = float(spec.alpha)
    if abs(s - 1) < 1e-8:
        return complex(-a * math.log(a))
    # alpha - alpha^s = -alpha * expm1((s - 1) log alpha), stable near s = 1.
    diff = -a * _cexpm1((s - 1) * math.log(a))
    # tol applies to the product, so zeta only needs tol * |s / diff|.
    zeta_tol = max(tol * abs(s) / abs(diff), tol)
    return diff * zeta(s, zeta_tol).value / s


def _cexpm1(z: complex) -> complex:
    return complex(np.expm1(np.complex128(z)))


def mellin_frac_identity(s, tail_tol: float = 1e-12, max_terms: int = 10**7):
    """Both sides of int_0^1 {1/t} t^(s-1) dt = 1/(s-1) - zeta(s)/s.

    The left side is integrated exactly over (1/(n+1), 1/n], where
    {1/t} = 1/t - n, for n up to M; the omitted (0, 1/(M+1)] contributes at
    most (M+1)^-Re(s) / Re(s).  Returns ``(lhs, rhs, error_bound)``.
    """
    s = as_point(s)
    if s.real <= 1:
        raise PreconditionError("Re(s) must exceed 1")
    sigma = s.real
    m = math.ceil((tail_tol * sigma) ** (-1.0 / sigma))
    m = max(16, min(m, max_terms))
    n = np.arange(1, m + 1, dtype=float)
    log_ratio = np.log1p(1.0 / n)  # log(b/a) with a = 1/(n+1), b = 1/n
    log_a = -np.log1p(n)
    t1 = np.exp((s - 1) * log_a) * np.expm1((s - 1) * log_ratio) / (s - 1)
    t2 = n * np.exp(s * log_a) * np.expm1(s * log_ratio) / s
    terms = t1 - t2
    lhs = _fsum_c(terms)
    tail = (m + 1) ** -sigma / sigma
    z = zeta(s, 1e-13)
    rhs = 1 / (s - 1) - z.value / s
    rounding = 16 * EPS * float((np.abs(t1) + np.abs(t2)).sum())
    return lhs, rhs, tail + rounding + z.abs_error_estimate / abs(s)


def mellin_frac_identity_residual(s, tail_tol: float = 1e-12) -> float:
    """|int_0^1 {1/t} t^(s-1) dt - (1/(s-1) - zeta(s)/s)|."""
    lhs, rhs, _ = mellin_frac_identity(s, tail_tol)
    return abs(lhs - rhs)


def semigroup_apply(lam, f: StepFunction) -> StepFunction:
    """U(lam) f (t) = lam^-1/2 f(t / lam), for 0 < lam <= 1.

    The image lives on (lam*eps, lam] and vanishes on (lam, 1].
    """
    lam = exact(lam)
    if not 0 < lam <= 1:
        raise PreconditionError(f"lambda must lie in (0, 1], got {lam!r}")
    if lam == 1:
        return f
    c = inv_sqrt(lam)
    bps = tuple(lam * b for b in f.breakpoints) + (Fraction(1) if isinstance(lam, Fraction) else 1.0,)
    vals = tuple(v * c for v in f.values) + (0,)
    return StepFunction(bps, vals, lam * f.cutoff, f.tail_bound * float(c))
