"""Integrals over the critical line Re(w) = 1/2.

Every operation here computes (1/2 pi) int_{|tau| <= T} f(tau) d tau for some
integrand built from boundary values h(1/2 + i tau), using the panel
quadrature of :mod:`nymanlab.quadrature`.  When the integrand satisfies
f(-tau) = conj f(tau) only [0, T] is integrated and the result is
2 Re of that half, which is then exactly real.

Each result carries two error figures:

* ``panel_error_estimate``: the summed coarse/fine disagreement of the
  accepted panels plus the innermost pieces at log singularities.
* ``truncation_tail_estimate``: the |f| mass of the last octave
  T/2 <= |tau| <= T.  For integrands decaying like tau^-2 this equals the
  mass beyond T, and it always dominates the change produced by doubling
  T when |f| decays at least like 1/tau.  :func:`convergence_study`
  records the observed doubling differences as well.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .blaschke import ZeroMultiset, b_at_one, blaschke_product
from .errors import InsufficientCoverageError, PoleError, PreconditionError
from .quadrature import integrate
from .step_kernels import KernelSpec
from .zeta_engine import (
    ZeroTable,
    as_point,
    log_abs_zeta_line_array,
    zeta,
    zeta_array,
)

__all__ = [
    "LineQuadratureSpec",
    "LineIntegralResult",
    "LineFunction",
    "FactorizationCheck",
    "bsy_integral",
    "outer_integral",
    "outer_kernel",
    "factorization_check",
    "factorization_residual",
    "cauchy_eval",
    "lemma_orthogonality",
    "synthetic_projection_norm",
    "synthetic_projection_residual",
    "convergence_study",
    "study_to_csv",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LineQuadratureSpec:
    truncation_height: float
    base_panel_count: int = 256
    refinement_limit: int = 40
    singularity_halfwidth: float = 0.05
    target_tol: float = 1e-8

    def __post_init__(self):
        for name in ("truncation_height", "singularity_halfwidth", "target_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise PreconditionError(f"{name} must be positive and finite, got {v!r}")
        if self.base_panel_count < 1 or self.refinement_limit < 0:
            raise PreconditionError("base_panel_count >= 1 and refinement_limit >= 0 required")

    def at_height(self, T: float) -> "LineQuadratureSpec":
        return replace(self, truncation_height=float(T))


@dataclass(frozen=True)
class LineIntegralResult:
    value: complex
    truncation_tail_estimate: float
    panel_error_estimate: float
    T_used: float
    panels_used: int = 0

    def to_json(self) -> dict:
        v = complex(self.value)
        return {
            "value_re": v.real,
            "value_im": v.imag,
            "T": self.T_used,
            "tail_estimate": self.truncation_tail_estimate,
            "panel_error": self.panel_error_estimate,
            "panels_used": self.panels_used,
        }

    def scaled(self, c: complex) -> "LineIntegralResult":
        return replace(
            self,
            value=c * self.value,
            truncation_tail_estimate=abs(c) * self.truncation_tail_estimate,
            panel_error_estimate=abs(c) * self.panel_error_estimate,
        )


@dataclass(frozen=True)
class LineFunction:
    """Boundary values tau -> h(1/2 + i tau) of a function on the half-plane.

    ``decay_exponent`` p documents |h| = O(|tau|^-p); 0 is used for
    functions of at most logarithmic growth such as log|zeta|.
    ``conjugate_symmetric`` means h(1/2 - i tau) = conj h(1/2 + i tau).
    ``log_singularities`` lists ordinates tau >= 0 where h has integrable
    log singularities (mirrored to -tau automatically); they are trusted up
    to ``coverage``.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    decay_exponent: float
    conjugate_symmetric: bool = False
    log_singularities: tuple[float, ...] = ()
    coverage: float = math.inf
    label: str = ""

    def __call__(self, tau) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(tau, dtype=float)), dtype=complex)

    @classmethod
    def analytic(cls, h: Callable, decay_exponent: float, conjugate_symmetric: bool = False,
                 label: str = "") -> "LineFunction":
        """Wrap a vectorised h(w) defined on the half-plane closure."""
        return cls(lambda tau: h(0.5 + 1j * tau), float(decay_exponent),
                   conjugate_symmetric, label=label)

    @classmethod
    def log_abs_zeta(cls, zeros: ZeroTable) -> "LineFunction":
        return cls(
            log_abs_zeta_line_array,
            0.0,
            True,
            tuple(zeros.ordinates),
            zeros.max_height,
            f"log|zeta| ({zeros.source})",
        )

    @classmethod
    def neg_log_abs_w(cls) -> "LineFunction":
        """Boundary log-modulus of 1/s: -log|w| = -log(1/4 + tau^2) / 2."""
        return cls(lambda tau: -0.5 * np.log(0.25 + tau * tau), 0.0, True, label="-log|w|")

    @classmethod
    def mellin_rho(cls, spec: KernelSpec) -> "LineFunction":
        """(alpha - alpha^w) zeta(w) / w on the line (the closed-form Mellin transform)."""
        a = float(spec.alpha)

        def evaluate(tau):
            w = 0.5 + 1j * tau
            z, _ = zeta_array(w)
            return (a - np.exp(w * math.log(a))) * z / w

        return cls(evaluate, 1.0, True, label=f"mellin rho_{spec}")

    def __add__(self, other: "LineFunction") -> "LineFunction":
        return LineFunction(
            lambda tau: self(tau) + other(tau),
            min(self.decay_exponent, other.decay_exponent),
            self.conjugate_symmetric and other.conjugate_symmetric,
            tuple(sorted(set(self.log_singularities) | set(other.log_singularities))),
            min(self.coverage, other.coverage),
        )

    def __mul__(self, c) -> "LineFunction":
        c = complex(c)
        return LineFunction(
            lambda tau: c * self(tau),
            self.decay_exponent,
            self.conjugate_symmetric and c.imag == 0,
            self.log_singularities,
            self.coverage,
        )

    __rmul__ = __mul__


def _require_admissible(h: LineFunction) -> None:
    if not h.decay_exponent >= 1:
        raise PreconditionError(
            f"test function needs decay exponent >= 1, got {h.decay_exponent!r}"
        )


def _require_coverage(h: LineFunction, T: float) -> None:
    if h.coverage < T:
        raise InsufficientCoverageError(
            f"zero table reaches height {h.coverage:g} but the integral runs to T = {T:g}"
        )


def _line_integral(
    f: Callable[[np.ndarray], np.ndarray],
    spec: LineQuadratureSpec,
    *,
    symmetric: bool,
    singular: Sequence[float] = (),
    extra_points: Sequence[float] = (),
    threads: int = 1,
) -> LineIntegralResult:
    """(1/2 pi) int_{-T}^{T} f(tau) d tau."""
    T = spec.truncation_height
    pos = [g for g in singular if 0 < g < T]
    common = dict(
        base_count=spec.base_panel_count,
        tol=spec.target_tol * TWO_PI / (2 if symmetric else 1),
        refinement_limit=spec.refinement_limit,
        halfwidth=spec.singularity_halfwidth,
        octave_start=0.5 * T,
        threads=threads,
    )
    if symmetric:
        q = integrate(f, 0.0, T, singular=pos,
                      extra_points=[p for p in extra_points if p > 0], **common)
        value = complex(2.0 * q.value.real / TWO_PI, 0.0)
        scale = 2.0 / TWO_PI
    else:
        mirrored = sorted([-g for g in pos] + pos)
        q = integrate(f, -T, T, singular=mirrored, extra_points=extra_points, **common)
        value = q.value / TWO_PI
        scale = 1.0 / TWO_PI
    return LineIntegralResult(value, scale * q.octave_mass, scale * q.error, T, q.panels)


# ---------------------------------------------------------------------------
# The BSY integral and the outer factor.


def bsy_integral(spec: LineQuadratureSpec, zeros: ZeroTable, threads: int = 1) -> LineIntegralResult:
    """(1/2 pi) int_{|tau|<=T} log|zeta(1/2+i tau)| / (1/4 + tau^2) d tau.

    Its T -> infinity limit is the sum of log|rho/(1-rho)| over zeros off
    the line, so 0 unless such zeros exist.  Panels are split at every
    tabulated ordinate below T.
    """
    h = LineFunction.log_abs_zeta(zeros)
    _require_coverage(h, spec.truncation_height)

    def f(tau):
        return h(tau) / (0.25 + tau * tau)

    return _line_integral(f, spec, symmetric=True, singular=h.log_singularities,
                          threads=threads)


def outer_kernel(s: complex, w):
    """(s + w - 2 s w) / (s - w); identically 1 when s = 1."""
    return (s + w - 2 * s * w) / (s - w)


def outer_integral(log_modulus: LineFunction, s, spec: LineQuadratureSpec,
                   threads: int = 1) -> LineIntegralResult:
    """(1/2 pi) int log_modulus(w) (s + w - 2sw)/(s - w) |dw| / |w|^2 over |tau| <= T.

    This is the log of the outer function with the given boundary modulus,
    evaluated at s.  ``log_modulus`` must be real valued.
    """
    s = as_point(s)
    delta = spec.singularity_halfwidth
    # Relative slack so that delta = (Re s - 1/2)/10 itself is accepted.
    if not s.real - 0.5 >= 10 * delta * (1 - 1e-12):
        raise PreconditionError(
            f"s = {s} lies within 10*delta = {10 * delta:g} of the critical line"
        )
    _require_coverage(log_modulus, spec.truncation_height)

    def f(tau):
        w = 0.5 + 1j * tau
        return log_modulus(tau).real * outer_kernel(s, w) / (0.25 + tau * tau)

    # The kernel peaks within a few (Re s - 1/2) of tau = Im s.
    d = s.real - 0.5
    extra = [s.imag + k * d for k in (-4, -2, -1, -0.5, 0, 0.5, 1, 2, 4)]
    symmetric = log_modulus.conjugate_symmetric and s.imag == 0
    return _line_integral(f, spec, symmetric=symmetric,
                          singular=log_modulus.log_singularities,
                          extra_points=extra, threads=threads)


@dataclass(frozen=True)
class FactorizationCheck:
    s: complex
    left: complex  # log((s - 1) zeta(s) / s)
    outer: LineIntegralResult
    log_blaschke: complex
    zeta_error: float
    residual: float

    @property
    def bound(self) -> float:
        """The contract: residual <= tail + panel error + zeta error."""
        return (self.outer.truncation_tail_estimate + self.outer.panel_error_estimate
                + self.zeta_error)

    def to_json(self) -> dict:
        return {
            "s_re": self.s.real,
            "s_im": self.s.imag,
            "left_re": self.left.real,
            "left_im": self.left.imag,
            "outer": self.outer.to_json(),
            "log_blaschke_re": self.log_blaschke.real,
            "log_blaschke_im": self.log_blaschke.imag,
            "zeta_error": self.zeta_error,
            "residual": self.residual,
            "bound": self.bound,
        }


def factorization_check(s, ms: Optional[ZeroMultiset], spec: LineQuadratureSpec,
                        zeros: ZeroTable, threads: int = 1) -> FactorizationCheck:
    """Compare log((s-1) zeta(s)/s) with log outer(s) + log B(s).

    Imaginary parts are compared modulo 2 pi, since the outer integral
    fixes its own branch of the logarithm.
    """
    s = as_point(s)
    if not s.real > 0.5:
        raise PreconditionError("factorization needs Re(s) > 1/2")
    if s == 1:
        raise PoleError("s = 1 is excluded; use bsy_integral for that case")
    ms = ms if ms is not None else ZeroMultiset()
    z = zeta(s, 1e-12)
    g = (s - 1) * z.value / s
    if g == 0:
        raise PreconditionError(f"(s-1) zeta(s)/s vanishes at s = {s}")
    left = cmath.log(g)
    outer = outer_integral(LineFunction.log_abs_zeta(zeros), s, spec, threads)
    b = blaschke_product(ms, s)
    log_b = cmath.log(b) if b != 0 else complex(-math.inf)
    diff = left - (outer.value + log_b)
    wrapped = math.remainder(diff.imag, TWO_PI)
    residual = abs(complex(diff.real, wrapped))
    # Relative error of zeta carries straight into its log.
    zeta_error = z.abs_error_estimate / abs(z.value)
    return FactorizationCheck(s, left, outer, log_b, zeta_error, residual)


def factorization_residual(s, ms: Optional[ZeroMultiset], spec: LineQuadratureSpec,
                           zeros: ZeroTable, threads: int = 1) -> float:
    """|log((s-1) zeta(s)/s) - (outer integral of log|zeta| + log B(s))|."""
    return factorization_check(s, ms, spec, zeros, threads).residual


# ---------------------------------------------------------------------------
# Cauchy formula and the Hilbert-space checks.


def cauchy_eval(h: LineFunction, s, spec: LineQuadratureSpec, threads: int = 1) -> LineIntegralResult:
    """(1/2 pi) int_{|tau|<=T} h(1/2 + i tau) / (s - 1/2 - i tau) d tau, which tends to h(s)."""
    s = as_point(s)
    if not s.real > 0.5:
        raise PreconditionError("Cauchy formula needs Re(s) > 1/2")
    _require_admissible(h)

    def f(tau):
        return h(tau) / (s - 0.5 - 1j * tau)

    d = s.real - 0.5
    extra = [s.imag + k * d for k in (-4, -2, -1, 0, 1, 2, 4)]
    symmetric = h.conjugate_symmetric and s.imag == 0
    return _line_integral(f, spec, symmetric=symmetric, singular=h.log_singularities,
                          extra_points=extra, threads=threads)


def lemma_orthogonality(ms: ZeroMultiset, h: LineFunction, spec: LineQuadratureSpec,
                        threads: int = 1) -> LineIntegralResult:
    """(1/2 pi) int conj(1/w - B(1) B(w)/w) B(w) h(w) |dw| over |tau| <= T.

    The integral over the whole line vanishes: 1/w - B(1)B/w is orthogonal
    to B H^2.  For the empty multiset the integrand is identically 0.
    """
    _require_admissible(h)
    b1 = b_at_one(ms)

    def f(tau):
        w = 0.5 + 1j * tau
        b = blaschke_product(ms, w)
        return np.conj(1 / w - b1 * b / w) * b * h(tau)

    symmetric = h.conjugate_symmetric and ms.is_conjugate_closed()
    return _line_integral(f, spec, symmetric=symmetric, singular=h.log_singularities,
                          threads=threads)


def synthetic_projection_norm(ms: ZeroMultiset, spec: LineQuadratureSpec,
                              threads: int = 1) -> LineIntegralResult:
    """||1/w - B(1) B(w)/w||^2 = (1/2 pi) int |1/w - B(1)B(w)/w|^2 d tau, truncated."""
    b1 = b_at_one(ms)

    def f(tau):
        w = 0.5 + 1j * tau
        r = (1 - b1 * blaschke_product(ms, w)) / w
        return (r * np.conj(r)).real

    symmetric = ms.is_conjugate_closed()
    return _line_integral(f, spec, symmetric=symmetric, threads=threads)


def synthetic_projection_residual(ms: ZeroMultiset, spec: LineQuadratureSpec,
                                  threads: int = 1) -> float:
    """|‖1/w - B(1)B/w‖^2 - (1 - B(1)^2)|: the projection of 1/w on B H^2 has norm B(1)."""
    if not ms:
        raise PreconditionError("synthetic projection needs a nonempty multiset")
    res = synthetic_projection_norm(ms, spec, threads)
    b1 = b_at_one(ms)
    return abs(res.value.real - (1.0 - b1 * b1))


# ---------------------------------------------------------------------------
# Convergence studies.


def convergence_study(
    compute: Callable[[LineQuadratureSpec], LineIntegralResult],
    spec: LineQuadratureSpec,
    heights: Iterable[float],
) -> list[tuple[float, LineIntegralResult, Optional[float]]]:
    """Run ``compute`` at each height; rows (T, result, |change from previous T|)."""
    rows = []
    prev = None
    for T in heights:
        res = compute(spec.at_height(T))
        change = None if prev is None else abs(res.value - prev.value)
        rows.append((float(T), res, change))
        prev = res
    return rows


def study_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["T", "value", "tail_estimate"])
    for T, res, _ in rows:
        v = complex(res.value)
        value = repr(v.real) if v.imag == 0 else repr(v)
        w.writerow([repr(T), value, repr(res.truncation_tail_estimate)])
    return buf.getvalue()
