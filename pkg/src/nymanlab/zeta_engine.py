"""Riemann zeta on and near the critical line, plus zero-ordinate tables.

Evaluation is plain Euler-Maclaurin summation,

    zeta(s) = sum_{n<N} n^-s + N^(1-s)/(s-1) + N^-s/2
              + sum_{k=1..K} B_2k/(2k)! s(s+1)...(s+2k-2) N^(-s-2k+1) + R,

with K = 12 correction terms.  The remainder is bounded with Rademacher's
estimate |R| <= |(s+2K+1)/(sigma+2K+1)| |T_{K+1}|, T_{K+1} being the first
omitted correction term.  This is cheap and rigorous at the heights used
here (|Im s| up to a few thousand).
"""

from __future__ import annotations

import bisect
import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    InputParseError,
    PoleError,
    PreconditionError,
    ProximityToZeroError,
)

__all__ = [
    "ZetaValue",
    "ZeroTable",
    "zeta",
    "zeta_array",
    "log_abs_zeta_on_line",
    "log_abs_zeta_line_array",
    "load_zero_table",
    "bundled_zero_table",
    "zeros_in_range",
    "as_point",
]

N_CORRECTIONS = 12
MIN_TERMS = 20
MAX_TERMS = 1 << 22
EPS = np.finfo(float).eps


def _bernoulli_even(count: int) -> list[Fraction]:
    """B_2, B_4, ..., B_{2 count} by the Akiyama-Tanigawa algorithm."""
    top = 2 * count
    a = [Fraction(0)] * (top + 1)
    out = []
    for m in range(top + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        if m >= 2 and m % 2 == 0:
            out.append(a[0])
    return out


# B_2k/(2k)! for k = 1..K+1; the last one feeds the remainder bound.
_EM_COEFFS = [
    float(b / math.factorial(2 * k))
    for k, b in enumerate(_bernoulli_even(N_CORRECTIONS + 1), start=1)
]


@dataclass(frozen=True)
class ZetaValue:
    value: complex
    abs_error_estimate: float

    def __complex__(self):
        return complex(self.value)


def as_point(s) -> complex:
    """Coerce to ``complex``, rejecting NaN and infinities."""
    try:
        z = complex(s)
    except (TypeError, ValueError) as exc:
        raise PreconditionError(f"not a complex number: {s!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise PreconditionError(f"non-finite point {z!r}")
    return z


def default_terms(t: float) -> int:
    return max(MIN_TERMS, math.ceil(abs(t)) + 10)


def _em_tail(s: complex, n: int) -> tuple[list[complex], float]:
    """Euler-Maclaurin terms beyond the direct sum, and the remainder bound."""
    log_n = math.log(n)
    n_s = cmath.exp(-s * log_n)
    terms = [n * n_s / (s - 1), 0.5 * n_s]
    poch = s  # s(s+1)...(s+2k-2)
    power = n_s / n  # N^(-s-2k+1)
    for k in range(1, N_CORRECTIONS + 1):
        terms.append(_EM_COEFFS[k - 1] * poch * power)
        poch *= (s + 2 * k - 1) * (s + 2 * k)
        power /= n * n
    first_omitted = abs(_EM_COEFFS[N_CORRECTIONS] * poch * power)
    sigma = s.real
    k1 = 2 * N_CORRECTIONS + 1
    bound = first_omitted * abs(s + k1) / (sigma + k1)
    return terms, bound


def _rounding_bound(s: complex, n: int, direct_mag: float, tail: list[complex]) -> float:
    """Accumulated rounding for the scalar path.

    Direct terms: amplitude and reduced-phase cos/sin are each good to a
    few ulps, plus the extended-precision phase error PHASE_EPS |t| log n.
    Tail terms: N^-s carries the full double phase error, and the
    Pochhammer products of the corrections add about one ulp per factor.
    """
    log_n = math.log(n)
    phase = abs(s.imag) * log_n
    direct = (8.0 * EPS + PHASE_EPS * phase) * direct_mag
    leading = EPS * (8.0 + phase) * (abs(tail[0]) + abs(tail[1]))
    corrections = EPS * (8.0 + 4 * N_CORRECTIONS + phase) * sum(abs(t) for t in tail[2:])
    return direct + leading + corrections


# Extended precision for the phases t log n where the platform has it.
_LD = np.longdouble
PHASE_EPS = float(np.finfo(_LD).eps)
_TWO_PI_LD = _LD(2) * _LD(np.pi) if PHASE_EPS >= EPS else (
    _LD(6.283185307179586) + _LD(2.4492935982947064e-16)
)


def _direct_terms(s: complex, n: int) -> np.ndarray:
    """n^-s for n = 1..N-1 with the phase reduced mod 2 pi in extended precision."""
    ks = np.arange(1, n, dtype=_LD)
    logs_ld = np.log(ks)
    phase = np.fmod(_LD(s.imag) * logs_ld, _TWO_PI_LD).astype(float)
    amp = np.exp(-s.real * logs_ld.astype(float))
    return amp * (np.cos(phase) - 1j * np.sin(phase))


def _zeta_scalar(s: complex, n: int) -> tuple[complex, float, float]:
    logs = np.log(np.arange(1, n, dtype=float))
    direct = _direct_terms(s, n)
    tail, trunc = _em_tail(s, n)
    value = complex(
        math.fsum(np.concatenate([direct.real, [t.real for t in tail]])),
        math.fsum(np.concatenate([direct.imag, [t.imag for t in tail]])),
    )
    direct_mag = float(np.exp(-s.real * logs).sum())
    return value, trunc, _rounding_bound(s, n, direct_mag, tail)


def zeta(s, tol: float = 1e-12, max_terms: int = MAX_TERMS) -> ZetaValue:
    """Riemann zeta with an error estimate no larger than ``tol``.

    Starts from N = max(20, ceil|Im s| + 10) terms and doubles N while the
    truncation bound is too large.  Raises ConvergenceError when rounding
    alone already exceeds ``tol`` or N would pass ``max_terms``.
    """
    s = as_point(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if s.real <= -1:
        raise PreconditionError(f"Re(s) must exceed -1, got {s.real}")
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    n = default_terms(s.imag)
    while True:
        value, trunc, rounding = _zeta_scalar(s, n)
        if trunc + rounding <= tol:
            return ZetaValue(value, trunc + rounding)
        if rounding > tol or 2 * n > max_terms:
            raise ConvergenceError(
                f"zeta({s}) cannot reach tol={tol:g}: truncation {trunc:.2e}, "
                f"rounding {rounding:.2e} at N={n}"
            )
        n *= 2


def zeta_array(s, chunk_elements: int = 1 << 21) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised zeta for quadrature: returns ``(values, error_estimates)``.

    Truncation length per point follows the same rule as :func:`zeta`
    (rounded up to a multiple of 16) without the tolerance loop.  Each
    point's result depends on that point alone, never on the rest of the
    batch, so any partition of the work reproduces the same bits.
    """
    s = np.asarray(s, dtype=complex)
    flat = s.ravel()
    if np.any(flat == 1):
        raise PoleError("zeta has a pole at s = 1")
    if not np.all(np.isfinite(flat)):
        raise PreconditionError("non-finite point in zeta_array input")
    if np.any(flat.real <= -1):
        raise PreconditionError("Re(s) must exceed -1")
    values = np.empty(flat.shape, dtype=complex)
    errors = np.empty(flat.shape, dtype=float)
    terms = np.maximum(MIN_TERMS, np.ceil(np.abs(flat.imag)) + 10)
    terms = (16 * np.ceil(terms / 16)).astype(np.int64)
    for n in np.unique(terms):
        idx = np.flatnonzero(terms == n)
        rows = max(1, chunk_elements // int(n))
        for start in range(0, idx.size, rows):
            part = idx[start:start + rows]
            values[part], errors[part] = _zeta_group(flat[part], int(n))
    return values.reshape(s.shape), errors.reshape(s.shape)


_LOG_CACHE: dict[int, np.ndarray] = {}


def _logs(n: int) -> np.ndarray:
    logs = _LOG_CACHE.get(n)
    if logs is None:
        logs = np.log(np.arange(1, n, dtype=float))
        if len(_LOG_CACHE) < 64:
            _LOG_CACHE[n] = logs
    return logs


def _zeta_group(s: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    logs = _logs(n)
    direct = np.exp(-np.outer(s, logs)).sum(axis=1)
    sigmas, inverse = np.unique(s.real, return_inverse=True)
    magnitude = np.exp(-np.outer(sigmas, logs)).sum(axis=1)[inverse]

    log_n = math.log(n)
    n_s = np.exp(-s * log_n)
    tail = n * n_s / (s - 1) + 0.5 * n_s
    tail_mag = np.abs(n * n_s / (s - 1)) + np.abs(0.5 * n_s)
    poch = s.copy()
    power = n_s / n
    for k in range(1, N_CORRECTIONS + 1):
        term = _EM_COEFFS[k - 1] * poch * power
        tail = tail + term
        tail_mag = tail_mag + np.abs(term)
        poch = poch * (s + 2 * k - 1) * (s + 2 * k)
        power = power / (n * n)
    k1 = 2 * N_CORRECTIONS + 1
    trunc = np.abs(_EM_COEFFS[N_CORRECTIONS] * poch * power) * np.abs(s + k1) / (s.real + k1)
    rounding = EPS * (8.0 + np.abs(s.imag) * log_n + np.abs(s)) * (magnitude + tail_mag)
    return direct + tail, trunc + rounding


def log_abs_zeta_on_line(t: float, guard: float = 1e-300) -> float:
    """``log|zeta(1/2 + it)|``.

    Raises ProximityToZeroError when the modulus does not clear both
    ``guard`` and four times its own error estimate; quadrature callers
    should split their panels at the zero instead of sampling it.
    """
    t = float(t)
    if not math.isfinite(t):
        raise PreconditionError(f"non-finite ordinate {t!r}")
    s = complex(0.5, t)
    value, trunc, rounding = _zeta_scalar(s, default_terms(t))
    modulus = abs(value)
    err = trunc + rounding
    if modulus <= max(guard, 4.0 * err):
        raise ProximityToZeroError(t, modulus, err)
    return math.log(modulus)


def log_abs_zeta_line_array(tau) -> np.ndarray:
    """Vectorised ``log|zeta(1/2 + i tau)|`` without the proximity guard."""
    tau = np.asarray(tau, dtype=float)
    values, _ = zeta_array(0.5 + 1j * tau)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(values))


@dataclass(frozen=True)
class ZeroTable:
    """Sorted ordinates of critical-line zeros."""

    ordinates: tuple[float, ...] = ()
    source: str = ""
    max_height: float = field(init=False)

    def __post_init__(self):
        ords = tuple(float(g) for g in self.ordinates)
        for i, g in enumerate(ords):
            if not (math.isfinite(g) and g > 0):
                raise PreconditionError(f"ordinate #{i + 1} = {g!r} is not a positive real")
            if i and g <= ords[i - 1]:
                raise PreconditionError(
                    f"ordinates must strictly increase: {ords[i - 1]!r} then {g!r}"
                )
        object.__setattr__(self, "ordinates", ords)
        object.__setattr__(self, "max_height", ords[-1] if ords else 0.0)

    def __len__(self):
        return len(self.ordinates)


def load_zero_table(path) -> ZeroTable:
    """Read a zero table: one decimal ordinate per line, ``#`` comments."""
    path = Path(path)
    ords: list[float] = []
    with path.open("r", encoding="ascii", errors="strict") as fh:
        try:
            lines = list(fh)
        except UnicodeDecodeError as exc:
            raise InputParseError("file is not ASCII text", source=str(path)) from exc
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            g = float(text)
        except ValueError:
            raise InputParseError(f"not a decimal ordinate: {text!r}", lineno, str(path)) from None
        if not (math.isfinite(g) and g > 0):
            raise InputParseError(f"ordinate must be positive and finite: {text!r}", lineno, str(path))
        if ords and g <= ords[-1]:
            raise InputParseError(
                f"ordering violation: {text} does not exceed previous {ords[-1]!r}",
                lineno,
                str(path),
            )
        ords.append(g)
    return ZeroTable(tuple(ords), source=str(path))


def bundled_zero_table(count: int = 100) -> ZeroTable:
    """The shipped tables: first 100 or first 1000 ordinates."""
    if count not in (100, 1000):
        raise PreconditionError("bundled tables hold 100 or 1000 ordinates")
    ref = resources.files("nymanlab") / "data" / f"zeros_{count}.txt"
    with resources.as_file(ref) as p:
        table = load_zero_table(p)
    return ZeroTable(table.ordinates, source=f"bundled:zeros_{count}")


def zeros_in_range(table: ZeroTable, t_lo: float, t_hi: float) -> list[float]:
    if t_lo > t_hi:
        raise PreconditionError(f"empty range [{t_lo}, {t_hi}]")
    ords: Sequence[float] = table.ordinates
    lo = bisect.bisect_left(ords, t_lo)
    hi = bisect.bisect_right(ords, t_hi)
    return list(ords[lo:hi])
