"""Least-squares distance from the constant 1 to spans of rho kernels.

For a finite family rho_{a_1}, ..., rho_{a_N} the squared distance is

    d^2 = ||1||^2 - v^T G^+ v,   G_jk = <rho_j, rho_k>,  v_j = <1, rho_j>,

with ||1||^2 = 1.  G is typically very ill conditioned, so the
pseudo-inverse comes from a symmetric eigendecomposition with a relative
cutoff instead of a regularising jitter.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import PreconditionError
from .step_kernels import KernelSpec, kernel_inner_product

__all__ = [
    "GramSystem",
    "ProjectionResult",
    "DEFAULT_CUTOFF",
    "RELATIVE_EIG_CUTOFF",
    "reciprocal_family",
    "build_gram",
    "distance_to_one",
    "distance_sequence",
    "residual_norm_squared",
    "sequence_to_csv",
]

DEFAULT_CUTOFF = 1e-8
RELATIVE_EIG_CUTOFF = 1e-12


@dataclass(frozen=True)
class GramSystem:
    alphas: tuple[KernelSpec, ...]
    matrix: np.ndarray
    rhs: np.ndarray
    entry_error_bound: float
    cutoff: float

    def __len__(self):
        return len(self.alphas)

    def leading(self, n: int) -> "GramSystem":
        """The system of the first ``n`` kernels (a nested finite section)."""
        if not 0 <= n <= len(self):
            raise PreconditionError(f"section size {n} out of range")
        return GramSystem(
            self.alphas[:n],
            self.matrix[:n, :n].copy(),
            self.rhs[:n].copy(),
            self.entry_error_bound,
            self.cutoff,
        )

    def min_eigenvalue(self) -> float:
        if not len(self):
            return 0.0
        return float(np.linalg.eigvalsh(self.matrix)[0])


@dataclass(frozen=True)
class ProjectionResult:
    coefficients: np.ndarray
    distance: float
    projection_norm: float
    effective_rank: int
    svd_cutoff_used: float

    def to_json(self, system: GramSystem) -> dict:
        return {
            "alphas": [_alpha_text(a) for a in system.alphas],
            "distance": self.distance,
            "projection_norm": self.projection_norm,
            "coefficients": [float(c) for c in self.coefficients],
            "effective_rank": self.effective_rank,
            "cutoff": system.cutoff,
            "entry_error_bound": system.entry_error_bound,
        }


def _alpha_text(spec: KernelSpec):
    a = spec.alpha
    if isinstance(a, Fraction):
        return f"{a.numerator}/{a.denominator}"
    return a


def reciprocal_family(n: int) -> list[KernelSpec]:
    """alpha = 1/k for k = 2..n+1 (alpha = 1 would give rho identically 0)."""
    if n < 0:
        raise PreconditionError("family size must be nonnegative")
    return [KernelSpec(Fraction(1, k)) for k in range(2, n + 2)]


def build_gram(
    alphas: Iterable[KernelSpec], cutoff: float = DEFAULT_CUTOFF, threads: int = 1
) -> GramSystem:
    """Gram matrix and right-hand side for the given kernels.

    Each upper-triangle entry is computed once and mirrored, so the matrix
    is exactly symmetric.  Entries are independent and may be computed on
    ``threads`` workers; results are written by position.
    """
    alphas = tuple(a if isinstance(a, KernelSpec) else KernelSpec(a) for a in alphas)
    if len(set(a.alpha for a in alphas)) != len(alphas):
        raise PreconditionError("duplicate alpha in family")
    if not 0 < cutoff < 1:
        raise PreconditionError("cutoff must lie in (0, 1)")
    n = len(alphas)
    pairs = [(j, k) for j in range(n) for k in range(j, n)]
    jobs = [(alphas[j], alphas[k]) for j, k in pairs] + [(None, a) for a in alphas]

    def work(job):
        return kernel_inner_product(job[0], job[1], cutoff).value

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(work, jobs))
    else:
        values = [work(job) for job in jobs]

    g = np.zeros((n, n))
    for (j, k), val in zip(pairs, values):
        g[j, k] = g[k, j] = val
    v = np.array(values[len(pairs):], dtype=float)
    return GramSystem(alphas, g, v, float(cutoff), float(cutoff))


def distance_to_one(
    system: GramSystem, relative_cutoff: float = RELATIVE_EIG_CUTOFF
) -> ProjectionResult:
    """Project 1 onto the span: d^2 = 1 - v^T G^+ v via truncated eigh."""
    n = len(system)
    if n == 0:
        return ProjectionResult(np.zeros(0), 1.0, 0.0, 0, 0.0)
    evals, evecs = np.linalg.eigh(system.matrix)
    top = float(evals[-1])
    threshold = relative_cutoff * top if top > 0 else 0.0
    keep = evals > threshold
    if not np.any(keep):
        return ProjectionResult(np.zeros(n), 1.0, 0.0, 0, threshold)
    lam, vecs = evals[keep], evecs[:, keep]
    proj = vecs.T @ system.rhs
    coefficients = vecs @ (proj / lam)
    captured = float(math.fsum(proj * proj / lam))
    captured = min(max(captured, 0.0), 1.0)
    return ProjectionResult(
        coefficients=coefficients,
        distance=math.sqrt(1.0 - captured),
        projection_norm=math.sqrt(captured),
        effective_rank=int(keep.sum()),
        svd_cutoff_used=threshold,
    )


def distance_sequence(
    n_max: int,
    family_rule: str = "reciprocal",
    cutoff: float = DEFAULT_CUTOFF,
    threads: int = 1,
) -> list[tuple[int, float, float]]:
    """(N, d_N, ||P_N 1||) for N = 1..n_max over nested families."""
    if n_max < 1:
        raise PreconditionError("n_max must be at least 1")
    if family_rule != "reciprocal":
        raise PreconditionError(f"unknown family rule {family_rule!r}")
    full = build_gram(reciprocal_family(n_max), cutoff, threads)
    rows = []
    for n in range(1, n_max + 1):
        res = distance_to_one(full.leading(n))
        rows.append((n, res.distance, res.projection_norm))
    return rows


def residual_norm_squared(system: GramSystem, coefficients: Sequence[float]) -> float:
    """||1 - sum c_j rho_j||^2 from the Gram data (||1||^2 taken as 1)."""
    c = np.asarray(coefficients, dtype=float)
    return 1.0 - 2.0 * float(c @ system.rhs) + float(c @ system.matrix @ c)


def sequence_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "d_N", "projection_norm_N"])
    for n, d, p in rows:
        w.writerow([n, repr(d), repr(p)])
    return buf.getvalue()
