"""Finite Blaschke products for the half-plane Re(s) > 1/2.

Each zero rho (Re rho > 1/2) contributes the factor

    (s - rho) / (s - (1 - conj rho)) * (1 - conj rho) / rho * |rho / (1 - rho)|,

which has modulus 1 on the critical line, is < 1 inside the half-plane,
and is normalised so that its value at s = 1 is the positive number
|(1 - rho) / rho|.  Zeros here are hypothetical inputs: nothing in this
package searches for, or claims, an off-line zeta zero.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .errors import InputParseError, PoleError, PreconditionError

__all__ = [
    "OffLineZero",
    "ZeroMultiset",
    "LOG_SPACE_THRESHOLD",
    "blaschke_factor",
    "blaschke_product",
    "b_at_one",
    "bsy_sum",
    "parse_inline_zeros",
    "load_multiset",
]

LOG_SPACE_THRESHOLD = 32


@dataclass(frozen=True)
class OffLineZero:
    rho: complex
    multiplicity: int = 1

    def __post_init__(self):
        rho = complex(self.rho)
        if not (math.isfinite(rho.real) and math.isfinite(rho.imag)):
            raise PreconditionError(f"non-finite zero {rho!r}")
        if not rho.real > 0.5:
            raise PreconditionError(f"off-line zero needs Re(rho) > 1/2, got {rho!r}")
        m = self.multiplicity
        if isinstance(m, bool) or int(m) != m or m < 1:
            raise PreconditionError(f"multiplicity must be a positive integer, got {m!r}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "multiplicity", int(m))

    @property
    def pole(self) -> complex:
        return 1 - self.rho.conjugate()


@dataclass(frozen=True)
class ZeroMultiset:
    """Distinct zeros with multiplicities; repeated rhos are merged."""

    zeros: tuple[OffLineZero, ...] = ()

    def __post_init__(self):
        merged: dict[complex, int] = {}
        for z in self.zeros:
            if not isinstance(z, OffLineZero):
                z = OffLineZero(*z) if isinstance(z, tuple) else OffLineZero(z)
            merged[z.rho] = merged.get(z.rho, 0) + z.multiplicity
        object.__setattr__(
            self, "zeros", tuple(OffLineZero(r, m) for r, m in merged.items())
        )

    @classmethod
    def of(cls, *items) -> "ZeroMultiset":
        """``ZeroMultiset.of(0.75, (0.6+1j, 2))``."""
        return cls(tuple(i if isinstance(i, OffLineZero) else
                         OffLineZero(*i) if isinstance(i, tuple) else OffLineZero(i)
                         for i in items))

    def add(self, zero: Union[OffLineZero, complex], multiplicity: int = 1) -> "ZeroMultiset":
        if not isinstance(zero, OffLineZero):
            zero = OffLineZero(zero, multiplicity)
        return ZeroMultiset(self.zeros + (zero,))

    def __len__(self):
        return len(self.zeros)

    def __bool__(self):
        return bool(self.zeros)

    @property
    def total_multiplicity(self) -> int:
        return sum(z.multiplicity for z in self.zeros)

    def is_conjugate_closed(self) -> bool:
        table = {z.rho: z.multiplicity for z in self.zeros}
        return all(table.get(r.conjugate()) == m for r, m in table.items())

    def to_json(self) -> list[dict]:
        return [
            {"re": z.rho.real, "im": z.rho.imag, "multiplicity": z.multiplicity}
            for z in self.zeros
        ]


def _factor(rho: complex, s):
    one_minus_bar = 1 - rho.conjugate()
    if rho == 1:
        # The unit normaliser is 0 * inf here; use its limit along rho -> 1-.
        norm = 1.0
    else:
        norm = one_minus_bar / rho * abs(rho / (1 - rho))
    return (s - rho) / (s - one_minus_bar) * norm


def _check_poles(zeros: Iterable[OffLineZero], s) -> None:
    arr = np.asarray(s)
    for z in zeros:
        if np.any(arr == z.pole):
            raise PoleError(f"s = {z.pole} is the pole 1 - conj(rho) of zero rho = {z.rho}")


def blaschke_factor(zero: OffLineZero, s):
    """One factor, raised to the zero's multiplicity. ``s`` may be an array."""
    _check_poles((zero,), s)
    s = np.asarray(s, dtype=complex) if np.ndim(s) else complex(s)
    value = _factor(zero.rho, s) ** zero.multiplicity
    return value


def blaschke_product(ms: ZeroMultiset, s):
    """B(s) over the multiset; 1 for the empty multiset.

    Multisets with more than LOG_SPACE_THRESHOLD entries are multiplied in
    log space and exponentiated once at the end.
    """
    scalar = np.ndim(s) == 0
    s_arr = np.asarray(s, dtype=complex)
    _check_poles(ms.zeros, s_arr)
    if not ms.zeros:
        out = np.ones(s_arr.shape, dtype=complex)
    elif len(ms.zeros) > LOG_SPACE_THRESHOLD:
        log_sum = np.zeros(s_arr.shape, dtype=complex)
        vanish = np.zeros(s_arr.shape, dtype=bool)
        for z in ms.zeros:
            f = _factor(z.rho, s_arr)
            vanish |= f == 0
            with np.errstate(divide="ignore"):
                log_sum += z.multiplicity * np.log(f)
        out = np.where(vanish, 0, np.exp(np.where(vanish, 0, log_sum)))
    else:
        out = np.ones(s_arr.shape, dtype=complex)
        for z in ms.zeros:
            out = out * _factor(z.rho, s_arr) ** z.multiplicity
    return complex(out) if scalar else out


def b_at_one(ms: ZeroMultiset) -> float:
    """B(1) = prod |(1 - rho)/rho|^m, the norm of the projection of 1."""
    if len(ms.zeros) > LOG_SPACE_THRESHOLD:
        return math.exp(-bsy_sum(ms)) if all(z.rho != 1 for z in ms.zeros) else 0.0
    out = 1.0
    for z in ms.zeros:
        out *= abs((1 - z.rho) / z.rho) ** z.multiplicity
    return out


def bsy_sum(ms: ZeroMultiset) -> float:
    """sum m log|rho / (1 - rho)|, which equals -log B(1) and is >= 0."""
    terms = []
    for z in ms.zeros:
        if z.rho == 1:
            raise PreconditionError("rho = 1 makes log|rho/(1-rho)| infinite")
        terms.append(z.multiplicity * (math.log(abs(z.rho)) - math.log(abs(1 - z.rho))))
    return math.fsum(terms)


_TOKEN = re.compile(r"^\s*([^:]+?)\s*(?::\s*(\S+))?\s*$")


def parse_inline_zeros(text: str) -> ZeroMultiset:
    """Parse tokens like ``"0.75:1, 0.6+2.5i:2 0.6-2.5i"`` (multiplicity defaults to 1)."""
    zeros = []
    for tok in re.split(r"[,\s]+", text.strip()):
        if not tok:
            continue
        m = _TOKEN.match(tok)
        if m is None:
            raise InputParseError(f"bad zero token {tok!r}")
        number, mult = m.group(1), m.group(2)
        try:
            rho = complex(number.replace("i", "j").replace("I", "j"))
            k = int(mult) if mult is not None else 1
        except ValueError:
            raise InputParseError(f"bad zero token {tok!r}; expected re+imi:mult") from None
        zeros.append(OffLineZero(rho, k))
    return ZeroMultiset(tuple(zeros))


def load_multiset(path) -> ZeroMultiset:
    """Read a JSON array of ``{"re", "im", "multiplicity"}`` objects."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputParseError(f"cannot read multiset: {exc}", source=str(path)) from exc
    if not isinstance(data, list):
        raise InputParseError("multiset file must hold a JSON array", source=str(path))
    zeros = []
    for i, item in enumerate(data):
        try:
            rho = complex(float(item["re"]), float(item.get("im", 0.0)))
            mult = item.get("multiplicity", 1)
        except (TypeError, KeyError, ValueError) as exc:
            raise InputParseError(f"entry {i}: {exc!r}", source=str(path)) from None
        zeros.append(OffLineZero(rho, mult))
    return ZeroMultiset(tuple(zeros))
