"""Certified brute-force expectations: the referee for every other method.

``expectation`` evaluates E w(X) for a declared-growth weight by direct
truncated summation in extended precision and returns the value together
with a certified error bound (tail mass past the cutoff plus a rounding
allowance).  It deliberately never imports the recurrence, polynomial, or
hypergeometric modules: ground truth here comes only from the defining
series, so it can adjudicate disagreements between the other routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from mpmath import mp

from .core import DiscreteFunction, as_mean, sign, truncation_index

__all__ = [
    "WeightSpec",
    "OracleResult",
    "VerifyReport",
    "expectation",
    "verify_against",
]

_MIN_BITS = 128     # floor demanded of every oracle evaluation
_START_BITS = 192   # usually enough that no second pass is needed

_FORMS = ("power", "signed_power", "abs_power", "custom")


@dataclass(frozen=True)
class WeightSpec:
    """Weight w(j) for E w(X): a power of (j - a), optionally signed at a
    threshold b or multiplied by a declared-growth function f."""

    form: str
    r: int
    a: float
    b: Optional[float] = None
    f: Optional[DiscreteFunction] = None

    def __post_init__(self) -> None:
        if self.form not in _FORMS:
            raise ValueError(f"unknown weight form {self.form!r}")
        if self.r < 0:
            raise ValueError("power must be nonnegative")
        if self.form == "signed_power" and self.b is None:
            raise ValueError("signed_power needs a threshold b")
        if self.form == "custom" and self.f is None:
            raise ValueError("custom weights need a DiscreteFunction")

    @classmethod
    def power(cls, r: int, a: float) -> "WeightSpec":
        """(j - a)^r, with 0^0 = 1."""
        return cls("power", r, a)

    @classmethod
    def signed_power(cls, r: int, a: float, b: float) -> "WeightSpec":
        """(j - a)^r sign(j - b), sign(0) = -1."""
        return cls("signed_power", r, a, b=b)

    @classmethod
    def abs_power(cls, r: int, a: float) -> "WeightSpec":
        """|j - a|^r."""
        return cls("abs_power", r, a)

    @classmethod
    def custom(cls, f: DiscreteFunction, r: int, a: float) -> "WeightSpec":
        """(j - a)^r f(j)."""
        return cls("custom", r, a, f=f)

    @property
    def growth_degree(self) -> int:
        if self.form == "custom" and self.f.degree is not None:
            return self.r + self.f.degree
        return self.r


class OracleResult(NamedTuple):
    value: object           # mpmath float at the oracle's working precision
    certified_error: float


class VerifyReport(NamedTuple):
    passed: bool
    oracle_value: float
    certified_error: float
    rel_err: float


def _weight_value(w: WeightSpec, j: int):
    # Called under an mpmath working-precision context.
    base = mp.mpf(j) - mp.mpf(w.a)
    if w.form == "power":
        return base ** w.r
    if w.form == "abs_power":
        return abs(base) ** w.r
    if w.form == "signed_power":
        return base ** w.r * sign(j - w.b)
    raw = w.f.func(j)
    w.f.check_growth(j, raw)
    return base ** w.r * mp.mpf(raw)


def _sum_terms(mv: float, w: WeightSpec, cutoff: int, bits: int):
    """(sum, sum of |terms|) over j = 0..cutoff at the given mantissa width."""
    with mp.workprec(bits):
        mm = mp.mpf(mv)
        p = mp.exp(-mm)
        total = mp.mpf(0)
        total_abs = mp.mpf(0)
        for j in range(cutoff + 1):
            t = _weight_value(w, j) * p
            total += t
            total_abs += abs(t)
            p = p * mm / (j + 1)
        return total, total_abs


def _tail_plan(mv: float, w: WeightSpec, eps: float):
    """(cutoff, certified tail mass past it), budgeting 90% of eps."""
    if w.form == "custom" and w.f.degree is None:
        return w.f.support_end, 0.0
    if w.form == "custom":
        # |(j-a)^r f(j)| <= coeff (j + A)^(r + degree) with A = max(1, |a|),
        # since |j - a| <= j + A and 1 + j <= j + A.
        amp = max(1.0, abs(w.a))
        tb = truncation_index(mv, w.growth_degree, -amp, 0.9 * eps / w.f.coeff)
        return tb.cutoff, w.f.coeff * tb.bound
    tb = truncation_index(mv, w.r, w.a, 0.9 * eps)
    return tb.cutoff, tb.bound


def expectation(m, w: WeightSpec, eps: float) -> OracleResult:
    """E w(X) with certified_error <= eps, always in extended precision.

    The certified error is the tail bound past the cutoff plus four times a
    worst-case rounding bound for the summation itself; the mantissa width
    starts at 192 bits and is raised until the rounding share is below a
    tenth of eps, so doubling the cutoff can never move the value by more
    than the reported error.
    """
    mv = as_mean(m)
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    cutoff, tail = _tail_plan(mv, w, eps)
    bits = _START_BITS
    while True:
        value, total_abs = _sum_terms(mv, w, cutoff, bits)
        rounding = (cutoff + 3) * 2.0 ** (1 - bits) * float(total_abs)
        if 4.0 * rounding <= 0.1 * eps:
            break
        deficit = math.log2(40.0 * rounding / eps) if rounding > 0 else 0.0
        bits += max(32, int(math.ceil(deficit)) + 16)
    return OracleResult(value, tail + 4.0 * rounding)


def verify_against(m, w: WeightSpec, candidate, tol: float,
                   eps: Optional[float] = None,
                   oracle_result: Optional[OracleResult] = None) -> VerifyReport:
    """Check |candidate - oracle| <= tol (|oracle| + 1).

    The oracle's certified error must sit strictly below tol (it defaults
    to a million times tighter); pass a precomputed ``oracle_result`` to
    amortize sweeps over many candidates.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if oracle_result is None:
        oracle_result = expectation(m, w, eps if eps is not None else tol * 1e-6)
    if not tol > oracle_result.certified_error:
        raise ValueError("tolerance must exceed the oracle's certified error")
    with mp.workprec(max(_MIN_BITS, 256)):
        scale = abs(mp.mpf(oracle_result.value)) + 1
        diff = abs(mp.mpf(candidate) - oracle_result.value)
        passed = bool(diff <= mp.mpf(tol) * scale)
        rel = float(diff / scale)
    return VerifyReport(passed, float(oracle_result.value),
                        oracle_result.certified_error, rel)
