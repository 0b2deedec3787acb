"""Numerically stable Poisson primitives.

Log-pmf via log-gamma, the cumulative distribution by direct summation,
and certified truncation cutoffs for weighted series of the form
``sum_j |j - center|^degree * pmf(j)``.  These are the foundation both for
the moment recurrences and for the brute-force oracle; everything here is
a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

from mpmath import mp

from .precision import NATIVE, PrecisionSpec

# Below ~1e-290 the double log-space certificate machinery would sit on the
# underflow floor; certified bounds are refused rather than silently wrong.
MIN_CERTIFIABLE_EPS = 1e-290

_BOUND_SAFETY = 1.0 + 1e-9  # absorbs double rounding in the certificate


class GrowthBoundError(ValueError):
    """A DiscreteFunction evaluation exceeded its declared growth envelope."""


@dataclass(frozen=True)
class PoissonMean:
    """Strictly positive, finite mean of the Poisson distribution."""

    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if not math.isfinite(v) or v <= 0.0:
            raise ValueError(f"Poisson mean must be finite and positive, got {self.value!r}")
        object.__setattr__(self, "value", v)


def as_mean(m) -> float:
    """Coerce a number or PoissonMean to a validated float mean."""
    if isinstance(m, PoissonMean):
        return m.value
    return PoissonMean(float(m)).value


@dataclass(frozen=True)
class TailBound:
    """Cutoff ``N`` plus a certified over-estimate of the series mass beyond it."""

    cutoff: int
    bound: float


@dataclass(frozen=True)
class DiscreteFunction:
    """Caller-supplied function on nonnegative integers with declared growth.

    The declaration is either an envelope |f(j)| <= coeff * (1 + j)**degree
    or a finite support (f(j) = 0 for j > support_end).  It is the caller's
    contract that the weighted expectations being computed are finite; a
    black-box function cannot be verified, so evaluations are only checked
    opportunistically and a violation raises :class:`GrowthBoundError`.
    """

    func: Callable[[int], float]
    degree: Optional[int] = None
    coeff: Optional[float] = None
    support_end: Optional[int] = None

    def __post_init__(self) -> None:
        has_growth = self.degree is not None or self.coeff is not None
        if has_growth:
            if self.degree is None or self.coeff is None:
                raise ValueError("growth declaration needs both degree and coeff")
            if self.degree < 0:
                raise ValueError("growth degree must be nonnegative")
            if not self.coeff > 0:
                raise ValueError("growth coeff must be positive")
        elif self.support_end is None:
            raise ValueError(
                "DiscreteFunction requires a growth declaration (degree, coeff) "
                "or a finite support_end"
            )
        if self.support_end is not None and self.support_end < 0:
            raise ValueError("support_end must be nonnegative")

    def check_growth(self, j: int, value) -> None:
        """Opportunistic envelope check at an evaluated point."""
        if self.degree is None:
            return
        if abs(value) > self.coeff * (1.0 + j) ** self.degree * _BOUND_SAFETY:
            raise GrowthBoundError(
                f"|f({j})| = {abs(value)} exceeds the declared envelope "
                f"{self.coeff} * (1 + {j})**{self.degree}"
            )


def sign(y) -> int:
    """-1 for y <= 0, +1 for y > 0.

    The value at zero is deliberate: it makes E sign(X - b) = 1 - 2 P(X <= b),
    which is the base case of the signed-moment recurrence.
    """
    return -1 if y <= 0 else 1


def _as_index(k) -> int:
    ki = int(k)
    if ki != k or ki < 0:
        raise ValueError(f"index must be a nonnegative integer, got {k!r}")
    return ki


@lru_cache(maxsize=None)
def _ln_factorial(k: int, bits: int):
    # Exact integer factorial, then one correctly rounded log at `bits`.
    with mp.workprec(bits):
        return mp.log(mp.mpf(math.factorial(k)))


def log_pmf(k, m, prec: PrecisionSpec = NATIVE):
    """log P(X = k) = -m + k log m - log k! for X ~ Poisson(m).

    Native mode uses ``math.lgamma`` (Lanczos class); extended mode takes the
    log of the exactly accumulated factorial, so the value is certified at
    the working precision.  Stays finite for k up to 1e6 and m up to 1e4.
    """
    ki = _as_index(k)
    mv = as_mean(m)
    if prec.is_extended:
        with prec.working():
            return -mp.mpf(mv) + ki * mp.log(mv) - _ln_factorial(ki, prec.bits)
    return -mv + ki * math.log(mv) - math.lgamma(ki + 1)


def pmf(k, m, prec: PrecisionSpec = NATIVE):
    """P(X = k), evaluated as exp(log_pmf) to avoid factorial overflow."""
    with prec.working():
        return prec.exp(log_pmf(k, m, prec))


def pmf_series(m, n, prec: PrecisionSpec = NATIVE) -> list:
    """[P(X=0), ..., P(X=n)].

    Extended mode uses the term recursion p_{j+1} = p_j m / (j+1) (mpmath
    never underflows); native mode evaluates each term from the log-space
    pmf so large means cannot flush the whole series to zero.
    """
    mv = as_mean(m)
    ni = _as_index(n)
    if prec.is_extended:
        with prec.working():
            p = mp.exp(-mp.mpf(mv))
            out = [p]
            for j in range(ni):
                p = p * mv / (j + 1)
                out.append(p)
            return out
    return [math.exp(log_pmf(j, mv)) for j in range(ni + 1)]


def cdf(b, m, prec: PrecisionSpec = NATIVE):
    """P(X <= b) by direct pmf summation; 0 for b < 0, always within [0, 1].

    The sum always runs in extended precision (at least 128 bits, more if
    the caller works wider) up to floor(b), which is modest at desk scale;
    the result is then rounded into the working arithmetic.  No
    incomplete-gamma machinery, so the value is easy to certify against
    the oracle, and native callers receive a correctly rounded double even
    when the individual log-space terms would carry ~|log pmf| * eps noise.
    """
    mv = as_mean(m)
    n = math.floor(b)
    if n < 0:
        return prec.real(0.0)
    with mp.workprec(max(128, prec.bits)):
        mm = mp.mpf(mv)
        p = mp.exp(-mm)
        total = p
        for j in range(n):
            p = p * mm / (j + 1)
            total += p
        total = total if total <= 1 else mp.mpf(1)
    with prec.working():
        return prec.real(total)


def truncation_index(m, degree, center, eps) -> TailBound:
    """Certified cutoff for ``sum_j |j - center|^degree pmf(j)``.

    For j >= max(2 (m + degree + |center|), center + 1) the ratio of
    successive terms is below one half, so the tail past N is at most twice
    the term at N.  Returns the smallest such N whose (slightly inflated,
    hence still certified) bound ``2 * term(N)`` is <= eps.
    """
    mv = as_mean(m)
    deg = _as_index(degree)
    c = float(center)
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    if eps < MIN_CERTIFIABLE_EPS:
        raise ValueError(f"eps below the certifiable range (< {MIN_CERTIFIABLE_EPS})")

    n = math.ceil(max(2.0 * (mv + deg + abs(c)), c + 1.0, 0.0))
    for _ in range(1_000_000):
        # n >= center + 1 guarantees n - c >= 1, so the log is well defined.
        log_term = log_pmf(n, mv)
        if deg > 0:
            log_term += deg * math.log(n - c)
        # The floor keeps the certificate positive: letting exp underflow
        # would report a vacuous zero bound for sub-1e-304 tails.
        bound = 2.0 * math.exp(max(log_term, -699.0)) * _BOUND_SAFETY
        if bound <= eps:
            return TailBound(n, bound)
        n += 1
    raise RuntimeError("truncation search failed to terminate (internal fault)")
