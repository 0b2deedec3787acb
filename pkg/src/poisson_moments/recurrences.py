"""Moment recurrences for the Poisson distribution.

For X ~ Poisson(m) and an arbitrary center ``a`` this module computes

* central moments        C(r, a) = E (X - a)^r,
* signed moments         D(r, a, b) = E (X - a)^r sign(X - b),
* weighted expectations  B(r, a, f) = E (X - a)^r f(X),
* absolute central moments E |X - a|^r, which equal C(r, a) for even r and
  D(r, a, a) for odd r,

plus the classical closed forms about the mean (the Crow/Ramasubban mean
deviation and its third- and fifth-order analogues).

Two recurrence families are implemented.  The binomial-sum form advances a
whole table in one pass,

    C(r, a) = (m - a) C(r-1, a) + m * sum_{k<=r-2} binom(r-1, k) C(k, a),

with, for the signed table, an extra threshold-correction term
``2 (floor(b)+1-a)^(r-1) e^-m m^(floor(b)+1) / floor(b)!`` accounting for
the one lattice point where sign(X - b) flips.  The center-shift form
trades order for a shifted center,

    C(r, a) = m C(r-1, a-1) - a C(r-1, a),
    D(r, a, b) = m D(r-1, a-1, b-1) - a D(r-1, a, b),

and serves as an independent consistency route.  Everywhere a power with
zero base and zero exponent appears, 0^0 = 1.

Tables are built bottom-up in O(r^2) arithmetic operations.  Each entry
carries a condition estimate (largest intermediate partial sum over the
final magnitude); in native mode a table whose estimate exceeds
:data:`CONDITION_FLAG_THRESHOLD` is transparently recomputed in extended
precision so the returned values remain trustworthy, while the flag is
preserved for reporting.  All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Optional

from mpmath import mp

from .core import (DiscreteFunction, as_mean, cdf, log_pmf, pmf_series, sign,
                   truncation_index)
from .precision import NATIVE, PrecisionSpec

__all__ = [
    "CONDITION_FLAG_THRESHOLD",
    "MomentTable",
    "DiscreteFunction",
    "sign",
    "central_moment_table",
    "central_moment_shifted",
    "signed_moment_table",
    "signed_moment_shifted",
    "abs_central_moment",
    "mean_deviation",
    "abs_moment_3_closed",
    "abs_moment_5_closed",
    "b_expectation",
    "threshold_pmf_factor",
]

# Condition estimates above this signal catastrophic cancellation; native
# builds beyond it are redone in extended precision.
CONDITION_FLAG_THRESHOLD = 1e6

_UPGRADE_PREC = PrecisionSpec.extended(bits=256)


def threshold_pmf_factor(k, m, prec: PrecisionSpec = NATIVE):
    """e^-m m^(k+1) / k!, the lattice-point mass factor of the signed
    recurrences and the closed forms.

    Evaluated in log space at >= 128 bits and rounded into the working
    arithmetic: the factor is an input constant of the recurrences, so it
    is delivered correctly rounded even for native callers (a plain
    double log-pmf route would inject ~|log pmf| * eps relative noise,
    which the center-shift identity then amplifies).
    """
    mv = as_mean(m)
    bits = max(128, prec.bits)
    with mp.workprec(bits):
        v = mp.exp(log_pmf(k, mv, PrecisionSpec.extended(bits)) + mp.log(mv))
    with prec.working():
        return prec.real(v)


@dataclass(frozen=True)
class MomentTable:
    """Moments of order 0..r_max about a fixed center, built in one pass.

    ``values[r]`` is C(r, a) for the central kind and D(r, a, b) for the
    signed kind; ``condition[r]`` is that entry's condition estimate.
    ``upgraded`` records that a native build tripped the cancellation flag
    and the values were recomputed in extended precision.
    """

    kind: str  # "central" | "signed"
    m: float
    a: float
    b: Optional[float]
    values: tuple
    condition: tuple
    prec: PrecisionSpec
    upgraded: bool = False

    @property
    def r_max(self) -> int:
        return len(self.values) - 1

    @property
    def flagged(self) -> bool:
        return max(self.condition) > CONDITION_FLAG_THRESHOLD

    def condition_at(self, r: int) -> float:
        """Condition estimate for entry r, including the entries it rests on."""
        return max(self.condition[: r + 1])


def _condition(max_partial, final) -> float:
    fp = float(abs(final))
    mp_ = float(max_partial)
    if fp == 0.0:
        return math.inf if mp_ > 0.0 else 1.0
    return max(1.0, mp_ / fp)


def _build(kind: str, mv: float, a: float, b: Optional[float], r_max: int,
           prec: PrecisionSpec):
    """One bottom-up table pass; returns (values, conditions)."""
    with prec.working():
        one = prec.real(1.0)
        mm = prec.real(mv)
        aa = prec.real(a)
        if kind == "central":
            v0 = one
            corr_base = pb = None
        else:
            v0 = one - 2 * cdf(b, mv, prec)
            fb = math.floor(b)
            pb = threshold_pmf_factor(fb, mv, prec)
            corr_base = prec.real(fb + 1) - aa
        values = [v0]
        conds = [1.0]
        for r in range(1, r_max + 1):
            terms = [(mm - aa) * values[r - 1]]
            for k in range(r - 1):
                terms.append(mm * (comb(r - 1, k) * values[k]))
            if kind == "signed":
                terms.append(2 * corr_base ** (r - 1) * pb)  # 0^0 = 1
            # the entry itself is exactly summed; the condition estimate
            # re-walks the terms in order to expose cancellation
            acc = prec.fsum(terms)
            partial = 0.0
            max_partial = 0.0
            for t in terms:
                partial += float(t)
                if abs(partial) > max_partial:
                    max_partial = abs(partial)
            values.append(acc)
            conds.append(_condition(max_partial, acc))
        return values, conds


def _finish(kind: str, mv: float, a: float, b: Optional[float], r_max: int,
            prec: PrecisionSpec) -> MomentTable:
    # sign(X - b) is identically +1 on the support when b < 0, so the signed
    # table degenerates to the central one; this also makes the center-shift
    # identity's b-1 sub-call total.
    build_kind = "central" if (kind == "central" or b < 0) else "signed"
    values, conds = _build(build_kind, mv, a, b, r_max, prec)
    upgraded = False
    if not prec.is_extended and max(conds) > CONDITION_FLAG_THRESHOLD:
        ext_values, _ = _build(build_kind, mv, a, b, r_max, _UPGRADE_PREC)
        values = [float(v) for v in ext_values]
        upgraded = True
    return MomentTable(kind, mv, float(a), b, tuple(values), tuple(conds),
                       prec, upgraded)


def central_moment_table(m, a, r_max, prec: PrecisionSpec = NATIVE) -> MomentTable:
    """Table of E (X - a)^r for r = 0..r_max via the binomial-sum recurrence."""
    mv = as_mean(m)
    if r_max < 0:
        raise ValueError("r_max must be nonnegative")
    return _finish("central", mv, float(a), None, int(r_max), prec)


def signed_moment_table(m, a, b, r_max, prec: PrecisionSpec = NATIVE) -> MomentTable:
    """Table of E (X - a)^r sign(X - b) for r = 0..r_max.

    Base entry is 1 - 2 P(X <= b); each step adds the threshold-correction
    term with its pmf factor computed in log space.  For b < 0 the sign is
    +1 everywhere and the central values are returned.
    """
    mv = as_mean(m)
    if r_max < 0:
        raise ValueError("r_max must be nonnegative")
    return _finish("signed", mv, float(a), float(b), int(r_max), prec)


def central_moment_shifted(m, a, r, prec: PrecisionSpec = NATIVE):
    """E (X - a)^r via the center-shift identity m C(r-1, a-1) - a C(r-1, a).

    An independent route to the same value as ``central_moment_table``,
    built from two lower-order tables.
    """
    mv = as_mean(m)
    if r < 1:
        raise ValueError("the center-shift identity needs r >= 1")
    t1 = central_moment_table(mv, a - 1, r - 1, prec).values[r - 1]
    t2 = central_moment_table(mv, a, r - 1, prec).values[r - 1]
    with prec.working():
        return prec.real(mv) * t1 - prec.real(a) * t2


def signed_moment_shifted(m, a, b, r, prec: PrecisionSpec = NATIVE):
    """E (X - a)^r sign(X - b) via m D(r-1, a-1, b-1) - a D(r-1, a, b).

    Stated for b >= 0 (b < 0 is rejected); the shifted sub-call at b - 1
    resolves through the b < 0 degeneration of ``signed_moment_table``.
    """
    mv = as_mean(m)
    if r < 1:
        raise ValueError("the center-shift identity needs r >= 1")
    if b < 0:
        raise ValueError("the signed center-shift identity requires b >= 0")
    t1 = signed_moment_table(mv, a - 1, b - 1, r - 1, prec).values[r - 1]
    t2 = signed_moment_table(mv, a, b, r - 1, prec).values[r - 1]
    with prec.working():
        return prec.real(mv) * t1 - prec.real(a) * t2


def abs_central_moment(m, a, r, prec: PrecisionSpec = NATIVE):
    """E |X - a|^r: the central table for even r, the signed table at b = a
    for odd r.  Clamped at zero (tiny negative artifacts only)."""
    mv = as_mean(m)
    if r < 0:
        raise ValueError("order must be nonnegative")
    if r % 2 == 0:
        value = central_moment_table(mv, a, r, prec).values[r]
    else:
        value = signed_moment_table(mv, a, a, r, prec).values[r]
    zero = prec.real(0.0)
    return value if value > zero else zero


def mean_deviation(m, prec: PrecisionSpec = NATIVE):
    """E |X - m| in closed form: 2 e^-m m^(floor(m)+1) / floor(m)!."""
    mv = as_mean(m)
    pb = threshold_pmf_factor(math.floor(mv), mv, prec)
    with prec.working():
        return 2 * pb


def abs_moment_3_closed(m, prec: PrecisionSpec = NATIVE):
    """E |X - m|^3 in closed form (cdf plus one log-space pmf factor)."""
    mv = as_mean(m)
    fl = math.floor(mv)
    pb = threshold_pmf_factor(fl, mv, prec)
    with prec.working():
        mm = prec.real(mv)
        f = cdf(mv, mv, prec)
        u = mm - fl
        return mm * (1 - 2 * f) + 2 * (u * u + 2 * fl + 1) * pb


def abs_moment_5_closed(m, prec: PrecisionSpec = NATIVE):
    """E |X - m|^5 in closed form (cdf plus one log-space pmf factor)."""
    mv = as_mean(m)
    fl = math.floor(mv)
    pb = threshold_pmf_factor(fl, mv, prec)
    with prec.working():
        mm = prec.real(mv)
        f = cdf(mv, mv, prec)
        u = mm - fl
        return (10 * mm ** 2 + mm) * (1 - 2 * f) + 2 * (
            (fl + 1 - mm) ** 4 + 2 * mm * (2 * u * u + 7 * fl + 7 - 3 * mm)
        ) * pb


def b_expectation(m, a, r, f: DiscreteFunction, prec: PrecisionSpec = NATIVE):
    """E (X - a)^r f(X) by the weighted recurrence over forward differences.

    The recurrence lowers the order while raising the difference depth,

        B(r, a, f) = (m - a) B(r-1, a, f)
                     + m sum_{k<=r-2} binom(r-1, k) B(k, a, f)
                     + m sum_{k<=r-1} binom(r-1, k) B(k, a, Df),

    with Df(j) = f(j+1) - f(j), down to the base cases B(0, a, D^j f)
    = E (D^j f)(X), each evaluated by certified truncated summation using
    the declared envelope |D^j f| <= 2^j coeff (1 + j + x)^degree (or the
    finite support).  Intermediate results are memoized over (depth, order).

    The caller's growth declaration is what guarantees all the expectations
    are finite; it is checked opportunistically and a violation raises
    :class:`~poisson_moments.core.GrowthBoundError`.
    """
    mv = as_mean(m)
    if r < 0:
        raise ValueError("order must be nonnegative")
    if not isinstance(f, DiscreteFunction):
        raise ValueError("f must be a DiscreteFunction with declared growth")
    r = int(r)
    # Base-sum tails far below the working precision's own resolution needs;
    # capped by rel_tol so a looser caller tolerance still wins.
    tail_eps = min(prec.rel_tol, 2.0 ** (-(prec.bits // 2)))

    with prec.working():
        mm = prec.real(mv)
        aa = prec.real(a)
        fmemo: dict = {}

        def fval(x: int):
            v = fmemo.get(x)
            if v is None:
                raw = f.func(x)
                f.check_growth(x, raw)
                v = prec.real(raw)
                fmemo[x] = v
            return v

        def delta(depth: int, x: int):
            if depth == 0:
                return fval(x)
            return prec.fsum(
                comb(depth, i) * (-1 if (depth - i) % 2 else 1) * fval(x + i)
                for i in range(depth + 1)
            )

        if f.support_end is not None:
            # D^depth f vanishes beyond the support of f itself.
            cutoffs = [f.support_end] * (r + 1)
        else:
            cutoffs = [
                truncation_index(mv, f.degree, -(1.0 + depth),
                                 tail_eps / ((2.0 ** depth) * f.coeff)).cutoff
                for depth in range(r + 1)
            ]
        pmfs = pmf_series(mv, max(cutoffs), prec)

        def base(depth: int):
            # E (D^depth f)(X) with a certified tail.
            return prec.fsum(
                delta(depth, x) * pmfs[x] for x in range(cutoffs[depth] + 1)
            )

        table: dict = {}
        for depth in range(r, -1, -1):
            table[depth, 0] = base(depth)
            for k in range(1, r - depth + 1):
                acc = (mm - aa) * table[depth, k - 1]
                for i in range(k - 1):
                    acc = acc + mm * comb(k - 1, i) * table[depth, i]
                for i in range(k):
                    acc = acc + mm * comb(k - 1, i) * table[depth + 1, i]
                table[depth, k] = acc
        return table[0, r]
