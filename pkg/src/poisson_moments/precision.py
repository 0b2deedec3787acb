"""Arithmetic backends: IEEE-754 doubles or mpmath extended precision.

Every numerical routine in this package accepts a :class:`PrecisionSpec`
and runs its arithmetic either on native ``float`` values or on mpmath
floats with a configurable mantissa width.  The object doubles as a tiny
facade (``real``/``exp``/``log``/``fsum``/``working``) so the algorithms
are written once and execute under either backend.

Extended mode relies on the (correctly rounded) global mpmath context;
``working()`` pins the precision for the duration of a computation and
restores it afterwards.  Mixing different extended widths across threads
is therefore not supported; everything else is pure and reentrant.
"""

from __future__ import annotations

import math
from contextlib import nullcontext
from dataclasses import dataclass

from mpmath import mp

_NATIVE_BITS = 53


@dataclass(frozen=True)
class PrecisionSpec:
    """Arithmetic mode plus the relative tolerance used by series loops.

    mode: ``"native"`` (binary64) or ``"extended"`` (mpmath).
    bits: mantissa width; fixed at 53 for native, at least 64 for extended.
    rel_tol: relative tolerance in (0, 1) for series termination tests.
    """

    mode: str = "native"
    bits: int = _NATIVE_BITS
    rel_tol: float = 1e-12

    def __post_init__(self) -> None:
        if self.mode not in ("native", "extended"):
            raise ValueError(f"unknown arithmetic mode: {self.mode!r}")
        if self.mode == "extended" and self.bits < 64:
            raise ValueError("extended mode requires at least 64 mantissa bits")
        if self.mode == "native" and self.bits != _NATIVE_BITS:
            raise ValueError("native mode has a fixed 53-bit mantissa")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie strictly between 0 and 1")

    @classmethod
    def native(cls, rel_tol: float = 1e-12) -> "PrecisionSpec":
        return cls("native", _NATIVE_BITS, rel_tol)

    @classmethod
    def extended(cls, bits: int = 256, rel_tol: float = 1e-20) -> "PrecisionSpec":
        return cls("extended", bits, rel_tol)

    @property
    def is_extended(self) -> bool:
        return self.mode == "extended"

    # -- arithmetic facade -------------------------------------------------

    def working(self):
        """Context manager pinning the working precision (no-op for native)."""
        if self.is_extended:
            return mp.workprec(self.bits)
        return nullcontext()

    def real(self, x):
        """Convert ``x`` to this backend's real type."""
        if self.is_extended:
            return mp.mpf(x)
        return float(x)

    def exp(self, x):
        if self.is_extended:
            return mp.exp(x)
        return math.exp(x)

    def log(self, x):
        if self.is_extended:
            return mp.log(x)
        return math.log(x)

    def fsum(self, terms):
        """Accurate sum: ``math.fsum`` for doubles, ``mp.fsum`` for mpmath."""
        if self.is_extended:
            return mp.fsum(terms)
        return math.fsum(terms)


NATIVE = PrecisionSpec.native()
