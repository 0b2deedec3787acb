"""Moments of the Poisson distribution about arbitrary points.

Central moments E (X-a)^r, signed moments E (X-a)^r sign(X-b), absolute
central moments E |X-a|^r and weighted expectations E (X-a)^r f(X), each
computed by quadratic-cost recurrences, cross-checked against classical
closed forms, a confluent-hypergeometric series route, and a certified
brute-force oracle.
"""

from .core import (DiscreteFunction, GrowthBoundError, PoissonMean, TailBound,
                   cdf, log_pmf, pmf, pmf_series, sign, truncation_index)
from .hypergeom import (GTable, Hyp1F1Params, g_table, hyp1f1,
                        katti_abs_moment, katti_abs_moment_with_condition)
from .oracle import (OracleResult, VerifyReport, WeightSpec, expectation,
                     verify_against)
from .polynomials import (MomentPolynomial, check_derivative_identity,
                          evaluate_polynomial, moment_polynomials)
from .precision import NATIVE, PrecisionSpec
from .recurrences import (CONDITION_FLAG_THRESHOLD, MomentTable,
                          abs_central_moment, abs_moment_3_closed,
                          abs_moment_5_closed, b_expectation,
                          central_moment_shifted, central_moment_table,
                          mean_deviation, signed_moment_shifted,
                          signed_moment_table)

__version__ = "0.1.0"

__all__ = [
    "CONDITION_FLAG_THRESHOLD",
    "DiscreteFunction",
    "GTable",
    "GrowthBoundError",
    "Hyp1F1Params",
    "MomentPolynomial",
    "MomentTable",
    "NATIVE",
    "OracleResult",
    "PoissonMean",
    "PrecisionSpec",
    "TailBound",
    "VerifyReport",
    "WeightSpec",
    "abs_central_moment",
    "abs_moment_3_closed",
    "abs_moment_5_closed",
    "b_expectation",
    "cdf",
    "central_moment_shifted",
    "central_moment_table",
    "check_derivative_identity",
    "evaluate_polynomial",
    "expectation",
    "g_table",
    "hyp1f1",
    "katti_abs_moment",
    "katti_abs_moment_with_condition",
    "log_pmf",
    "mean_deviation",
    "moment_polynomials",
    "pmf",
    "pmf_series",
    "sign",
    "signed_moment_shifted",
    "signed_moment_table",
    "truncation_index",
    "verify_against",
]
