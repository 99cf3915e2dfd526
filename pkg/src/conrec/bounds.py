"""Closed-form error laws and bounds for consistent reconstruction.

All quantities are for N i.i.d. measurements with noise uniform on
[-delta, delta]; unless noted, directions are uniform on S^{d-1}.  Large
powers and binomials are handled in log space.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from .errors import DomainError
from .quadrature import adaptive_simpson
from .sphere import _cap_measure, cap_measure_any, gamma_ratio_constant

BCL_QUAD_TOL = 1e-12
PBOUND_SLOPE = 2.0 / math.log(12.0 / 11.0)


@dataclass(frozen=True)
class AdmissibilityParams:
    """Constants with Pr(|<x, phi>| <= t) <= alpha t^s for all unit x and t in [0, 1]."""

    alpha: float
    s: float

    def __post_init__(self):
        if not self.alpha >= 1.0:
            raise DomainError(f"alpha must be >= 1, got {self.alpha!r}")
        if not self.s > 0.0:
            raise DomainError(f"s must be positive, got {self.s!r}")


def _log_comb(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


# ---------------------------------------------------------------------------
# coverage of the sphere by N random caps of radius theta


def bcl_hemisphere_term(N, d):
    """2^(1-N) sum_{k<d} C(N-1, k), evaluated exactly in rationals."""
    s = sum(math.comb(N - 1, k) for k in range(d))
    return float(Fraction(s, 2 ** (N - 1)))


def bcl_F(N, d, theta, quad_tol=BCL_QUAD_TOL):
    """F_{N,d-1}(theta) = int_0^{cos theta} (1-t^2)^{((d-1)^2-2)/2} (1 - r_{d-1}(arccos t))^{N-d-2} dt."""
    e1 = ((d - 1) ** 2 - 2) / 2.0
    e2 = N - d - 2

    def f(t):
        one_minus = 1.0 - t * t
        if one_minus <= 0.0:
            return 0.0
        ang = math.acos(t)
        r = 0.5 if ang >= 0.5 * math.pi else _cap_measure(d, ang, 1e-13)
        return math.exp(e1 * math.log(one_minus) + e2 * math.log1p(-r))

    return adaptive_simpson(f, 0.0, math.cos(theta), quad_tol)


def bcl_noncoverage_bound(N, d, theta, quad_tol=BCL_QUAD_TOL):
    """Upper bound on the probability that N uniform open caps of radius theta miss a point of S^{d-1}."""
    if not 0.0 < theta < 0.5 * math.pi:
        raise DomainError(f"theta must lie in (0, pi/2), got {theta!r}")
    if not (d >= 2 and N >= d):
        raise DomainError(f"need N >= d >= 2, got N={N}, d={d}")
    hemi = bcl_hemisphere_term(N, d)
    F = bcl_F(N, d, theta, quad_tol)
    if F <= 0.0:
        return hemi
    log_coef = _log_comb(N, d) + math.log(d) + 0.5 * math.log(d - 1) - (d - 1) * math.log(2.0)
    return hemi + math.exp(log_coef + math.log(F))


def simple_noncoverage_bound(N, d):
    """2 sqrt(d) 13^d (11/12)^(N/2), valid for N >= 2d/ln(12/11) and theta in [arccos(1/sqrt d), pi/2)."""
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if N < PBOUND_SLOPE * d:
        raise DomainError(f"N={N} is below the validity threshold 2d/ln(12/11) = {PBOUND_SLOPE * d:.4f}")
    return math.exp(math.log(2.0) + 0.5 * math.log(d) + d * math.log(13.0)
                    + 0.5 * N * math.log(11.0 / 12.0))


# ---------------------------------------------------------------------------
# radial extent R_N(psi) of the error polytope


def radial_survival(lam, N, d, delta):
    """Pr[R_N > lam] = (1 - lam C_d / (delta (d-1)))^N for 0 <= lam <= 2 delta."""
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if not 0.0 <= lam <= 2.0 * delta:
        raise DomainError(f"lambda must lie in [0, 2 delta], got {lam!r}")
    base = 1.0 - lam * gamma_ratio_constant(d) / (delta * (d - 1))
    return base ** N


@dataclass(frozen=True)
class RadialMSE:
    leading: float
    alpha_low: float
    alpha_high: float

    @property
    def lower(self):
        return self.leading + self.alpha_low

    @property
    def upper(self):
        return self.leading + self.alpha_high

    def __iter__(self):
        return iter((self.leading, self.alpha_low, self.alpha_high))


def theorem_radial_mse(N, d, delta):
    """Exact leading term and error bracket for E|R_N(psi)|^2 (uniform directions, N >= 3).

    ``alpha_low`` and ``alpha_high`` already carry the 2 delta^2 factor, so
    E|R_N|^2 lies in ``[leading + alpha_low, leading + alpha_high]``.
    """
    if N < 3 or d < 2:
        raise DomainError(f"need N >= 3 and d >= 2, got N={N}, d={d}")
    c = gamma_ratio_constant(d)
    k = d - 1
    leading = 2.0 * delta ** 2 * k ** 2 / (c ** 2 * (N + 1) * (N + 2))
    low = -2.0 * delta ** 2 * (2.0 * c / k) * (1.0 - c / k) ** (N + 1)
    high = 2.0 * delta ** 2 * 54.0 * c ** 2 * (1.0 - 2.0 * c / k) ** N
    return RadialMSE(leading, low, high)


def general_radial_lower_bound(N, delta):
    """8 delta^2 / ((N+1)(N+2)), valid for any directions."""
    return 8.0 * delta ** 2 / ((N + 1) * (N + 2))


def mse_lower_limit(d, delta):
    """lim N^2 E|R_N|^2 = 2 delta^2 ((d-1) / (2 C_d))^2, a lower bound for liminf N^2 E|W_N|^2."""
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    return 2.0 * delta ** 2 * ((d - 1) / (2.0 * gamma_ratio_constant(d))) ** 2


def mse_lower_limit_weak(d, delta):
    return math.pi * delta ** 2 * (d - 1)


# ---------------------------------------------------------------------------
# upper bounds on E|W_N|^2


def mse_upper_general(N, d, delta, params):
    """Upper bound on E|W_N|^2 for any admissible direction law (N >= (d+2)/s)."""
    a, s = params.alpha, params.s
    if N < (d + 2) / s:
        raise DomainError(f"N={N} is below the validity threshold (d+2)/s = {(d + 2) / s:.4g}")
    l2a = math.log(2.0 * a)
    first = (1e5 * delta ** 2 * d ** 2 * math.exp(2.0 * l2a / s) * math.log(16.0 * math.exp(l2a / s)) ** 2
             / ((N + 1) * (N + 2)))
    log_second = 2.0 * math.log(delta) + (d + 1) * math.log(32.0) + (d + 1) / s * l2a - N * math.log(2.0)
    return first + math.exp(log_second)


def mse_upper_uniform_terms(N, d, delta):
    if N < d + 2:
        raise DomainError(f"need N >= d + 2, got N={N}, d={d}")
    first = 2.0 * math.exp(12.0) * delta ** 2 * d ** 3 / ((N + 1) * (N + 2))
    log_tail = (math.log(26.0) + 2.0 * math.log(delta) + 1.5 * math.log(d)
                + 0.5 * N * math.log(11.0 / 12.0) + 0.5 * d * math.log(1024.0 * d))
    return first, math.exp(log_tail)


def mse_upper_uniform(N, d, delta):
    """Upper bound on E|W_N|^2 for uniform directions on S^{d-1}, N >= d + 2."""
    first, tail = mse_upper_uniform_terms(N, d, delta)
    return first + tail


def uniform_admissibility(d):
    """Admissibility constants of the uniform law: (2 C_d, 1) for d >= 3, (1, 1) for d = 2."""
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if d == 2:
        return AdmissibilityParams(1.0, 1.0)
    # 2 C_3 = 1 exactly; the max() absorbs the last-bit rounding of C_3.
    return AdmissibilityParams(max(1.0, 2.0 * gamma_ratio_constant(d)), 1.0)


def cap_law_admissibility(d, theta0):
    """Constants for the uniform law on a cap of radius ``theta0``.

    Its density is at most 1/r(theta0) times the uniform density, which
    scales alpha by that factor.
    """
    base = uniform_admissibility(d)
    return AdmissibilityParams(base.alpha / cap_measure_any(d, theta0), base.s)


# ---------------------------------------------------------------------------
# one dimension and linear reconstruction


def one_dim_mse_exact(N, delta):
    """(E|x - A_N|^2, E|w_N|^2) for consistent reconstruction on the line."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    denom = (N + 1) * (N + 2)
    return 8.0 * delta ** 2 / denom, 14.0 * delta ** 2 / denom


def linear_mse_formulas(duals, sigma2, N=None, d=None):
    """(sigma^2 sum ||f_n||^2, d^2 sigma^2 / N) for a dual frame."""
    f = duals.duals if hasattr(duals, "duals") else np.asarray(duals, dtype=float)
    if not sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    N = f.shape[0] if N is None else N
    d = f.shape[1] if d is None else d
    return float(sigma2 * np.sum(f * f)), d * d * sigma2 / N
