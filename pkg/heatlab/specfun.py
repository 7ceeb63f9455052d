"""
Special functions and closed-form constants.

Brownian motion throughout heatlab has generator Laplacian, so W_t has
variance 2t and P(sup_{s<=1} W_s > u) = erfc(u / 2).
"""

import logging
import math
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import integrate, special

from .state import DomainError, StableIndex

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _index(alpha: Union[StableIndex, float]) -> StableIndex:
    return StableIndex.of(alpha)


def gamma(x: float) -> float:
    """Euler Gamma; poles at the non-positive integers raise DomainError."""
    x = float(x)
    if x <= 0 and x.is_integer():
        raise DomainError(f"Gamma has a pole at {x}")
    return float(special.gamma(x))


def erfc_halved(u: ArrayLike) -> ArrayLike:
    """Survival function P(sup_{s<=1} W_s > u) = erfc(u / 2), u >= 0."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("erfc_halved is defined for u >= 0")
    out = special.erfc(arr / 2.0)
    return float(out) if out.ndim == 0 else out


def levy_constant(alpha: Union[StableIndex, float]) -> float:
    """
    Constant A_{1,alpha} of the one-dimensional Levy measure A / |y|^{1+alpha}.

    Returns 1/pi at alpha = 1.
    """
    a = _index(alpha).alpha
    return (
        a * 2.0 ** (a - 1.0) * special.gamma((1.0 + a) / 2.0)
        / (math.sqrt(math.pi) * special.gamma(1.0 - a / 2.0))
    )


def stable_sup_tail_constant(alpha: Union[StableIndex, float]) -> float:
    """Constant k with P(sup_{s<=1} X_s > u) ~ k u^{-alpha} as u grows."""
    idx = _index(alpha)
    return levy_constant(idx) / idx.alpha


def skbm_second_coeff(alpha: Union[StableIndex, float]) -> float:
    """2 Gamma(1 - 1/alpha) / pi, defined for alpha in (1, 2)."""
    idx = _index(alpha)
    if idx.alpha <= 1.0:
        raise DomainError(f"skbm_second_coeff requires alpha in (1, 2), got {idx.alpha}")
    return 2.0 * gamma(1.0 - 1.0 / idx.alpha) / math.pi


def bm_sup_moment(p: float) -> float:
    """E[|W_1|^p] = E[(sup_{s<=1} W_s)^p] = 2^p Gamma((p+1)/2) / sqrt(pi), p > -1."""
    if p <= -1:
        raise DomainError("bm_sup_moment requires p > -1")
    return 2.0 ** p * gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)


def subordinator_moment(alpha: Union[StableIndex, float], p: float) -> float:
    """E[S_1^p] for the alpha/2-stable subordinator, finite for p < alpha/2."""
    rho = _index(alpha).subordinator_index
    if p >= rho:
        raise DomainError(f"E[S_1^p] is infinite for p >= {rho}")
    return gamma(1.0 - p / rho) / gamma(1.0 - p)


@lru_cache(maxsize=None)
def _erfc_power_integral(alpha: float) -> float:
    value, _ = integrate.quad(
        lambda u: special.erfc(u / 2.0) * u ** (alpha - 1.0), 0.0, np.inf,
        epsabs=1e-14, epsrel=1e-12, limit=200
    )
    closed = bm_sup_moment(alpha) / alpha
    if abs(value - closed) > 1e-8:
        logger.warning(f"erfc moment quadrature {value} disagrees with closed form {closed}")
    return value


def erfc_power_integral(alpha: Union[StableIndex, float]) -> float:
    """Integral over (0, inf) of erfc(u/2) u^{alpha-1} du by quadrature."""
    return _erfc_power_integral(_index(alpha).alpha)


def ksbm_third_coeff(alpha: Union[StableIndex, float], length: float) -> float:
    """
    Magnitude of the t-coefficient for the killed subordinate process,
    alpha in (1, 2):

        alpha J / ((alpha - 1) Gamma(1 - alpha/2) L^{alpha-1}),
        J = int_0^inf erfc(u/2) u^{alpha-1} du.
    """
    idx = _index(alpha)
    if idx.alpha <= 1.0:
        raise DomainError(f"ksbm_third_coeff requires alpha in (1, 2), got {idx.alpha}")
    if length <= 0:
        raise DomainError("Interval length must be positive")
    a = idx.alpha
    j = erfc_power_integral(idx)
    return a * j / ((a - 1.0) * gamma(1.0 - a / 2.0) * length ** (a - 1.0))


def inverse_tangent_integral(z: ArrayLike) -> ArrayLike:
    """Ti_2(z) = int_0^z arctan(v)/v dv = Im Li_2(i z)."""
    arr = np.asarray(z, dtype=float)
    # scipy's spence(w) is Li_2(1 - w)
    out = np.imag(special.spence(1.0 - 1j * arr))
    return float(out) if np.ndim(out) == 0 else out


def catalan_exponent(x: float) -> float:
    """
    I(x) = int_0^{1/x} ln(v) / (1 + v^2) dv for x > 0, by adaptive quadrature.

    The logarithmic singularity at 0 is removed with v = e^{-s}.
    """
    if not x > 0:
        raise DomainError("catalan_exponent requires x > 0")
    upper = 1.0 / x
    split = min(1.0, upper)
    s0 = -math.log(split)

    def near_zero(s: float) -> float:
        e = math.exp(-s)
        return -s * e / (1.0 + e * e)

    total, _ = integrate.quad(near_zero, s0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=200)
    if upper > 1.0:
        rest, _ = integrate.quad(
            lambda v: math.log(v) / (1.0 + v * v), 1.0, upper,
            epsabs=1e-15, epsrel=1e-13, limit=200
        )
        total += rest
    return total


def catalan_exponent_closed(x: ArrayLike) -> ArrayLike:
    """Closed form of catalan_exponent: ln(z) arctan(z) - Ti_2(z) with z = 1/x."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("catalan_exponent requires x > 0")
    z = 1.0 / arr
    out = np.log(z) * np.arctan(z) - inverse_tangent_integral(z)
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=1)
def catalan_constant() -> float:
    """Catalan's constant sum_{n>=0} (-1)^n / (2n+1)^2."""
    n = np.arange(2_000_000, dtype=float)
    terms = (1.0 - 2.0 * (n % 2)) / (2.0 * n + 1.0) ** 2
    partial = math.fsum(terms)
    # averaging the last two partial sums cancels the leading alternating error
    return partial + 0.5 / (2.0 * n.size + 1.0) ** 2
