"""
The alpha/2-stable subordinator S with E[exp(-lam S_t)] = exp(-t lam^{alpha/2}).

Sampling uses Kanter's representation. The density of S_1 is evaluated from
the convergent series in x^{-alpha n/2} where it is accurate, from its
large-x asymptote beyond a calibrated crossover, and from Kanter's integral
representation for small x where the series loses all precision.
"""

import logging
import math
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy import integrate, optimize, special

from .state import (
    DensityEvalConfig, DensityMethod, DensityValue, DomainError,
    SeriesDivergenceError, StableIndex
)

logger = logging.getLogger(__name__)

DEFAULT_DENSITY_CONFIG = DensityEvalConfig()

# Relative series/tail agreement that defines the crossover
CROSSOVER_AGREEMENT = 1e-6

_X_SEARCH_LO = 1e-8
_X_SEARCH_HI = 1e30

# indices already warned about the small-x fallback
_fallback_warned = set()


def _kanter_exponent(rho: float, u: np.ndarray) -> np.ndarray:
    """log A(u) with A(u) = sin(rho u)^{rho/(1-rho)} sin((1-rho) u) / sin(u)^{1/(1-rho)}."""
    with np.errstate(divide='ignore', invalid='ignore'):
        return (
            rho * np.log(np.sin(rho * u))
            + (1.0 - rho) * np.log(np.sin((1.0 - rho) * u))
            - np.log(np.sin(u))
        ) / (1.0 - rho)


def sample(
    alpha: Union[StableIndex, float],
    t: float,
    rng: np.random.Generator,
    size: Optional[Union[int, Tuple[int, ...]]] = None
) -> Union[float, np.ndarray]:
    """
    Draw S_t by Kanter's method and the scaling S_t = t^{2/alpha} S_1.

    Consumes one uniform block then one exponential block from rng.
    """
    idx = StableIndex.of(alpha)
    if not t > 0:
        raise DomainError("sample requires t > 0")
    rho = idx.subordinator_index
    u = 1.0 - rng.random(size)
    e = rng.standard_exponential(size)
    log_a = _kanter_exponent(rho, math.pi * u)
    log_s = ((1.0 - rho) / rho) * (log_a - np.log(e)) + math.log(t) / rho
    with np.errstate(over='ignore'):
        draws = np.exp(log_s)
    return float(draws) if size is None else draws


def sample_increments(
    alpha: Union[StableIndex, float],
    t: float,
    n: int,
    rng: np.random.Generator
) -> np.ndarray:
    """n independent copies of S_{t/n}; their running sums form the skeleton S_{it/n}."""
    if n < 1:
        raise DomainError("sample_increments requires n >= 1")
    return sample(alpha, t / n, rng, size=n)


def _series_terms(rho: float, x: float, n_terms: int) -> np.ndarray:
    n = np.arange(1, n_terms + 1, dtype=float)
    sines = np.sin(math.pi * rho * n)
    with np.errstate(divide='ignore'):
        log_mag = (
            special.gammaln(rho * n + 1.0) - special.gammaln(n + 1.0)
            + np.log(np.abs(sines)) - (rho * n + 1.0) * math.log(x)
        )
    signs = np.where(n % 2 == 1, 1.0, -1.0) * np.sign(sines)
    return signs * np.exp(log_mag) / math.pi


def _series(rho: float, x: float, n_terms: int) -> Tuple[float, float]:
    """Truncated series and its error estimate (last two terms plus rounding)."""
    terms = _series_terms(rho, x, n_terms)
    tail = np.abs(terms[-2:]).sum()
    rounding = 1e-16 * np.abs(terms).sum()
    return float(terms.sum()), float(tail + rounding)


def tail_constant(alpha: Union[StableIndex, float]) -> float:
    """lim x^{1 + alpha/2} g_1(x) = alpha / (2 Gamma(1 - alpha/2))."""
    rho = StableIndex.of(alpha).subordinator_index
    return rho / special.gamma(1.0 - rho)


@lru_cache(maxsize=None)
def _smallest_usable_x(rho: float, n_terms: int, target_tol: float) -> float:
    def excess(log_x: float) -> float:
        return math.log(_series(rho, math.exp(log_x), n_terms)[1]) - math.log(target_tol)

    lo, hi = math.log(_X_SEARCH_LO), math.log(_X_SEARCH_HI)
    if excess(lo) <= 0:
        return _X_SEARCH_LO
    return math.exp(optimize.brentq(excess, lo, hi, xtol=1e-10))


def smallest_usable_x(alpha: Union[StableIndex, float], cfg: DensityEvalConfig = DEFAULT_DENSITY_CONFIG) -> float:
    """Smallest x at which the truncated series meets cfg.target_tol."""
    idx = StableIndex.of(alpha)
    return _smallest_usable_x(idx.subordinator_index, cfg.series_terms, cfg.target_tol)


@lru_cache(maxsize=None)
def _crossover(rho: float, n_terms: int) -> float:
    a_tail = rho / special.gamma(1.0 - rho)

    def deviation(log_x: float) -> float:
        x = math.exp(log_x)
        tail = a_tail * x ** (-1.0 - rho)
        value, _ = _series(rho, x, n_terms)
        return math.log(abs(value - tail) / tail + 1e-300) - math.log(CROSSOVER_AGREEMENT)

    lo, hi = 0.0, math.log(_X_SEARCH_HI)
    if deviation(hi) > 0:
        logger.warning(f"Series and tail never agree to {CROSSOVER_AGREEMENT} for rho={rho}")
        return _X_SEARCH_HI
    # deviation is not monotone near x ~ 1; step outward from the top
    log_x = hi
    step = 1.0
    while log_x - step > lo and deviation(log_x - step) <= 0:
        log_x -= step
    if log_x - step <= lo:
        return math.exp(lo)
    root = optimize.brentq(deviation, log_x - step, log_x, xtol=1e-8)
    logger.debug(f"Density crossover for rho={rho}: x={math.exp(root):.6g}")
    return math.exp(root)


def crossover(alpha: Union[StableIndex, float], cfg: DensityEvalConfig = DEFAULT_DENSITY_CONFIG) -> float:
    """x above which the tail asymptote replaces the series."""
    if cfg.crossover is not None:
        return cfg.crossover
    idx = StableIndex.of(alpha)
    return _crossover(idx.subordinator_index, cfg.series_terms)


# For small x the integrands concentrate near u = 0
_KANTER_BREAKPOINTS = [math.pi * 10.0 ** -j for j in range(1, 7)]


def _kanter_density(rho: float, x: float) -> float:
    k = rho / (1.0 - rho)
    log_xk = -k * math.log(x)

    def integrand(u: float) -> float:
        log_z = float(_kanter_exponent(rho, np.float64(u))) + log_xk
        if log_z > 700.0:
            return 0.0
        return math.exp(log_z - math.exp(log_z))

    value, _ = integrate.quad(
        integrand, 0.0, math.pi, points=_KANTER_BREAKPOINTS,
        epsabs=1e-14, epsrel=1e-11, limit=400
    )
    return k * value / (math.pi * x)


def _kanter_cdf(rho: float, x: float) -> float:
    k = rho / (1.0 - rho)
    log_xk = -k * math.log(x)

    def integrand(u: float) -> float:
        log_z = float(_kanter_exponent(rho, np.float64(u))) + log_xk
        if log_z > 700.0:
            return 0.0
        return math.exp(-math.exp(log_z))

    value, _ = integrate.quad(
        integrand, 0.0, math.pi, points=_KANTER_BREAKPOINTS,
        epsabs=1e-14, epsrel=1e-11, limit=400
    )
    return value / math.pi


def cdf(alpha: Union[StableIndex, float], x: float) -> float:
    """P(S_1 <= x) from Kanter's integral representation."""
    idx = StableIndex.of(alpha)
    if x <= 0:
        return 0.0
    return min(1.0, _kanter_cdf(idx.subordinator_index, x))


def density_value(
    alpha: Union[StableIndex, float],
    x: float,
    cfg: DensityEvalConfig = DEFAULT_DENSITY_CONFIG
) -> DensityValue:
    """
    Evaluate g_1(x) and report which representation produced it.

    Args:
        alpha: Stable index
        x: Point of evaluation, x > 0
        cfg: Series truncation, crossover and accuracy target

    Returns:
        DensityValue with method and error estimate

    Raises:
        DomainError: If x <= 0
        SeriesDivergenceError: If the series cannot meet target_tol at x and
            the small-x fallback is disabled
    """
    idx = StableIndex.of(alpha)
    if not x > 0:
        raise DomainError(f"density requires x > 0, got {x}")
    rho = idx.subordinator_index

    if x >= crossover(idx, cfg):
        next_term = abs(_series_terms(rho, x, 2)[1])
        value = tail_constant(idx) * x ** (-1.0 - rho)
        return DensityValue(value=value, method=DensityMethod.TAIL, error_estimate=next_term)

    value, err = _series(rho, x, cfg.series_terms)
    if err <= cfg.target_tol:
        return DensityValue(value=max(value, 0.0), method=DensityMethod.SERIES, error_estimate=err)

    limit = smallest_usable_x(idx, cfg)
    if not cfg.small_x_fallback:
        raise SeriesDivergenceError(
            f"Density series with {cfg.series_terms} terms is unusable at x={x}; "
            f"smallest usable x is {limit:.6g}",
            smallest_usable_x=limit
        )
    value = _kanter_density(rho, x)
    if rho not in _fallback_warned:
        _fallback_warned.add(rho)
        logger.warning(f"Density for alpha={idx.alpha} below x={limit:.3g} comes from the Kanter integral")
    return DensityValue(
        value=max(value, 0.0), method=DensityMethod.KANTER_INTEGRAL, error_estimate=1e-11, low_accuracy=True
    )


def density(
    alpha: Union[StableIndex, float],
    x: float,
    cfg: DensityEvalConfig = DEFAULT_DENSITY_CONFIG
) -> float:
    """Density g_1(x) of S_1."""
    return density_value(alpha, x, cfg).value


def density_scaled(
    alpha: Union[StableIndex, float],
    t: float,
    x: float,
    cfg: DensityEvalConfig = DEFAULT_DENSITY_CONFIG
) -> float:
    """g_t(x) = t^{-2/alpha} g_1(x t^{-2/alpha})."""
    idx = StableIndex.of(alpha)
    if not t > 0:
        raise DomainError("density_scaled requires t > 0")
    scale = t ** (-2.0 / idx.alpha)
    return scale * density(idx, x * scale, cfg)
