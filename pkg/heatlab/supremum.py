"""
Laws and samplers of the three suprema over [0, 1]:

    sup W            Brownian motion (closed form)
    sup X            the alpha-stable process X_s = W(S_s)
    sup W over [0, S_1]   Brownian motion up to the subordinator time

X only visits W at subordinator times, so sup X <= sup_{u <= S_1} W_u.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from .paths import (
    block_rng, bridge_max, concat, run_blocks, simulate_skeleton
)
from .specfun import (
    catalan_exponent_closed, erfc_halved, stable_sup_tail_constant
)
from .state import (
    DensityEvalConfig, DomainError, McEstimate, StableIndex, SupSampleConfig,
    TailDomainError, TailMethod
)
from . import subordinator

logger = logging.getLogger(__name__)

# Abscissae stored by a Monte Carlo tail table
TABLE_POINTS = 512


class TailFunction:
    """
    Survival function u -> P(M > u) of a nonnegative random variable M.

    Beyond domain_hi the tail is extended by min(asymptote(u), survival(domain_hi))
    when an asymptote is known; otherwise evaluation there raises TailDomainError.
    """

    def __init__(
        self,
        fn: Callable[[float], float],
        method: TailMethod,
        domain_lo: float = 0.0,
        domain_hi: float = math.inf,
        stderr_fn: Optional[Callable[[float], float]] = None,
        asymptote: Optional[Callable[[float], float]] = None,
        antiderivative: Optional[Callable[[float], float]] = None,
        name: str = ""
    ):
        self._fn = fn
        self.method = method
        self.domain_lo = domain_lo
        self.domain_hi = domain_hi
        self._stderr_fn = stderr_fn
        self.asymptote = asymptote
        self._antiderivative = antiderivative
        self.name = name

    def __repr__(self) -> str:
        return f"TailFunction(name={self.name!r}, method={self.method.value}, domain=[{self.domain_lo}, {self.domain_hi}])"

    def __call__(self, u: float) -> float:
        return self.survival(u)

    def survival(self, u: float) -> float:
        if u < 0:
            raise DomainError(f"Tail evaluated at negative u={u}")
        if u > self.domain_hi:
            if self.asymptote is None:
                raise TailDomainError(
                    f"{self.name or 'tail'} is tabulated up to {self.domain_hi:.6g}; requested u={u:.6g}"
                )
            return min(self.asymptote(u), self._fn(self.domain_hi))
        return self._fn(u)

    def stderr(self, u: float) -> float:
        if self._stderr_fn is None:
            return 0.0
        return self._stderr_fn(min(u, self.domain_hi))

    def integrate(self, lo: float, hi: float) -> float:
        """int_lo^hi survival(u) du, using the tail extension past domain_hi."""
        if hi < lo:
            raise DomainError("integrate requires lo <= hi")
        if hi > self.domain_hi and self.asymptote is None:
            raise TailDomainError(
                f"{self.name or 'tail'} cannot be integrated to {hi:.6g} beyond {self.domain_hi:.6g}"
            )
        if self._antiderivative is not None:
            return self._antiderivative(hi) - self._antiderivative(lo)
        cut = min(hi, self.domain_hi)
        total = _integrate_decreasing(self.survival, lo, cut) if cut > lo else 0.0
        if hi > cut:
            total += _integrate_decreasing(self.survival, max(lo, cut), hi)
        return total


def _integrate_decreasing(fn: Callable[[float], float], lo: float, hi: float) -> float:
    """Quadrature split at 1, in log u above it."""
    total = 0.0
    if lo < 1.0:
        value, _ = integrate.quad(fn, lo, min(hi, 1.0), epsabs=1e-12, epsrel=1e-10, limit=500)
        total += value
    if hi > 1.0:
        s_lo, s_hi = math.log(max(lo, 1.0)), math.log(hi)
        value, _ = integrate.quad(
            lambda s: fn(math.exp(s)) * math.exp(s), s_lo, s_hi,
            epsabs=1e-12, epsrel=1e-10, limit=500
        )
        total += value
    return total


# Brownian motion ------------------------------------------------------------

def bm_sup_tail() -> TailFunction:
    """Closed-form tail erfc(u/2) of sup_{s<=1} W_s."""
    return TailFunction(
        fn=lambda u: erfc_halved(u),
        method=TailMethod.CLOSED_FORM,
        name="bm_sup"
    )


# Cauchy process (alpha = 1) -------------------------------------------------

def cauchy_sup_density(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Darling's density of the Cauchy supremum at time 1,

        f(x) = exp(-I(x)/pi) / (pi sqrt(x) (1 + x^2)^{3/4}),
        I(x) = int_0^{1/x} ln(v)/(1+v^2) dv.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(np.isnan(arr)):
        raise DomainError("cauchy_sup_density requires x > 0")
    exponent = catalan_exponent_closed(arr)
    out = np.exp(-np.asarray(exponent) / math.pi) / (math.pi * np.sqrt(arr) * (1.0 + arr * arr) ** 0.75)
    return float(out) if out.ndim == 0 else out


def _cauchy_sqrt_density(s: float) -> float:
    # x = s^2 removes the x^{-1/2} singularity: f(x) dx = 2 s f(s^2) ds
    if s <= 0:
        return 2.0 / math.pi
    return 2.0 * s * cauchy_sup_density(s * s)


@lru_cache(maxsize=1)
def _cauchy_mass_above_one() -> float:
    value, _ = integrate.quad(cauchy_sup_density, 1.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=500)
    return value


@lru_cache(maxsize=4096)
def _cauchy_survival(u: float) -> float:
    if u >= 1.0:
        value, _ = integrate.quad(cauchy_sup_density, u, np.inf, epsabs=1e-14, epsrel=1e-12, limit=500)
        return value
    head, _ = integrate.quad(_cauchy_sqrt_density, math.sqrt(u), 1.0, epsabs=1e-14, epsrel=1e-12, limit=500)
    return head + _cauchy_mass_above_one()


@lru_cache(maxsize=4096)
def _cauchy_first_moment(upper: float) -> float:
    """int_0^upper x f(x) dx."""
    head, _ = integrate.quad(
        lambda s: 2.0 * s ** 3 * cauchy_sup_density(s * s) if s > 0 else 0.0,
        0.0, math.sqrt(min(upper, 1.0)), epsabs=1e-14, epsrel=1e-12, limit=500
    )
    if upper <= 1.0:
        return head
    rest, _ = integrate.quad(
        lambda s: math.exp(2.0 * s) * cauchy_sup_density(math.exp(s)),
        0.0, math.log(upper), epsabs=1e-13, epsrel=1e-12, limit=500
    )
    return head + rest


def _cauchy_antiderivative(u: float) -> float:
    # int_0^u P(M > v) dv = E[min(M, u)] = int_0^u x f(x) dx + u P(M > u)
    if u <= 0:
        return 0.0
    return _cauchy_first_moment(u) + u * _cauchy_survival(u)


@lru_cache(maxsize=1)
def cauchy_log_remainder() -> float:
    """
    int_1^inf (P(M > u) - 1/(pi u)) du for the Cauchy supremum M.

    Equals int_1^inf (x f(x) - 1/(pi x)) dx + 1/pi - P(M > 1).
    """
    value, _ = integrate.quad(
        lambda s: math.exp(2.0 * s) * cauchy_sup_density(math.exp(s)) - 1.0 / math.pi,
        0.0, np.inf, epsabs=1e-13, epsrel=1e-11, limit=500
    )
    return value + 1.0 / math.pi - _cauchy_survival(1.0)


def cauchy_sup_tail() -> TailFunction:
    """Quadrature tail of the Cauchy supremum at time 1."""
    return TailFunction(
        fn=_cauchy_survival,
        method=TailMethod.QUADRATURE,
        asymptote=lambda u: 1.0 / (math.pi * u),
        antiderivative=_cauchy_antiderivative,
        name="cauchy_sup"
    )


def cauchy_tail_envelope(u: float) -> float:
    """(4/pi^2) ln(u) / u^2, the envelope for |P(M > u) - 1/(pi u)|."""
    return 4.0 * math.log(u) / (math.pi ** 2 * u * u)


def cauchy_tail_threshold(u_grid: Optional[Sequence[float]] = None) -> float:
    """
    Smallest grid point beyond which |P(M > u) - 1/(pi u)| stays within
    the logarithmic envelope at every later grid point.

    Returns inf if the envelope fails at the last grid point.
    """
    grid = np.geomspace(1.05, 1e4, 240) if u_grid is None else np.sort(np.asarray(u_grid, dtype=float))
    tail = cauchy_sup_tail()
    threshold = math.inf
    for u in grid[::-1]:
        if abs(tail(u) - 1.0 / (math.pi * u)) <= cauchy_tail_envelope(u):
            threshold = float(u)
        else:
            break
    logger.debug(f"Cauchy tail envelope holds from u={threshold:.6g}")
    return threshold


# Brownian motion up to the subordinator time --------------------------------

def arctan_tail(u: float) -> float:
    """(2/pi) arctan(1/u): the tail of sup_{s<=S_1} W_s at alpha = 1, proved for u > 1."""
    return 2.0 / math.pi * math.atan(1.0 / u)


@lru_cache(maxsize=4096)
def _skbm_quadrature(alpha: float, u: float, cfg: DensityEvalConfig) -> float:
    if u == 0:
        return 1.0
    idx = StableIndex(alpha=alpha)

    def integrand(v: float) -> float:
        return erfc_halved(u / math.sqrt(v)) * subordinator.density(idx, v, cfg)

    # below u^2/400 the Brownian factor is below erfc(10)
    v_lo = u * u / 400.0
    breaks = [v_lo, u * u, 100.0 * u * u]
    total = 0.0
    for lo, hi in zip(breaks, breaks[1:]):
        value, _ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=400)
        total += value
    value, _ = integrate.quad(integrand, breaks[-1], np.inf, epsabs=1e-13, epsrel=1e-11, limit=400)
    return total + value


def skbm_sup_tail(
    alpha: Union[StableIndex, float],
    fast_path: bool = True,
    cfg: DensityEvalConfig = subordinator.DEFAULT_DENSITY_CONFIG
) -> TailFunction:
    """
    Tail of sup_{u <= S_1} W_u, u -> int_0^inf erfc(u / (2 sqrt(v))) g_1(v) dv.

    At alpha = 1 and u > 1 the arctan law is used unless fast_path is off.
    """
    idx = StableIndex.of(alpha)
    use_arctan = fast_path and idx.is_cauchy
    k = stable_sup_tail_constant(idx)

    def fn(u: float) -> float:
        if use_arctan and u > 1.0:
            return arctan_tail(u)
        return _skbm_quadrature(idx.alpha, float(u), cfg)

    return TailFunction(
        fn=fn,
        method=TailMethod.QUADRATURE,
        asymptote=lambda u: 2.0 * k * u ** (-idx.alpha),
        name=f"skbm_sup(alpha={idx.alpha})"
    )


def arctan_discrepancy_table(u_grid: Optional[Sequence[float]] = None) -> List[Dict[str, float]]:
    """Quadrature tail at alpha = 1 against (2/pi) arctan(1/u) on (0, 1]."""
    grid = [0.1, 0.25, 0.5, 0.75, 1.0] if u_grid is None else list(u_grid)
    tail = skbm_sup_tail(1.0, fast_path=False)
    rows = []
    for u in grid:
        quad = tail(u)
        closed = arctan_tail(u)
        rows.append({"u": float(u), "quadrature": quad, "arctan": closed, "difference": quad - closed})
    return rows


# Monte Carlo ----------------------------------------------------------------

@dataclass
class SupSamples:
    """Suprema over [0, 1] computed on one set of paths."""
    stable: np.ndarray              # max of X over the skeleton
    stable_half: np.ndarray         # same on every other skeleton point
    endpoint: np.ndarray            # X_1
    subordinate: Optional[np.ndarray] = None    # bridge-filled sup of W up to S_1


def _sup_block(task: tuple) -> Dict[str, np.ndarray]:
    alpha, n_steps, with_bridge, seed, block, start, count = task
    rng = block_rng(seed, block)
    skeleton = simulate_skeleton(StableIndex(alpha=alpha), 1.0, n_steps, count, rng)
    w = skeleton.w
    out = {
        "stable": np.maximum(w.max(axis=1), 0.0),
        "stable_half": np.maximum(w[:, 1::2].max(axis=1), 0.0) if n_steps > 1 else np.zeros(count),
        "endpoint": w[:, -1].copy(),
    }
    if with_bridge:
        left = skeleton.previous(np.zeros(count))
        u = 1.0 - rng.random((count, n_steps))
        out["subordinate"] = np.maximum(bridge_max(left, w, skeleton.variance, u).max(axis=1), 0.0)
    return out


def sample_coupled_sups(
    alpha: Union[StableIndex, float],
    cfg: SupSampleConfig,
    with_bridge: bool = True,
    workers: Optional[int] = None
) -> SupSamples:
    """Stable and subordinate suprema driven by the same randomness."""
    idx = StableIndex.of(alpha)
    results = run_blocks(
        _sup_block, (idx.alpha, cfg.n_steps, with_bridge),
        cfg.paths, cfg.n_steps, cfg.seed, workers, cfg.block_cells
    )
    return SupSamples(
        stable=concat(results, "stable"),
        stable_half=concat(results, "stable_half"),
        endpoint=concat(results, "endpoint"),
        subordinate=concat(results, "subordinate") if with_bridge else None,
    )


def sample_stable_sup(
    alpha: Union[StableIndex, float],
    cfg: SupSampleConfig,
    workers: Optional[int] = None
) -> np.ndarray:
    """Skeleton maxima of X over [0, 1]; biased low, the bias shrinking in n_steps."""
    return sample_coupled_sups(alpha, cfg, with_bridge=False, workers=workers).stable


def sample_subordinate_sup(
    alpha: Union[StableIndex, float],
    cfg: SupSampleConfig,
    workers: Optional[int] = None
) -> np.ndarray:
    """
    Draws of sup_{u <= S_1} W_u, exact for any n_steps.

    Raises:
        DomainError: If cfg.bridge_correction is off
    """
    if not cfg.bridge_correction:
        raise DomainError("sample_subordinate_sup needs bridge_correction enabled")
    return sample_coupled_sups(alpha, cfg, with_bridge=True, workers=workers).subordinate


def mean_stable_sup(
    alpha: Union[StableIndex, float],
    cfg: SupSampleConfig,
    workers: Optional[int] = None
) -> McEstimate:
    """
    Monte Carlo estimate of E[sup_{s<=1} X_s] for alpha in (1, 2).

    bias_diag is the half-grid mean minus the full-grid mean (never positive).
    """
    idx = StableIndex.of(alpha)
    if idx.alpha <= 1.0:
        raise DomainError(f"E[sup X] is infinite for alpha={idx.alpha} <= 1")
    samples = sample_coupled_sups(idx, cfg, with_bridge=False, workers=workers)
    n = samples.stable.size
    estimate = float(np.mean(samples.stable))
    stderr = float(np.std(samples.stable, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    bias = float(np.mean(samples.stable_half)) - estimate if cfg.n_steps > 1 else None
    if bias is not None and abs(bias) > stderr:
        logger.warning(f"Skeleton bias {bias:.3g} exceeds stderr {stderr:.3g}; increase n_steps")
    return McEstimate(estimate=estimate, stderr=stderr, bias_diag=bias, paths=n, n_steps=cfg.n_steps)


def empirical_tail(samples: np.ndarray, u: float) -> Tuple[float, float]:
    """Fraction of samples above u and its binomial standard error."""
    n = samples.size
    p = float(np.count_nonzero(samples > u)) / n
    return p, math.sqrt(max(p * (1.0 - p), 0.0) / n)


def mc_tail_table(
    samples: np.ndarray,
    asymptote: Optional[Callable[[float], float]] = None,
    points: int = TABLE_POINTS,
    name: str = "mc_table"
) -> TailFunction:
    """
    Tail table on log-spaced abscissae with linear interpolation in log u.

    Below the first abscissa the survival is interpolated linearly to 1 at u = 0.
    """
    ordered = np.sort(np.asarray(samples, dtype=float))
    n = ordered.size
    if n < 20:
        raise DomainError("mc_tail_table needs at least 20 samples")
    positive = ordered[ordered > 0]
    lo = max(float(np.quantile(positive, 0.001)), 1e-12) if positive.size else 1e-12
    hi = max(float(ordered[n - 10]), lo * 10.0)
    abscissae = np.geomspace(lo, hi, points)
    survival = 1.0 - np.searchsorted(ordered, abscissae, side='right') / n
    stderr = np.sqrt(survival * (1.0 - survival) / n)
    log_u = np.log(abscissae)

    def fn(u: float) -> float:
        if u <= lo:
            return 1.0 + (survival[0] - 1.0) * u / lo
        return float(np.interp(math.log(u), log_u, survival))

    def stderr_fn(u: float) -> float:
        if u <= lo:
            return float(stderr[0])
        return float(np.interp(math.log(u), log_u, stderr))

    return TailFunction(
        fn=fn,
        method=TailMethod.MONTE_CARLO_TABLE,
        domain_lo=0.0,
        domain_hi=hi,
        stderr_fn=stderr_fn,
        asymptote=asymptote,
        name=name
    )


def stable_sup_tail(
    alpha: Union[StableIndex, float],
    cfg: Optional[SupSampleConfig] = None,
    workers: Optional[int] = None
) -> TailFunction:
    """Quadrature tail at alpha = 1, otherwise a Monte Carlo table with its power-law asymptote."""
    idx = StableIndex.of(alpha)
    if idx.is_cauchy:
        return cauchy_sup_tail()
    if cfg is None:
        raise DomainError(f"A Monte Carlo budget is needed for the tail at alpha={idx.alpha}")
    k = stable_sup_tail_constant(idx)
    return mc_tail_table(
        sample_stable_sup(idx, cfg, workers),
        asymptote=lambda u: k * u ** (-idx.alpha),
        name=f"stable_sup(alpha={idx.alpha})"
    )


def _bm_block(task: tuple) -> Dict[str, np.ndarray]:
    v, n_steps, seed, block, start, count = task
    rng = block_rng(seed, block)
    var = 2.0 * v / n_steps
    w = np.cumsum(math.sqrt(var) * rng.standard_normal((count, n_steps)), axis=1)
    left = np.concatenate([np.zeros((count, 1)), w[:, :-1]], axis=1)
    u = 1.0 - rng.random((count, n_steps))
    return {"max": bridge_max(left, w, np.full_like(w, var), u).max(axis=1)}


def bm_sup_tail_direct(
    v: float,
    u: float,
    cfg: SupSampleConfig,
    workers: Optional[int] = None
) -> Tuple[float, float, float]:
    """
    Bridge-filled Brownian maxima over [0, v] against the exact tail.

    Returns:
        (estimate of P(sup_{s<=v} W_s > u), stderr, erfc(u / (2 sqrt(v))))
    """
    if not v > 0 or u < 0:
        raise DomainError("bm_sup_tail_direct requires v > 0 and u >= 0")
    results = run_blocks(
        _bm_block, (float(v), cfg.n_steps), cfg.paths, cfg.n_steps, cfg.seed, workers, cfg.block_cells
    )
    estimate, stderr = empirical_tail(concat(results, "max"), u)
    return estimate, stderr, erfc_halved(u / math.sqrt(v))
