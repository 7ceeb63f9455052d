"""
Spectral heat content of the interval D = (a, b) for the two orders of
killing and subordination:

    Q(t)   = int_D P_x(X stays in D up to time t) dx            killed subordinate
    Q~(t)  = int_D P_x(W stays in D up to Brownian time S_t) dx  subordinate killed

Q~ has an exact eigenvalue series; Q is reached through the one-dimensional
reduction identity or by Monte Carlo on paths shared with Q~.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special, stats

import config
from .paths import (
    block_rng, bridge_above_probability, bridge_below_probability,
    bridge_stay_probability, run_blocks, simulate_skeleton
)
from .state import (
    DomainError, HeatCurve, HeatPoint, Interval, McConfig, McEstimate,
    ProcessKind, Provenance, StableIndex, TGrid
)
from .supremum import TailFunction, empirical_tail, sample_subordinate_sup, stable_sup_tail

logger = logging.getLogger(__name__)

# exp(-40) is below double precision relative to the leading terms
_SATURATION_EXPONENT = 40.0
_MAX_ODD_TERMS = 2 ** 23
_CHUNK = 2 ** 20

# Reference time and default budget for the crossing-term constant
CROSSING_T_REF = 2e-2
_DEFAULT_CROSSING_CONFIG = McConfig(paths=20000, n_steps=64, seed=config.DEFAULT_SEED)


def _series_alpha(alpha: Union[StableIndex, float]) -> float:
    # the eigenvalue series also accepts alpha = 2, the Brownian case
    value = alpha.alpha if isinstance(alpha, StableIndex) else float(alpha)
    if not 0.0 < value <= 2.0:
        raise DomainError(f"Series exponent must lie in (0, 2], got {value}")
    return value


def _odd_sum(fn, count: int) -> float:
    """Sum of fn(n) over odd n = 1, 3, ..., 2 count - 1, in chunks."""
    partial = []
    for start in range(0, count, _CHUNK):
        k = np.arange(start, min(count, start + _CHUNK), dtype=float)
        partial.append(float(np.sum(fn(2.0 * k + 1.0))))
    return math.fsum(partial)


def sk_defect_series(alpha: Union[StableIndex, float], D: Interval, t: float) -> float:
    """
    |D| - Q~(t) = sum over odd n of 8|D|/(n pi)^2 (1 - exp(-t (n pi/|D|)^alpha)),
    summed with expm1 so no cancellation against |D| occurs.
    """
    a = _series_alpha(alpha)
    if not t > 0:
        raise DomainError("sk_defect_series requires t > 0")
    length = D.length
    c = t * (math.pi / length) ** a
    weight = 8.0 * length / math.pi ** 2

    n_cut = (_SATURATION_EXPONENT / c) ** (1.0 / a)
    count = int(min(_MAX_ODD_TERMS, math.ceil((n_cut + 1.0) / 2.0)))
    count = max(count, 1)
    head = _odd_sum(lambda n: -np.expm1(-c * n ** a) / (n * n), count)

    first_skipped = 2.0 * count + 1.0
    if c * first_skipped ** a >= _SATURATION_EXPONENT:
        # every skipped factor is 1: sum_{k >= count} 1/(2k+1)^2 = psi'(count + 1/2) / 4
        tail = float(special.polygamma(1, count + 0.5)) / 4.0
    else:
        # midpoint rule over [2 count, inf), one odd integer per width-2 cell
        tail, _ = integrate.quad(
            lambda s: -math.expm1(-c * math.exp(a * s)) * math.exp(-s),
            math.log(2.0 * count), np.inf, epsabs=1e-16, epsrel=1e-12, limit=200
        )
        tail *= 0.5
        logger.debug(f"Eigenvalue series capped at {count} odd terms; remainder by quadrature")
    return weight * (head + tail)


def sk_truncation_bound(D: Interval, n_terms: int) -> float:
    """Upper bound 8|D| / (pi^2 n_terms) on the terms dropped beyond n_terms."""
    return 8.0 * D.length / (math.pi ** 2 * n_terms)


def sk_series(
    alpha: Union[StableIndex, float],
    D: Interval,
    t: float,
    n_terms: Optional[int] = None
) -> float:
    """
    Q~(t) = sum over odd n <= n_terms of 8|D|/(n pi)^2 exp(-t (n pi/|D|)^alpha).

    Without n_terms the series is summed to double precision through
    sk_defect_series.
    """
    if n_terms is None:
        return D.length - sk_defect_series(alpha, D, t)
    a = _series_alpha(alpha)
    if n_terms < 1:
        raise DomainError("n_terms must be at least 1")
    if not t > 0:
        raise DomainError("sk_series requires t > 0")
    c = t * (math.pi / D.length) ** a
    count = (n_terms + 1) // 2
    total = _odd_sum(lambda n: np.exp(-c * n ** a) / (n * n), count)
    logger.debug(f"sk_series truncation bound {sk_truncation_bound(D, n_terms):.3g} at n_terms={n_terms}")
    return 8.0 * D.length / math.pi ** 2 * total


# Coupled Monte Carlo --------------------------------------------------------

_MC_KEYS = ("ks", "ks_half", "sk", "ks_cross", "sk_cross")


@dataclass
class CoupledEstimate:
    """Killed-subordinate and subordinate-killed estimates on the same paths."""
    ks: McEstimate
    sk: McEstimate
    ks_cross: McEstimate
    sk_cross: McEstimate
    dominance_violations: int
    strictness: float
    paths: int
    n_steps: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ks": self.ks.to_dict(),
            "sk": self.sk.to_dict(),
            "ks_cross": self.ks_cross.to_dict(),
            "sk_cross": self.sk_cross.to_dict(),
            "dominance_violations": self.dominance_violations,
            "strictness": self.strictness,
            "paths": self.paths,
            "n_steps": self.n_steps,
        }


def _survival_events(skeleton, start: np.ndarray, length: float, n_steps: int) -> Dict[str, np.ndarray]:
    pos = start[:, None] + skeleton.w
    inside = (pos > 0.0) & (pos < length)
    ks = inside.all(axis=1)
    ks_half = inside[:, 1::2].all(axis=1) if n_steps > 1 else np.ones_like(ks)
    ks_cross = (pos.max(axis=1) >= length) & (pos.min(axis=1) <= 0.0)

    left = skeleton.previous(start)
    variance = skeleton.variance
    stay = np.prod(bridge_stay_probability(left, pos, variance, length), axis=1)
    below = np.prod(bridge_below_probability(left, pos, variance, length), axis=1)
    above = np.prod(bridge_above_probability(left, pos, variance, 0.0), axis=1)
    sk_cross = np.clip(1.0 - below - above + stay, 0.0, 1.0)
    return {
        "ks": ks.astype(float),
        "ks_half": ks_half.astype(float),
        "sk": stay,
        "ks_cross": ks_cross.astype(float),
        "sk_cross": sk_cross,
    }


def _heat_block(task: tuple) -> Dict[str, Any]:
    alpha, t, n_steps, length, x_strata, seed, block, start, count = task
    rng = block_rng(seed, block)
    stratum = (start + np.arange(count)) % x_strata
    x0 = length * (stratum + rng.random(count)) / x_strata
    skeleton = simulate_skeleton(StableIndex(alpha=alpha), t, n_steps, count, rng)

    direct = _survival_events(skeleton, x0, length, n_steps)
    mirrored = _survival_events(skeleton, length - x0, length, n_steps)

    # strata k and x_strata - 1 - k coincide after the antithetic average
    pair = np.minimum(stratum, x_strata - 1 - stratum)
    n_pairs = (x_strata + 1) // 2
    out: Dict[str, Any] = {"count": np.bincount(pair, minlength=n_pairs)}
    for key in _MC_KEYS:
        per_path = 0.5 * (direct[key] + mirrored[key])
        out[key] = (
            np.bincount(pair, weights=per_path, minlength=n_pairs),
            np.bincount(pair, weights=per_path * per_path, minlength=n_pairs),
        )
    violations = 0
    strict = 0.0
    for events in (direct, mirrored):
        violations += int(np.count_nonzero(events["sk"] > events["ks"] + 1e-12))
        strict += float(np.sum(events["ks"] - events["sk"]))
    out["violations"] = violations
    out["strict"] = strict
    return out


def _pair_weights(x_strata: int) -> np.ndarray:
    """Share of D covered by each mirrored stratum pair; an odd middle stratum pairs with itself."""
    weights = np.full((x_strata + 1) // 2, 2.0 / x_strata)
    if x_strata % 2:
        weights[-1] = 1.0 / x_strata
    return weights


def _reduce(results: Sequence[Dict[str, Any]], key: str, length: float, x_strata: int) -> Tuple[float, float]:
    """Stratified mean and standard error over the mirrored stratum pairs."""
    counts = np.sum([r["count"] for r in results], axis=0).astype(float)
    # fsum is exactly rounded, so the block order cannot change the result
    sums = np.array([math.fsum(col) for col in zip(*(r[key][0] for r in results))])
    squares = np.array([math.fsum(col) for col in zip(*(r[key][1] for r in results))])

    means = sums / counts
    spread = np.maximum(squares - counts * means * means, 0.0)
    multi = counts > 1
    var = np.zeros_like(means)
    var[multi] = spread[multi] / (counts[multi] - 1.0)
    if not multi.all():
        # a pair holding a single path borrows the pooled within-pair variance
        dof = float(np.sum(counts[multi] - 1.0))
        var[~multi] = float(np.sum(spread[multi])) / dof if dof > 0 else 0.0

    weights = _pair_weights(x_strata)
    mean = float(np.dot(weights, means))
    stderr = math.sqrt(float(np.sum(weights * weights * var / counts)))
    return length * mean, length * stderr


def coupled_mc(
    alpha: Union[StableIndex, float],
    D: Interval,
    t: float,
    cfg: McConfig,
    workers: Optional[int] = None
) -> CoupledEstimate:
    """
    Estimate Q, Q~ and both crossing terms from one set of stratified,
    antithetic paths.

    Starting points are stratified over min(x_strata, paths) cells of D and
    mirrored; each mirrored pair of cells enters with its share of |D|
    however many paths it received.

    The subordinate-killed estimate uses the exact conditional probability
    that the Brownian bridges stay in D, so it carries no skeleton bias.
    The killed-subordinate estimate only checks skeleton points.
    """
    idx = StableIndex.of(alpha)
    if not t > 0:
        raise DomainError("Heat content requires t > 0")
    length = D.length
    # every stratum holds at least one path
    strata = min(cfg.x_strata, cfg.paths)
    results = run_blocks(
        _heat_block, (idx.alpha, float(t), cfg.n_steps, length, strata),
        cfg.paths, cfg.n_steps, cfg.seed, workers, cfg.block_cells
    )
    n = int(sum(int(np.sum(r["count"])) for r in results))
    est = {key: _reduce(results, key, length, strata) for key in _MC_KEYS}

    bias = est["ks_half"][0] - est["ks"][0] if cfg.n_steps > 1 else None
    if bias is not None and bias > est["ks"][1]:
        logger.warning(f"Skeleton bias {bias:.3g} exceeds stderr {est['ks'][1]:.3g} at t={t:g}")

    violations = sum(r["violations"] for r in results)
    if violations:
        logger.error(f"{violations} paths violate killed-subordinate dominance")

    def pack(key: str, diag: Optional[float] = None) -> McEstimate:
        return McEstimate(estimate=est[key][0], stderr=est[key][1], bias_diag=diag, paths=n, n_steps=cfg.n_steps)

    return CoupledEstimate(
        ks=pack("ks", bias),
        sk=pack("sk"),
        ks_cross=pack("ks_cross"),
        sk_cross=pack("sk_cross"),
        dominance_violations=violations,
        strictness=math.fsum(r["strict"] for r in results) / (2 * n),
        paths=n,
        n_steps=cfg.n_steps,
    )


def sk_mc(alpha, D: Interval, t: float, cfg: McConfig, workers: Optional[int] = None) -> McEstimate:
    """Monte Carlo Q~(t); unbiased for every n_steps."""
    return coupled_mc(alpha, D, t, cfg, workers).sk


def ks_mc(alpha, D: Interval, t: float, cfg: McConfig, workers: Optional[int] = None) -> McEstimate:
    """Monte Carlo Q(t) on the skeleton; biased high, bias_diag = half grid minus full grid."""
    return coupled_mc(alpha, D, t, cfg, workers).ks


def crossing_mc(
    process_kind: ProcessKind,
    alpha,
    D: Interval,
    t: float,
    cfg: McConfig,
    workers: Optional[int] = None
) -> McEstimate:
    """Monte Carlo int_D P_x(sup >= b and inf <= a) dx for the chosen flavor."""
    coupled = coupled_mc(alpha, D, t, cfg, workers)
    if ProcessKind(process_kind) == ProcessKind.KILLED_SUBORDINATE:
        return coupled.ks_cross
    return coupled.sk_cross


# Reduction identity ---------------------------------------------------------

class ReductionBracket(NamedTuple):
    main_term: float
    crossing_bound: float


def _crossing_scale(alpha: float, t: float, length: float) -> float:
    scale = t ** (1.0 + 1.0 / alpha) / length ** alpha
    if abs(alpha - 1.0) < 1e-12:
        scale *= max(1.0, math.log(1.0 / t))
    return scale


def crossing_constant(
    alpha: Union[StableIndex, float],
    D: Interval,
    cfg: McConfig = _DEFAULT_CROSSING_CONFIG,
    t_ref: float = CROSSING_T_REF,
    workers: Optional[int] = None
) -> float:
    """
    Constant C in crossing <= C t^{1+1/alpha} / |D|^alpha, from a Monte Carlo
    estimate at t_ref plus three standard errors. Cached per configuration.
    """
    return _crossing_constant(StableIndex.of(alpha).alpha, D.length, cfg, t_ref, workers)


@lru_cache(maxsize=64)
def _crossing_constant(alpha: float, length: float, cfg: McConfig, t_ref: float, workers: Optional[int]) -> float:
    # the crossing term only depends on D through its length
    est = crossing_mc(ProcessKind.KILLED_SUBORDINATE, alpha, Interval(a=0.0, b=length), t_ref, cfg, workers)
    constant = (est.estimate + 3.0 * est.stderr) / _crossing_scale(alpha, t_ref, length)
    logger.debug(f"Crossing constant for alpha={alpha}, |D|={length}: {constant:.4g}")
    return constant


def ks_reduction(
    alpha: Union[StableIndex, float],
    D: Interval,
    t: float,
    tail: TailFunction,
    crossing_const: Optional[float] = None,
    crossing_cfg: Optional[McConfig] = None,
    workers: Optional[int] = None
) -> ReductionBracket:
    """
    Bracket |D| - Q(t) in [main_term - crossing_bound, main_term] with

        main_term = 2 t^{1/alpha} int_0^{|D| t^{-1/alpha}} P(sup X > u) du.

    Raises:
        TailDomainError: If the tail cannot reach |D| t^{-1/alpha}
    """
    idx = StableIndex.of(alpha)
    if not t > 0:
        raise DomainError("ks_reduction requires t > 0")
    scale = t ** (1.0 / idx.alpha)
    main = 2.0 * scale * tail.integrate(0.0, D.length / scale)
    if crossing_const is None:
        crossing_const = crossing_constant(idx, D, crossing_cfg or _DEFAULT_CROSSING_CONFIG, workers=workers)
    bound = crossing_const * _crossing_scale(idx.alpha, t, D.length)
    return ReductionBracket(main_term=main, crossing_bound=bound)


# Curves and diagnostics -----------------------------------------------------

def heat_curve(
    process_kind: ProcessKind,
    alpha: Union[StableIndex, float],
    D: Interval,
    t_grid: Union[TGrid, Sequence[float]],
    provenance: Provenance,
    cfg: Optional[McConfig] = None,
    tail: Optional[TailFunction] = None,
    crossing_const: Optional[float] = None,
    workers: Optional[int] = None
) -> HeatCurve:
    """
    Assemble a HeatCurve.

    Series curves exist for the subordinate-killed process, quadrature curves
    (bracket midpoints of ks_reduction) for the killed subordinate process,
    Monte Carlo curves for both.
    """
    idx = StableIndex.of(alpha)
    kind = ProcessKind(process_kind)
    provenance = Provenance(provenance)
    times = t_grid.values() if isinstance(t_grid, TGrid) else list(t_grid)
    length = D.length
    points: List[HeatPoint] = []

    if provenance == Provenance.SERIES:
        if kind != ProcessKind.SUBORDINATE_KILLED:
            raise DomainError("Only the subordinate-killed heat content has an eigenvalue series")
        points = [HeatPoint(t=t, value=sk_series(idx, D, t)) for t in times]

    elif provenance == Provenance.QUADRATURE:
        if kind != ProcessKind.KILLED_SUBORDINATE:
            raise DomainError("The reduction identity applies to the killed subordinate process")
        if tail is None:
            tail = stable_sup_tail(idx, None if cfg is None else cfg.sup_config(), workers)
        for t in times:
            bracket = ks_reduction(idx, D, t, tail, crossing_const, cfg, workers)
            half = 0.5 * bracket.crossing_bound
            value = min(length, max(0.0, length - bracket.main_term + half))
            points.append(HeatPoint(t=t, value=value, stderr=half))

    else:
        if cfg is None:
            raise DomainError("Monte Carlo curves need an McConfig")
        for t in times:
            coupled = coupled_mc(idx, D, t, cfg, workers)
            est = coupled.ks if kind == ProcessKind.KILLED_SUBORDINATE else coupled.sk
            points.append(HeatPoint(t=t, value=est.estimate, stderr=est.stderr, bias_diag=est.bias_diag))

    logger.info(f"Assembled {provenance.value} curve for {kind.value}, alpha={idx.alpha}, {len(points)} points")
    return HeatCurve(process_kind=kind, alpha=idx, interval=D, points=points, provenance=provenance)


def loglog_slope(ts: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(ts)."""
    t_arr = np.asarray(ts, dtype=float)
    v_arr = np.asarray(values, dtype=float)
    if t_arr.size < 2 or np.any(t_arr <= 0) or np.any(v_arr <= 0):
        raise DomainError("loglog_slope needs at least two positive points")
    slope, _ = np.polyfit(np.log(t_arr), np.log(v_arr), 1)
    return float(slope)


def lemma_exit_probability(
    alpha: Union[StableIndex, float],
    D: Interval,
    t_values: Sequence[float],
    cfg: McConfig,
    workers: Optional[int] = None
) -> List[Dict[str, float]]:
    """
    P(sup_{u <= S_t} W_u > |D|) at each t, by Monte Carlo and exactly.

    sup_{u <= S_t} W_u has the law of t^{1/alpha} |X_1|, so the exact value is
    2 P(X_1 > |D| t^{-1/alpha}), taken from scipy's stable law.
    """
    idx = StableIndex.of(alpha)
    samples = sample_subordinate_sup(
        idx, cfg.sup_config(), workers
    )
    rows = []
    for t in t_values:
        threshold = D.length * t ** (-1.0 / idx.alpha)
        estimate, stderr = empirical_tail(samples, threshold)
        exact = 2.0 * float(stats.levy_stable.sf(threshold, idx.alpha, 0.0))
        rows.append({"t": float(t), "estimate": estimate, "stderr": stderr, "exact": exact})
    return rows
