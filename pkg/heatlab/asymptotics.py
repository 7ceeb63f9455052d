"""
Small-time expansions of the heat content and coefficient extraction.

Every expansion is stored as

    Q(t) ~ c1 - c2 t^{1/alpha} - c2log t ln(1/t) - c3 t

so c3 is the signed coefficient of t in the defect |D| - Q(t).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, linalg, special

import config
from .heatcontent import heat_curve
from .specfun import (
    erfc_power_integral, ksbm_third_coeff, skbm_second_coeff
)
from .state import (
    BasisTerm, DomainError, Expansion, FitResult, HeatCurve, HeatPoint,
    IllConditionedFitError, Interval, McEstimate, MetadataMismatchError,
    ProcessKind, Provenance, StableIndex, SupSampleConfig, TGrid,
    UnsupportedRegimeError
)
from .supremum import (
    arctan_tail, cauchy_log_remainder, cauchy_sup_tail, mean_stable_sup, skbm_sup_tail
)

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (1e-6, 1e-3)
MAX_CONDITION = 1e12


@dataclass
class ExpansionResources:
    """Budgets and precomputed constants for expansions without closed forms."""
    sup_cfg: SupSampleConfig = field(
        default_factory=lambda: SupSampleConfig(n_steps=256, paths=100_000, seed=config.DEFAULT_SEED)
    )
    stable_mean: Optional[McEstimate] = None
    workers: Optional[int] = None


def _ksbm_cauchy_bracket(length: float) -> float:
    """int_0^1 P(M > u) du + ln|D|/pi + int_1^inf (P(M > u) - 1/(pi u)) du."""
    tail = cauchy_sup_tail()
    return tail.integrate(0.0, 1.0) + math.log(length) / math.pi + cauchy_log_remainder()


def skbm_arctan_remainder() -> float:
    """int_1^inf ((2/pi) arctan(1/u) - 2/(pi u)) du, finite and negative."""
    value, _ = integrate.quad(
        lambda u: arctan_tail(u) - 2.0 / (math.pi * u), 1.0, np.inf,
        epsabs=1e-14, epsrel=1e-12, limit=200
    )
    return value


def _skbm_cauchy_bracket(length: float) -> float:
    head = skbm_sup_tail(1.0, fast_path=False).integrate(0.0, 1.0)
    return head + 2.0 * math.log(length) / math.pi + skbm_arctan_remainder()


def theorem_expansion(
    process_kind: ProcessKind,
    alpha: Union[StableIndex, float],
    D: Interval,
    resources: Optional[ExpansionResources] = None
) -> Expansion:
    """
    Coefficients of the small-time theorems for either process.

    Raises:
        UnsupportedRegimeError: For alpha in (0, 1), where only two terms are known
    """
    idx = StableIndex.of(alpha)
    kind = ProcessKind(process_kind)
    if idx.alpha < 1.0 and not idx.is_cauchy:
        raise UnsupportedRegimeError(
            f"alpha={idx.alpha} lies in (0, 1): the expansion is only known up to the second term"
        )
    resources = resources or ExpansionResources()
    length = D.length
    boundary = D.boundary_count

    if idx.is_cauchy:
        if kind == ProcessKind.KILLED_SUBORDINATE:
            bracket = _ksbm_cauchy_bracket(length)
            c2log = boundary / math.pi
        else:
            bracket = _skbm_cauchy_bracket(length)
            c2log = boundary * 2.0 / math.pi
        return Expansion(
            process_kind=kind, alpha=idx, interval=D, c1=length,
            c2log=c2log, c3=boundary * bracket, source="theorem",
            constant_provenance={"c2log": "closed_form", "c3": "quadrature"},
        )

    magnitude = ksbm_third_coeff(idx, length)
    if kind == ProcessKind.KILLED_SUBORDINATE:
        mean = resources.stable_mean or mean_stable_sup(idx, resources.sup_cfg, resources.workers)
        logger.info(f"E[sup X] for alpha={idx.alpha}: {mean.estimate:.6g} +/- {mean.stderr:.2g}")
        return Expansion(
            process_kind=kind, alpha=idx, interval=D, c1=length,
            c2=boundary * mean.estimate, c2_stderr=boundary * mean.stderr,
            c3=-magnitude, source="theorem",
            constant_provenance={"c2": "monte_carlo", "c3": "quadrature"},
        )
    return Expansion(
        process_kind=kind, alpha=idx, interval=D, c1=length,
        c2=boundary * skbm_second_coeff(idx), c3=-2.0 * magnitude, source="theorem",
        constant_provenance={"c2": "closed_form", "c3": "quadrature"},
    )


def series_expansion(alpha: Union[StableIndex, float], D: Interval) -> Expansion:
    """
    Exact small-time expansion of the subordinate-killed eigenvalue series.

    From the Mellin transform of the series, with L = |D|:

        alpha in (1, 2):  c2 = (4/pi) Gamma(1 - 1/alpha),
                          c3 = 8 pi^{alpha-2} (1 - 2^{alpha-2}) zeta(2 - alpha) L^{1-alpha}
        alpha = 1:        c2log = 4/pi, c3 = (4/pi)(1 + ln(2L/pi))

    The remainder is O(t^2).
    """
    idx = StableIndex.of(alpha)
    length = D.length
    if idx.is_cauchy:
        return Expansion(
            process_kind=ProcessKind.SUBORDINATE_KILLED, alpha=idx, interval=D, c1=length,
            c2log=4.0 / math.pi, c3=4.0 / math.pi * (1.0 + math.log(2.0 * length / math.pi)),
            source="eigenseries", constant_provenance={"c2log": "closed_form", "c3": "closed_form"},
        )
    if idx.alpha < 1.0:
        raise UnsupportedRegimeError(f"No third-term expansion is claimed for alpha={idx.alpha} < 1")
    a = idx.alpha
    c3 = (
        8.0 * math.pi ** (a - 2.0) * (1.0 - 2.0 ** (a - 2.0))
        * float(special.zeta(2.0 - a)) * length ** (1.0 - a)
    )
    return Expansion(
        process_kind=ProcessKind.SUBORDINATE_KILLED, alpha=idx, interval=D, c1=length,
        c2=2.0 * skbm_second_coeff(idx), c3=c3, source="eigenseries",
        constant_provenance={"c2": "closed_form", "c3": "closed_form"},
    )


def eval_expansion(e: Expansion, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Predicted Q(t) = c1 - c2 t^{1/alpha} - c2log t ln(1/t) - c3 t."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("eval_expansion requires t > 0")
    out = e.c1 - e.c2 * arr ** (1.0 / e.alpha.alpha) - e.c2log * arr * np.log(1.0 / arr) - e.c3 * arr
    return float(out) if out.ndim == 0 else out


def _check_metadata(curve: HeatCurve, e: Expansion) -> None:
    if curve.process_kind != e.process_kind:
        raise MetadataMismatchError(f"Curve is {curve.process_kind.value}, expansion is {e.process_kind.value}")
    if curve.alpha != e.alpha:
        raise MetadataMismatchError(f"Curve has alpha={curve.alpha.alpha}, expansion alpha={e.alpha.alpha}")
    if curve.interval != e.interval:
        raise MetadataMismatchError(
            f"Curve interval {curve.interval.as_tuple()} differs from {e.interval.as_tuple()}"
        )


def residual_curve(curve: HeatCurve, e: Expansion) -> List[Tuple[float, float]]:
    """
    (t, residual) with residual = (c1 - Q(t) - c2 t^{1/alpha} - c2log t ln(1/t)) / t,
    which tends to c3.
    """
    _check_metadata(curve, e)
    inv_alpha = 1.0 / e.alpha.alpha
    rows = []
    for p in curve.points:
        t = p.t
        rest = e.c1 - p.value - e.c2 * t ** inv_alpha - e.c2log * t * math.log(1.0 / t)
        rows.append((t, rest / t))
    return rows


def _basis_column(term: BasisTerm, t: np.ndarray, alpha: float) -> np.ndarray:
    if term == BasisTerm.T_POWER:
        return t ** (1.0 / alpha)
    if term == BasisTerm.T_LOG:
        return t * np.log(1.0 / t)
    return t


def fit_coefficients(
    curve: HeatCurve,
    basis: Sequence[Union[BasisTerm, str]],
    window: Tuple[float, float] = DEFAULT_WINDOW
) -> FitResult:
    """
    Weighted least squares of c1 - Q(t) on the chosen basis.

    Args:
        curve: Heat curve to fit
        basis: Ordered subset of {t^(1/alpha), t*ln(1/t), t}
        window: (t_min, t_max) of the points used

    Returns:
        FitResult with estimates and standard errors from the normal equations

    Raises:
        DomainError: If fewer than 2 |basis| points fall in the window
        IllConditionedFitError: If the normal equations are too ill-conditioned
    """
    terms = [BasisTerm(b) for b in basis]
    if not terms or len(set(terms)) != len(terms):
        raise DomainError("basis must be a non-empty set of distinct terms")
    t_min, t_max = window
    if not 0 < t_min < t_max:
        raise DomainError("window requires 0 < t_min < t_max")

    chosen = [p for p in curve.points if t_min * (1 - 1e-12) <= p.t <= t_max * (1 + 1e-12)]
    k = len(terms)
    if len(chosen) < 2 * k:
        raise DomainError(f"Need at least {2 * k} points in [{t_min:g}, {t_max:g}], found {len(chosen)}")

    t = np.array([p.t for p in chosen])
    y = curve.interval.length - np.array([p.value for p in chosen])
    stderr = np.array([p.stderr for p in chosen])
    unit = curve.provenance == Provenance.SERIES or not np.all(stderr > 0)
    sqrt_w = np.ones_like(t) if unit else 1.0 / stderr

    X = np.column_stack([_basis_column(term, t, curve.alpha.alpha) for term in terms])
    Xw = X * sqrt_w[:, None]
    yw = y * sqrt_w
    norms = np.linalg.norm(Xw, axis=0)
    if np.any(norms == 0):
        raise IllConditionedFitError("A basis column vanishes on the window", math.inf)
    Xs = Xw / norms
    normal = Xs.T @ Xs
    cond = float(np.linalg.cond(normal))
    if not cond <= MAX_CONDITION:
        raise IllConditionedFitError(
            f"Condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}; widen the window or drop a term",
            cond
        )

    factor = linalg.cho_factor(normal)
    beta_s = linalg.cho_solve(factor, Xs.T @ yw)
    cov_s = linalg.cho_solve(factor, np.eye(k))
    residual = yw - Xs @ beta_s
    rss = float(residual @ residual)
    if unit:
        dof = len(chosen) - k
        cov_s = cov_s * (rss / dof if dof > 0 else 0.0)

    beta = beta_s / norms
    errors = np.sqrt(np.clip(np.diag(cov_s), 0.0, None)) / norms
    coefficients = {term.value: (float(b), float(s)) for term, b, s in zip(terms, beta, errors)}
    logger.debug(f"Fit on {len(chosen)} points, condition {cond:.3g}: {coefficients}")
    return FitResult(
        coefficients=coefficients,
        residual_norm=math.sqrt(rss),
        t_window=(t_min, t_max),
        condition_number=cond,
        points_used=len(chosen),
    )


def expansion_curve(e: Expansion, t_grid: Union[TGrid, Sequence[float]]) -> HeatCurve:
    """Synthetic curve from an expansion, for exact-model checks of the fitter."""
    times = t_grid.values() if isinstance(t_grid, TGrid) else list(t_grid)
    points = [HeatPoint(t=t, value=eval_expansion(e, t)) for t in times]
    return HeatCurve(
        process_kind=e.process_kind, alpha=e.alpha, interval=e.interval,
        points=points, provenance=Provenance.SERIES
    )


def third_term_report(
    alpha: Union[StableIndex, float],
    D: Interval,
    t_values: Sequence[float] = (1e-3, 1e-4, 1e-5),
    resources: Optional[ExpansionResources] = None
) -> Dict[str, Any]:
    """
    Theorem third coefficient of the subordinate-killed process against the
    exact eigenvalue-series coefficient, with series residuals for reference.

    The difference is the t-coefficient of the two-sided crossing term.
    """
    idx = StableIndex.of(alpha)
    theorem = theorem_expansion(ProcessKind.SUBORDINATE_KILLED, idx, D, resources)
    exact = series_expansion(idx, D)
    curve = heat_curve(ProcessKind.SUBORDINATE_KILLED, idx, D, list(t_values), Provenance.SERIES)
    residuals = residual_curve(curve, exact)
    report = {
        "alpha": idx.alpha,
        "length": D.length,
        "c3_theorem": theorem.c3,
        "c3_eigenseries": exact.c3,
        "discrepancy": theorem.c3 - exact.c3,
        "crossing_per_t": theorem.c3 - exact.c3,
        "residuals": [{"t": t, "residual": r} for t, r in residuals],
    }
    if not idx.is_cauchy:
        report["erfc_integral"] = erfc_power_integral(idx)
    return report
