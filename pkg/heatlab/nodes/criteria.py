"""
Acceptance criteria.

Each criterion takes a budget dictionary and returns a CriterionResult with
what it measured and the tolerance it applied. Monte Carlo budgets differ
between the fast and full suites; deterministic criteria are identical.
"""

import logging
import math
import time
from typing import Any, Callable, Dict, List, Optional

import numpy as np

import config
from ..asymptotics import (
    fit_coefficients, residual_curve, series_expansion, theorem_expansion
)
from ..heatcontent import (
    coupled_mc, crossing_constant, crossing_mc, heat_curve, ks_reduction,
    lemma_exit_probability, loglog_slope, sk_series
)
from ..specfun import (
    bm_sup_moment, catalan_constant, erfc_power_integral, ksbm_third_coeff,
    skbm_second_coeff
)
from ..state import (
    BasisTerm, CriterionResult, Interval, McConfig, ProcessKind, Provenance,
    SupSampleConfig
)
from .. import subordinator, supremum

logger = logging.getLogger(__name__)

UNIT = Interval(a=0.0, b=1.0)

FAST_BUDGET: Dict[str, Any] = {
    "seed": config.DEFAULT_SEED,
    "a2_paths": 100_000, "a2_steps": 1,
    "a3_paths": 100_000, "a3_steps": 16,
    "a6_paths": 20_000, "a6_steps": 64,
    "a7_paths": 200_000, "a7_steps": 64, "a7_points": 6,
    "a8_paths": 20_000, "a8_steps": 32,
    "a9_paths": 200_000, "a9_steps": 64,
}

FULL_BUDGET: Dict[str, Any] = {
    "seed": config.DEFAULT_SEED,
    "a2_paths": 1_000_000, "a2_steps": 1,
    "a3_paths": 1_000_000, "a3_steps": 10_000,
    "a6_paths": 100_000, "a6_steps": 128,
    "a7_paths": 10_000_000, "a7_steps": 256, "a7_points": 8,
    "a8_paths": 100_000, "a8_steps": 64,
    "a9_paths": 1_000_000, "a9_steps": 128,
}

SUITE_BUDGETS = {"fast": FAST_BUDGET, "full": FULL_BUDGET}


def _mc_config(budget: Dict[str, Any], name: str) -> McConfig:
    return McConfig(
        paths=budget[f"{name}_paths"], n_steps=budget[f"{name}_steps"],
        seed=budget["seed"], block_cells=budget.get("block_cells")
    )


def _sup_config(
    budget: Dict[str, Any], name: str, seed_offset: int = 0, max_paths: Optional[int] = None
) -> SupSampleConfig:
    paths = budget[f"{name}_paths"]
    return SupSampleConfig(
        n_steps=budget[f"{name}_steps"], paths=paths if max_paths is None else min(paths, max_paths),
        seed=budget["seed"] + seed_offset, block_cells=budget.get("block_cells")
    )


def _criterion(cid: str, description: str):
    """Time the wrapped check and fill in id, description and runtime."""
    def decorate(fn: Callable[[Dict[str, Any]], CriterionResult]):
        def run(budget: Dict[str, Any]) -> CriterionResult:
            start = time.time()
            result = fn(budget)
            result.id = cid
            result.description = description
            result.elapsed_s = round(time.time() - start, 3)
            logger.info(f"{cid}: {'pass' if result.passed else 'FAIL'} in {result.elapsed_s:.1f}s")
            return result
        run.__name__ = fn.__name__
        return run
    return decorate


@_criterion("A1", "Subordinator density series against the closed form at alpha = 1")
def check_density_oracle(budget: Dict[str, Any]) -> CriterionResult:
    xs = np.geomspace(0.5, 50.0, 200)
    exact = xs ** -1.5 * np.exp(-0.25 / xs) / (2.0 * math.sqrt(math.pi))
    computed = np.array([subordinator.density(1.0, float(x)) for x in xs])
    worst = float(np.max(np.abs(computed - exact) / exact))
    return CriterionResult(
        id="A1", passed=worst <= 1e-8,
        measured={"max_relative_error": worst},
        tolerance={"max_relative_error": 1e-8},
    )


@_criterion("A2", "Arctan law for the subordinate supremum at alpha = 1")
def check_arctan_law(budget: Dict[str, Any]) -> CriterionResult:
    quadrature = supremum.skbm_sup_tail(1.0, fast_path=False)
    fast = supremum.skbm_sup_tail(1.0)
    gaps = {f"u={u}": abs(quadrature(u) - fast(u)) for u in (1.1, 2.0, 5.0, 10.0)}
    worst = max(gaps.values())

    cfg = _sup_config(budget, "a2")
    estimate, stderr = supremum.empirical_tail(supremum.sample_subordinate_sup(1.0, cfg), 2.0)
    mc_gap = abs(estimate - fast(2.0))

    evidence = supremum.arctan_discrepancy_table()
    return CriterionResult(
        id="A2", passed=worst <= 1e-9 and mc_gap <= 3.0 * stderr,
        measured={
            "max_quadrature_gap": worst, **gaps,
            "mc_estimate_u2": estimate, "mc_stderr_u2": stderr, "mc_gap_u2": mc_gap,
            "max_gap_below_one": max(abs(row["difference"]) for row in evidence),
        },
        tolerance={"quadrature_gap": 1e-9, "mc_gap_stderrs": 3.0},
        detail="max_gap_below_one is reported only; the arctan law is proved for u > 1",
    )


@_criterion("A3", "Mean subordinate supremum at alpha = 1.5")
def check_second_coefficient(budget: Dict[str, Any]) -> CriterionResult:
    cfg = _sup_config(budget, "a3")
    samples = supremum.sample_subordinate_sup(1.5, cfg)
    mean = float(np.mean(samples))
    stderr = float(np.std(samples, ddof=1) / math.sqrt(samples.size))
    target = skbm_second_coeff(1.5)
    return CriterionResult(
        id="A3", passed=abs(mean - target) <= 3.0 * stderr,
        measured={"mean": mean, "stderr": stderr, "target": target},
        tolerance={"stderrs": 3.0},
    )


@_criterion("A4", "Third coefficient of the subordinate-killed series at alpha = 1.5")
def check_third_term_high(budget: Dict[str, Any]) -> CriterionResult:
    alpha = 1.5
    exact = series_expansion(alpha, UNIT)
    theorem = theorem_expansion(ProcessKind.SUBORDINATE_KILLED, alpha, UNIT)
    curve = heat_curve(ProcessKind.SUBORDINATE_KILLED, alpha, UNIT, [1e-5], Provenance.SERIES)
    (_, residual), = residual_curve(curve, exact)
    relative = abs(residual - exact.c3) / abs(exact.c3)

    quad = erfc_power_integral(alpha)
    closed = bm_sup_moment(alpha) / alpha
    return CriterionResult(
        id="A4", passed=relative <= 0.05 and abs(quad - closed) <= 1e-8,
        measured={
            "residual_t1e-5": residual, "c3_eigenseries": exact.c3,
            "c3_theorem": theorem.c3, "discrepancy": theorem.c3 - exact.c3,
            "relative_error": relative, "erfc_integral": quad, "erfc_integral_closed": closed,
        },
        tolerance={"relative_error": 0.05, "erfc_integral": 1e-8},
        detail="c3_theorem is reported; the series residual converges to c3_eigenseries",
    )


@_criterion("A5", "Third coefficient of the subordinate-killed series at alpha = 1")
def check_third_term_cauchy(budget: Dict[str, Any]) -> CriterionResult:
    exact = series_expansion(1.0, UNIT)
    theorem = theorem_expansion(ProcessKind.SUBORDINATE_KILLED, 1.0, UNIT)
    times = [1e-4, 1e-5, 1e-6]
    curve = heat_curve(ProcessKind.SUBORDINATE_KILLED, 1.0, UNIT, times, Provenance.SERIES)
    residuals = dict(residual_curve(curve, exact))
    deviations = [abs(residuals[t] - exact.c3) for t in sorted(times, reverse=True)]
    floor = 1e-9 * abs(exact.c3)
    monotone = all(later <= earlier + floor for earlier, later in zip(deviations, deviations[1:]))
    relative = deviations[-1] / abs(exact.c3)
    return CriterionResult(
        id="A5", passed=relative <= 0.05 and monotone,
        measured={
            **{f"residual_t{t:g}": residuals[t] for t in times},
            "c3_eigenseries": exact.c3, "c3_theorem": theorem.c3,
            "discrepancy": theorem.c3 - exact.c3, "relative_error_t1e-6": relative,
            "monotone": monotone,
        },
        tolerance={"relative_error": 0.05, "monotone_floor": floor},
    )


@_criterion("A6", "Logarithmic coefficient of the killed subordinate process at alpha = 1")
def check_log_coefficient(budget: Dict[str, Any]) -> CriterionResult:
    t = 1e-6
    tail = supremum.cauchy_sup_tail()
    cfg = _mc_config(budget, "a6")
    constant = crossing_constant(1.0, UNIT, cfg)
    bracket = ks_reduction(1.0, UNIT, t, tail, crossing_const=constant)
    coarse = ks_reduction(1.0, UNIT, 1e-4, tail, crossing_const=constant)
    expansion = theorem_expansion(ProcessKind.KILLED_SUBORDINATE, 1.0, UNIT)

    log_term = t * math.log(1.0 / t)
    raw = bracket.main_term / log_term
    corrected = (bracket.main_term - expansion.c3 * t) / log_term
    target = 2.0 / math.pi

    threshold = supremum.cauchy_tail_threshold()
    remainder = supremum.cauchy_log_remainder()
    partials = {
        f"partial_{int(u)}": tail.integrate(1.0, u) - math.log(u) / math.pi for u in (10.0, 100.0, 1000.0)
    }
    steps = [abs(partials["partial_100"] - partials["partial_10"]),
             abs(partials["partial_1000"] - partials["partial_100"])]
    ratio_small = bracket.crossing_bound / bracket.main_term
    ratio_coarse = coarse.crossing_bound / coarse.main_term

    passed = (
        abs(corrected - target) <= 0.02 * target
        and math.isfinite(threshold)
        and math.isfinite(remainder)
        and steps[1] < steps[0]
        and ratio_small < ratio_coarse
    )
    return CriterionResult(
        id="A6", passed=passed,
        measured={
            "raw_ratio": raw, "corrected_ratio": corrected, "target": target,
            "u_emp": threshold, "log_remainder": remainder, **partials,
            "crossing_to_main_t1e-6": ratio_small, "crossing_to_main_t1e-4": ratio_coarse,
            "c3_theorem": expansion.c3,
        },
        tolerance={"relative_error": 0.02},
        detail="raw_ratio converges like 1/ln(1/t); the check uses the ratio after removing c3 t",
    )


@_criterion("A7", "Coefficients of the killed subordinate process at alpha = 1.5 from Monte Carlo")
def check_third_term_ksbm(budget: Dict[str, Any]) -> CriterionResult:
    alpha = 1.5
    cfg = _mc_config(budget, "a7")
    times = list(np.geomspace(1e-4, 1e-2, budget["a7_points"]))
    curve = heat_curve(ProcessKind.KILLED_SUBORDINATE, alpha, UNIT, times, Provenance.MONTE_CARLO, cfg)
    fit = fit_coefficients(curve, [BasisTerm.T_POWER, BasisTerm.T], (1e-4, 1e-2))

    mean = supremum.mean_stable_sup(alpha, _sup_config(budget, "a7", seed_offset=1, max_paths=1_000_000))
    c2, c2_se = fit.coefficients[BasisTerm.T_POWER.value]
    c3, _ = fit.coefficients[BasisTerm.T.value]
    target_c2 = 2.0 * mean.estimate
    joint = math.hypot(c2_se, 2.0 * mean.stderr)
    magnitude = ksbm_third_coeff(alpha, 1.0)
    passed = abs(c2 - target_c2) <= 3.0 * joint and c3 < 0 and abs(abs(c3) - magnitude) <= 0.2 * magnitude
    return CriterionResult(
        id="A7", passed=passed,
        measured={
            "c2_fit": c2, "c2_stderr": c2_se, "c2_target": target_c2, "c3_fit": c3,
            "c3_magnitude_target": magnitude,
            "max_bias_diag": max(abs(p.bias_diag or 0.0) for p in curve.points),
        },
        tolerance={"c2_joint_stderrs": 3.0, "c3_relative": 0.2},
    )


@_criterion("A8", "Pathwise order of the two processes and series agreement")
def check_coupling(budget: Dict[str, Any]) -> CriterionResult:
    measured: Dict[str, Any] = {}
    passed = True
    for alpha in (1.0, 1.5):
        for t in (0.01, 0.1):
            cfg = _mc_config(budget, "a8")
            coupled = coupled_mc(alpha, UNIT, t, cfg)
            exact = sk_series(alpha, UNIT, t)
            gap = abs(exact - coupled.sk.estimate)
            key = f"alpha={alpha},t={t}"
            measured[f"{key}:violations"] = coupled.dominance_violations
            measured[f"{key}:series_gap_stderrs"] = gap / coupled.sk.stderr if coupled.sk.stderr > 0 else math.inf
            measured[f"{key}:strictness"] = coupled.strictness
            passed = passed and coupled.dominance_violations == 0 and gap <= 3.0 * coupled.sk.stderr
    return CriterionResult(
        id="A8", passed=passed, measured=measured,
        tolerance={"violations": 0, "series_gap_stderrs": 3.0},
    )


@_criterion("A9", "Growth exponents of crossing and exit probabilities")
def check_exponents(budget: Dict[str, Any]) -> CriterionResult:
    times = [1e-3, 3e-3, 1e-2]
    cfg = _mc_config(budget, "a9")
    measured: Dict[str, Any] = {}

    def slope(kind: ProcessKind, alpha: float) -> float:
        values = [crossing_mc(kind, alpha, UNIT, t, cfg).estimate for t in times]
        return loglog_slope(times, values) if min(values) > 0 else math.nan

    measured["ksbm_alpha1.5"] = slope(ProcessKind.KILLED_SUBORDINATE, 1.5)
    measured["ksbm_alpha1"] = slope(ProcessKind.KILLED_SUBORDINATE, 1.0)
    measured["skbm_alpha1"] = slope(ProcessKind.SUBORDINATE_KILLED, 1.0)

    rows = lemma_exit_probability(1.5, UNIT, [1e-3, 1e-2, 1e-1], cfg)
    measured["exit_slope_mc"] = loglog_slope([r["t"] for r in rows], [max(r["estimate"], 1e-300) for r in rows])
    measured["exit_slope_exact"] = loglog_slope([r["t"] for r in rows], [r["exact"] for r in rows])

    target_high = 1.0 + 1.0 / 1.5 - 0.1
    passed = (
        measured["ksbm_alpha1.5"] >= target_high
        and measured["ksbm_alpha1"] >= 1.8
        and measured["exit_slope_mc"] >= 0.95
        and measured["exit_slope_exact"] >= 0.95
    )
    return CriterionResult(
        id="A9", passed=bool(passed), measured=measured,
        tolerance={"ksbm_alpha1.5": target_high, "ksbm_alpha1": 1.8, "exit_slope": 0.95},
        detail="skbm_alpha1 is reported only; its crossing term is of order t",
    )


@_criterion("A10", "Darling density normalization and value at 1")
def check_darling(budget: Dict[str, Any]) -> CriterionResult:
    mass = supremum.cauchy_sup_tail().survival(0.0)
    catalan = catalan_constant()
    expected = math.exp(catalan / math.pi) / (math.pi * 2.0 ** 0.75)
    value = supremum.cauchy_sup_density(1.0)
    return CriterionResult(
        id="A10", passed=abs(mass - 1.0) <= 1e-6 and abs(value - expected) <= 1e-6,
        measured={"mass": mass, "f(1)": value, "expected_f(1)": expected, "catalan": catalan},
        tolerance={"mass": 1e-6, "f(1)": 1e-6},
    )


CRITERIA: Dict[str, Callable[[Dict[str, Any]], CriterionResult]] = {
    "A1": check_density_oracle,
    "A2": check_arctan_law,
    "A3": check_second_coefficient,
    "A4": check_third_term_high,
    "A5": check_third_term_cauchy,
    "A6": check_log_coefficient,
    "A7": check_third_term_ksbm,
    "A8": check_coupling,
    "A9": check_exponents,
    "A10": check_darling,
}

FAST_ORDER: List[str] = ["A1", "A2", "A4", "A5", "A6", "A8", "A10"]
FULL_EXTRA: List[str] = ["A3", "A7", "A9"]
