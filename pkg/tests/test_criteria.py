"""
Tests for the acceptance criteria and the validation graph.
"""

import asyncio
import math
import pytest

from heatlab import build, supremum
from heatlab.nodes import criteria
from heatlab.state import CriterionResult

SMALL_BUDGET = {**criteria.FAST_BUDGET, "a2_paths": 20_000}


def test_density_oracle_passes():
    result = criteria.check_density_oracle(SMALL_BUDGET)
    assert result.id == "A1"
    assert result.passed
    assert result.measured["max_relative_error"] <= 1e-8
    assert result.elapsed_s >= 0


def test_darling_passes():
    result = criteria.check_darling(SMALL_BUDGET)
    assert result.id == "A10"
    assert result.passed
    assert result.measured["mass"] == pytest.approx(1.0, abs=1e-6)


def test_arctan_law_report():
    """Test that the report lists every abscissa with its tolerance."""
    result = criteria.check_arctan_law(SMALL_BUDGET)
    assert result.measured["max_quadrature_gap"] < 1e-8
    assert {"u=1.1", "u=2.0", "u=5.0", "u=10.0"} <= set(result.measured)
    assert result.tolerance["quadrature_gap"] == 1e-9


def test_arctan_mutation_flips_a2(monkeypatch):
    """Test that tampering with the arctan fast path fails A2."""
    monkeypatch.setattr(supremum, "arctan_tail", lambda u: 2.0 / 3.14 * math.atan(1.0 / u))
    result = criteria.check_arctan_law(SMALL_BUDGET)
    assert not result.passed
    assert result.measured["max_quadrature_gap"] > 1e-6


def test_third_term_cauchy_passes():
    result = criteria.check_third_term_cauchy(SMALL_BUDGET)
    assert result.passed
    assert result.measured["discrepancy"] > 0


def test_suite_membership():
    assert criteria.FAST_ORDER == ["A1", "A2", "A4", "A5", "A6", "A8", "A10"]
    assert set(criteria.FAST_ORDER + criteria.FULL_EXTRA) == set(criteria.CRITERIA)


def _stub(cid, passed=True):
    def check(budget):
        return CriterionResult(id=cid, passed=passed, measured={"seed": budget["seed"]})
    return check


def _boom(budget):
    raise RuntimeError("quadrature diverged")


@pytest.mark.parametrize("suite,expected", [("fast", 7), ("full", 10)])
def test_graph_runs_suite(monkeypatch, suite, expected):
    """Test the node order and the full-suite branch on stubbed criteria."""
    for cid in criteria.CRITERIA:
        monkeypatch.setitem(build.CRITERIA, cid, _stub(cid))
    monkeypatch.setitem(build.CRITERIA, "A4", _boom)
    graph = build.SuiteGraphBuilder().compile()

    state = {"suite": suite, "budgets": {"seed": 5}, "results": [], "error": None}
    final = asyncio.run(graph.ainvoke(state))
    results = final["results"]
    assert len(results) == expected
    assert [r["id"] for r in results][:7] == criteria.FAST_ORDER

    failed = [r for r in results if not r["passed"]]
    assert [r["id"] for r in failed] == ["A4"]
    assert "quadrature diverged" in failed[0]["error"]
    assert results[0]["measured"]["seed"] == 5
