"""
Tests for supremum tails and supremum sampling.
"""

import math
import numpy as np
import pytest

import config
from heatlab import supremum
from heatlab.state import DomainError, SupSampleConfig, TailDomainError, TailMethod

CATALAN = 0.915965594177219


def test_bm_tail():
    tail = supremum.bm_sup_tail()
    assert tail(0.0) == 1.0
    assert tail(2.0) == pytest.approx(math.erfc(1.0))
    assert tail.method == TailMethod.CLOSED_FORM

    with pytest.raises(DomainError):
        tail(-1.0)


def test_cauchy_density():
    """Test Darling's density at 1 and its normalization."""
    expected = math.exp(CATALAN / math.pi) / (math.pi * 2.0 ** 0.75)
    assert supremum.cauchy_sup_density(1.0) == pytest.approx(expected, rel=1e-10)
    assert supremum.cauchy_sup_density(1.0) == pytest.approx(0.25335, abs=1e-5)
    assert supremum.cauchy_sup_tail().survival(0.0) == pytest.approx(1.0, abs=1e-8)

    with pytest.raises(DomainError):
        supremum.cauchy_sup_density(0.0)


def test_cauchy_tail_asymptote():
    """Test the tail against 1/(pi u) within the logarithmic envelope."""
    tail = supremum.cauchy_sup_tail()
    for u in (100.0, 1000.0):
        assert abs(tail(u) - 1.0 / (math.pi * u)) <= supremum.cauchy_tail_envelope(u)
    assert math.isfinite(supremum.cauchy_tail_threshold())
    assert math.isfinite(supremum.cauchy_log_remainder())


def test_cauchy_tail_integral():
    """Test the closed antiderivative against direct quadrature of the survival."""
    tail = supremum.cauchy_sup_tail()
    direct = supremum._integrate_decreasing(tail.survival, 0.0, 5.0)
    assert tail.integrate(0.0, 5.0) == pytest.approx(direct, abs=1e-8)
    assert tail.integrate(1.0, 1.0) == 0.0


def test_arctan_law():
    """Test the fast path and its agreement with quadrature for u > 1."""
    fast = supremum.skbm_sup_tail(1.0)
    assert fast(2.0) == pytest.approx(2.0 / math.pi * math.atan(0.5), abs=1e-12)
    assert fast(2.0) == pytest.approx(0.295167, abs=1e-6)

    quadrature = supremum.skbm_sup_tail(1.0, fast_path=False)
    for u in (1.1, 2.0, 5.0):
        assert quadrature(u) == pytest.approx(fast(u), abs=1e-8)


def test_arctan_hook(monkeypatch):
    """Test that the fast path is looked up at call time."""
    monkeypatch.setattr(supremum, "arctan_tail", lambda u: 0.5)
    assert supremum.skbm_sup_tail(1.0)(2.0) == 0.5
    assert supremum.skbm_sup_tail(1.0)(0.5) != 0.5


def test_arctan_discrepancy_table():
    rows = supremum.arctan_discrepancy_table([0.5, 1.0])
    assert [row["u"] for row in rows] == [0.5, 1.0]
    for row in rows:
        assert row["difference"] == pytest.approx(row["quadrature"] - row["arctan"])
        assert 0.0 < row["quadrature"] <= 1.0


def test_subordinate_sup_sampling():
    """Test bridge-filled suprema against the arctan law, exact for one step."""
    cfg = SupSampleConfig(n_steps=1, paths=50_000, seed=config.DEFAULT_SEED)
    samples = supremum.sample_subordinate_sup(1.0, cfg)
    estimate, stderr = supremum.empirical_tail(samples, 2.0)
    assert abs(estimate - 0.295167) <= 4.0 * stderr

    with pytest.raises(DomainError):
        supremum.sample_subordinate_sup(1.0, SupSampleConfig(n_steps=1, paths=10, seed=1, bridge_correction=False))


def test_coupled_sups_dominance():
    """Test that the subordinate supremum dominates the skeleton supremum path by path."""
    cfg = SupSampleConfig(n_steps=8, paths=2_000, seed=3)
    sups = supremum.sample_coupled_sups(1.5, cfg)
    assert np.all(sups.subordinate >= sups.stable - 1e-12)
    assert np.all(sups.stable >= sups.stable_half)
    assert np.all(sups.stable >= np.maximum(sups.endpoint, 0.0))


def test_sampling_independent_of_workers(monkeypatch):
    """Test that the block layout, not the worker count, fixes the draws."""
    monkeypatch.setattr(config, "BLOCK_CELLS", 256)
    cfg = SupSampleConfig(n_steps=4, paths=500, seed=9)
    serial = supremum.sample_subordinate_sup(1.5, cfg, workers=1)
    parallel = supremum.sample_subordinate_sup(1.5, cfg, workers=2)
    np.testing.assert_array_equal(serial, parallel)


def test_mean_stable_sup():
    cfg = SupSampleConfig(n_steps=16, paths=5_000, seed=5)
    mean = supremum.mean_stable_sup(1.5, cfg)
    assert mean.estimate > 0
    assert mean.stderr > 0
    assert mean.bias_diag <= 0
    estimate, stderr = mean
    assert (estimate, stderr) == (mean.estimate, mean.stderr)

    with pytest.raises(DomainError):
        supremum.mean_stable_sup(1.0, cfg)


def test_mc_tail_table():
    """Test an empirical table on exponential samples."""
    samples = np.random.default_rng(0).exponential(size=100_000)
    table = supremum.mc_tail_table(samples, name="exp")
    assert table.method == TailMethod.MONTE_CARLO_TABLE
    assert table(0.0) == 1.0
    assert table(1.0) == pytest.approx(math.exp(-1.0), abs=0.01)
    assert table.stderr(1.0) > 0

    with pytest.raises(TailDomainError):
        table(1e3)

    extended = supremum.mc_tail_table(samples, asymptote=lambda u: math.exp(-u))
    assert extended(1e3) == pytest.approx(0.0, abs=1e-300)

    with pytest.raises(DomainError):
        supremum.mc_tail_table(samples[:5])


def test_stable_sup_tail():
    assert supremum.stable_sup_tail(1.0).method == TailMethod.QUADRATURE
    with pytest.raises(DomainError):
        supremum.stable_sup_tail(1.5)


def test_bm_sup_tail_direct():
    """Test the bridge maximum sampler on plain Brownian motion."""
    cfg = SupSampleConfig(n_steps=4, paths=40_000, seed=13)
    estimate, stderr, exact = supremum.bm_sup_tail_direct(2.0, 1.5, cfg)
    assert exact == pytest.approx(math.erfc(1.5 / (2.0 * math.sqrt(2.0))))
    assert abs(estimate - exact) <= 4.0 * stderr


@pytest.mark.parametrize("make_tail", [
    supremum.bm_sup_tail,
    supremum.cauchy_sup_tail,
    lambda: supremum.skbm_sup_tail(1.0),
    lambda: supremum.skbm_sup_tail(1.5),
    lambda: supremum.stable_sup_tail(1.5, SupSampleConfig(n_steps=8, paths=5_000, seed=41)),
], ids=["bm", "cauchy", "skbm-arctan", "skbm-quadrature", "stable-table"])
def test_tails_non_increasing(make_tail):
    """Test P(M > u1) >= P(M > u2) on random pairs u1 < u2."""
    tail = make_tail()
    pairs = np.sort(np.random.default_rng(8).uniform(0.0, 12.0, size=(15, 2)), axis=1)
    for lo, hi in pairs:
        assert tail(lo) >= tail(hi) - 1e-9
    assert tail(0.0) == pytest.approx(1.0, abs=1e-6)
