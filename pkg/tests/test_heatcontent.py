"""
Tests for heat content: eigenvalue series, Monte Carlo and the reduction identity.
"""

import math
import numpy as np
import pytest

import config
from heatlab import heatcontent
from heatlab.state import DomainError, Interval, McConfig, ProcessKind, Provenance
from heatlab.supremum import cauchy_sup_tail

UNIT = Interval(a=0.0, b=1.0)


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_series_near_zero(alpha):
    """Test Q~(t) -> |D| as t -> 0."""
    assert heatcontent.sk_series(alpha, UNIT, 1e-12) == pytest.approx(1.0, abs=1e-9)


def test_series_brownian_limit():
    """Test alpha = 2 against the Brownian defect 4 sqrt(t / pi)."""
    t = 1e-6
    defect = heatcontent.sk_defect_series(2.0, UNIT, t)
    assert defect == pytest.approx(4.0 * math.sqrt(t / math.pi), rel=1e-6)


def test_series_large_time():
    """Test that the first eigenvalue dominates for large t."""
    t = 1.0
    leading = 8.0 / math.pi ** 2 * math.exp(-t * math.pi ** 1.5)
    assert heatcontent.sk_series(1.5, UNIT, t) == pytest.approx(leading, rel=1e-9)


def test_series_truncation():
    """Test a truncated sum against the full sum and its bound."""
    full = heatcontent.sk_series(1.5, UNIT, 0.1)
    truncated = heatcontent.sk_series(1.5, UNIT, 0.1, n_terms=2001)
    assert abs(truncated - full) <= heatcontent.sk_truncation_bound(UNIT, 2001)
    assert truncated == pytest.approx(full, abs=1e-10)


def test_series_scaling():
    """Test Q~ for an interval of length L against the unit interval."""
    wide = Interval(a=-1.0, b=1.0)
    t = 0.05
    # Q~_L(t) = L Q~_1(t / L^alpha)
    assert heatcontent.sk_series(1.5, wide, t) == pytest.approx(
        2.0 * heatcontent.sk_series(1.5, UNIT, t / 2.0 ** 1.5), rel=1e-12
    )


def test_series_errors():
    with pytest.raises(DomainError):
        heatcontent.sk_series(1.5, UNIT, 0.0)
    with pytest.raises(DomainError):
        heatcontent.sk_series(2.5, UNIT, 0.1)
    with pytest.raises(DomainError):
        heatcontent.sk_series(1.5, UNIT, 0.1, n_terms=0)


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_coupled_mc(alpha):
    """Test dominance, ordering and agreement with the series."""
    cfg = McConfig(paths=4_000, n_steps=16, seed=config.DEFAULT_SEED)
    coupled = heatcontent.coupled_mc(alpha, UNIT, 0.01, cfg)
    assert coupled.dominance_violations == 0
    assert coupled.sk.estimate <= coupled.ks.estimate
    assert coupled.strictness >= 0
    assert 0.0 <= coupled.sk.estimate <= 1.0

    exact = heatcontent.sk_series(alpha, UNIT, 0.01)
    assert abs(coupled.sk.estimate - exact) <= 4.0 * coupled.sk.stderr
    assert coupled.to_dict()["paths"] == 4_000


def test_coupled_mc_reproducible(monkeypatch):
    """Test that the seed alone fixes the estimate, whatever the worker count."""
    monkeypatch.setattr(config, "BLOCK_CELLS", 512)
    cfg = McConfig(paths=600, n_steps=8, seed=21)
    serial = heatcontent.coupled_mc(1.5, UNIT, 0.05, cfg, workers=1)
    parallel = heatcontent.coupled_mc(1.5, UNIT, 0.05, cfg, workers=2)
    assert serial.to_dict() == parallel.to_dict()


def test_crossing_mc():
    cfg = McConfig(paths=4_000, n_steps=16, seed=2)
    ks = heatcontent.crossing_mc(ProcessKind.KILLED_SUBORDINATE, 1.5, UNIT, 0.1, cfg)
    sk = heatcontent.crossing_mc(ProcessKind.SUBORDINATE_KILLED, 1.5, UNIT, 0.1, cfg)
    assert ks.estimate >= 0
    assert sk.estimate >= 0
    # the bridges see every crossing the skeleton sees
    assert sk.estimate >= ks.estimate - 1e-12


def test_ks_reduction():
    """Test the reduction bracket at alpha = 1 with the quadrature tail."""
    tail = cauchy_sup_tail()
    bracket = heatcontent.ks_reduction(1.0, UNIT, 1e-3, tail, crossing_const=1.0)
    assert bracket.main_term > 0
    assert bracket.crossing_bound == pytest.approx(1e-6 * math.log(1e3))
    assert bracket.main_term == pytest.approx(2e-3 * tail.integrate(0.0, 1e3))


def test_heat_curve_provenance():
    """Test which curves exist for which process."""
    series = heatcontent.heat_curve(ProcessKind.SUBORDINATE_KILLED, 1.5, UNIT, [1e-3, 1e-2], Provenance.SERIES)
    assert series.times() == [1e-3, 1e-2]
    assert series.points[0].value > series.points[1].value

    quadrature = heatcontent.heat_curve(
        ProcessKind.KILLED_SUBORDINATE, 1.0, UNIT, [1e-4, 1e-3, 1e-2], Provenance.QUADRATURE,
        tail=cauchy_sup_tail(), crossing_const=1.0
    )
    values = quadrature.values_list()
    assert all(0.0 <= v <= 1.0 for v in values)
    assert values == sorted(values, reverse=True)

    with pytest.raises(DomainError):
        heatcontent.heat_curve(ProcessKind.KILLED_SUBORDINATE, 1.5, UNIT, [1e-3], Provenance.SERIES)
    with pytest.raises(DomainError):
        heatcontent.heat_curve(ProcessKind.SUBORDINATE_KILLED, 1.5, UNIT, [1e-3], Provenance.QUADRATURE)
    with pytest.raises(DomainError):
        heatcontent.heat_curve(ProcessKind.SUBORDINATE_KILLED, 1.5, UNIT, [1e-3], Provenance.MONTE_CARLO)


def test_loglog_slope():
    assert heatcontent.loglog_slope([1.0, 10.0, 100.0], [3.0, 30.0, 300.0]) == pytest.approx(1.0)
    assert heatcontent.loglog_slope([1e-3, 1e-2], [1e-6, 1e-4]) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        heatcontent.loglog_slope([1.0, 2.0], [0.0, 1.0])


def test_lemma_exit_probability():
    """Test the Monte Carlo exit probability against the stable law."""
    cfg = McConfig(paths=20_000, n_steps=1, seed=17)
    (row,) = heatcontent.lemma_exit_probability(1.5, UNIT, [0.1], cfg)
    assert 0.0 < row["exact"] < 1.0
    assert abs(row["estimate"] - row["exact"]) <= 4.0 * row["stderr"] + 1e-3


@pytest.mark.parametrize("alpha", [0.7, 1.0, 1.5])
@pytest.mark.parametrize("c", [0.5, 3.0, 10.0])
def test_series_scale_invariance(alpha, c):
    """Test Q~ on cD at time c^alpha t against c Q~ on D at time t."""
    t = 0.01
    scaled = heatcontent.sk_series(alpha, Interval(a=0.0, b=c), c ** alpha * t)
    assert scaled == pytest.approx(c * heatcontent.sk_series(alpha, UNIT, t), rel=1e-12)


def test_sk_mc_ragged_strata_unbiased():
    """Test that strata holding unequal path counts still average to the series value."""
    exact = heatcontent.sk_series(1.0, UNIT, 0.2)
    estimates = np.array([
        heatcontent.sk_mc(1.0, UNIT, 0.2, McConfig(paths=5, n_steps=4, x_strata=4, seed=seed)).estimate
        for seed in range(2000)
    ])
    spread = estimates.std(ddof=1) / math.sqrt(estimates.size)
    assert abs(estimates.mean() - exact) <= 4.0 * spread


@pytest.mark.parametrize("x_strata", [1, 4, 7, 64])
def test_pair_weights_cover_interval(x_strata):
    assert heatcontent._pair_weights(x_strata).sum() == pytest.approx(1.0, abs=1e-15)


def test_coupled_mc_single_path():
    coupled = heatcontent.coupled_mc(1.5, UNIT, 0.05, McConfig(paths=1, n_steps=4, seed=5))
    assert coupled.paths == 1
    assert coupled.sk.stderr == 0.0
    assert 0.0 <= coupled.sk.estimate <= 1.0


def test_coupled_mc_translation_invariant():
    cfg = McConfig(paths=500, n_steps=8, seed=12)
    base = heatcontent.coupled_mc(1.5, UNIT, 0.05, cfg)
    moved = heatcontent.coupled_mc(1.5, Interval(a=5.0, b=6.0), 0.05, cfg)
    assert moved.to_dict() == base.to_dict()


def test_block_cells_travel_with_config(monkeypatch):
    """Test that a recorded block size fixes the draws whatever the environment says."""
    cfg = McConfig(paths=300, n_steps=8, seed=4, block_cells=64)
    monkeypatch.setattr(config, "BLOCK_CELLS", 64)
    first = heatcontent.coupled_mc(1.5, UNIT, 0.05, cfg).to_dict()

    monkeypatch.setattr(config, "BLOCK_CELLS", 10 ** 6)
    assert heatcontent.coupled_mc(1.5, UNIT, 0.05, cfg).to_dict() == first
    unpinned = McConfig(paths=300, n_steps=8, seed=4)
    assert heatcontent.coupled_mc(1.5, UNIT, 0.05, unpinned).to_dict() != first


def test_crossing_constant_cached():
    heatcontent._crossing_constant.cache_clear()
    cfg = McConfig(paths=400, n_steps=4, seed=9)
    first = heatcontent.crossing_constant(1.5, UNIT, cfg)
    # only the length of D enters
    assert heatcontent.crossing_constant(1.5, Interval(a=5.0, b=6.0), cfg) == first

    info = heatcontent._crossing_constant.cache_info()
    assert (info.hits, info.misses) == (1, 1)
    assert info.maxsize == 64
