"""
Tests for the one-sided stable subordinator.
"""

import math
import numpy as np
import pytest
from scipy import integrate, special

from heatlab import subordinator
from heatlab.state import DensityEvalConfig, DensityMethod, DomainError, SeriesDivergenceError
from tools import substream


def levy_density(x, t=1.0):
    """Density of S_t at alpha = 1, where S is the 1/2-stable subordinator."""
    return t * x ** -1.5 * np.exp(-t * t / (4.0 * x)) / (2.0 * math.sqrt(math.pi))


@pytest.mark.parametrize("x", [0.5, 1.0, 5.0, 50.0])
def test_density_matches_levy_law(x):
    """Test the series against the closed form at alpha = 1."""
    assert subordinator.density(1.0, x) == pytest.approx(levy_density(x), rel=1e-8)


def test_density_at_one():
    assert subordinator.density(1.0, 1.0) == pytest.approx(0.219695, abs=1e-6)


def test_density_uses_tail_beyond_crossover():
    """Test the crossover calibration and the tail representation."""
    x_cross = subordinator.crossover(1.0)
    assert 1e4 < x_cross < 1e7

    result = subordinator.density_value(1.0, 10.0 * x_cross)
    assert result.method == DensityMethod.TAIL
    assert result.value == pytest.approx(levy_density(10.0 * x_cross), rel=1e-6)

    fixed = DensityEvalConfig(crossover=100.0)
    assert subordinator.density_value(1.0, 200.0, fixed).method == DensityMethod.TAIL


def test_small_x_fallback():
    """Test the Kanter integral where the series diverges."""
    result = subordinator.density_value(1.0, 0.01)
    assert result.method == DensityMethod.KANTER_INTEGRAL
    assert result.low_accuracy
    assert result.value == pytest.approx(levy_density(0.01), rel=1e-3)

    strict = DensityEvalConfig(small_x_fallback=False)
    with pytest.raises(SeriesDivergenceError) as excinfo:
        subordinator.density_value(1.0, 0.01, strict)
    assert excinfo.value.smallest_usable_x > 0.01
    assert subordinator.smallest_usable_x(1.0) == pytest.approx(excinfo.value.smallest_usable_x)


def test_density_errors():
    with pytest.raises(DomainError):
        subordinator.density(1.0, 0.0)
    with pytest.raises(DomainError):
        subordinator.density(2.5, 1.0)
    with pytest.raises(DomainError):
        subordinator.density_scaled(1.0, 0.0, 1.0)


def test_density_scaled():
    """Test g_t(x) = t^{-2/alpha} g_1(x t^{-2/alpha})."""
    assert subordinator.density_scaled(1.0, 2.0, 3.0) == pytest.approx(levy_density(3.0, t=2.0), rel=1e-8)


def test_tail_constant():
    assert subordinator.tail_constant(1.0) == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi)))


def test_cdf():
    """Test the Kanter cdf against P(S_1 <= x) = erfc(1 / (2 sqrt(x)))."""
    for x in (0.1, 1.0, 10.0):
        assert subordinator.cdf(1.0, x) == pytest.approx(special.erfc(0.5 / math.sqrt(x)), rel=1e-7)
    assert subordinator.cdf(1.5, 0.0) == 0.0


def test_sample_distribution():
    """Test Kanter sampling against the exact cdf at alpha = 1."""
    draws = subordinator.sample(1.0, 1.0, substream(7, 0), size=200_000)
    assert np.all(draws > 0)
    p = float(np.mean(draws <= 1.0))
    exact = special.erfc(0.5)
    assert abs(p - exact) <= 4.0 * math.sqrt(exact * (1 - exact) / draws.size)


def test_sample_scaling():
    """Test S_t = t^{2/alpha} S_1 draw by draw."""
    base = subordinator.sample(1.5, 1.0, substream(11, 3), size=16)
    scaled = subordinator.sample(1.5, 4.0, substream(11, 3), size=16)
    np.testing.assert_allclose(scaled, 4.0 ** (2.0 / 1.5) * base, rtol=1e-12)

    increments = subordinator.sample_increments(1.5, 1.0, 8, substream(11, 3))
    assert increments.shape == (8,)
    with pytest.raises(DomainError):
        subordinator.sample(1.5, 0.0, substream(11, 3))


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_density_normalized(alpha):
    """Test that cdf below the series range, quadrature and the tail mass add up to one."""
    rho = alpha / 2.0
    x_lo = subordinator.smallest_usable_x(alpha)
    x_hi = subordinator.crossover(alpha)
    body, _ = integrate.quad(
        lambda s: subordinator.density(alpha, math.exp(s)) * math.exp(s),
        math.log(x_lo), math.log(x_hi), epsabs=1e-11, epsrel=1e-10, limit=400
    )
    tail = subordinator.tail_constant(alpha) * x_hi ** -rho / rho
    assert subordinator.cdf(alpha, x_lo) + body + tail == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_series_meets_tail_at_crossover(alpha):
    x = subordinator.crossover(alpha)
    series_only = DensityEvalConfig(crossover=math.inf)
    series = subordinator.density_value(alpha, x, series_only)
    assert series.method == DensityMethod.SERIES
    tail = subordinator.tail_constant(alpha) * x ** (-1.0 - alpha / 2.0)
    assert abs(series.value - tail) / tail <= 1e-3


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_small_time_jumps_follow_levy_density(alpha):
    """Test (1/h) P(S_h > 1) against the Levy tail 1 / Gamma(1 - alpha/2)."""
    h = 1e-2
    draws = subordinator.sample(alpha, h, substream(29, 0), size=1_000_000)
    rate = float(np.mean(draws > 1.0)) / h
    assert rate == pytest.approx(1.0 / special.gamma(1.0 - alpha / 2.0), rel=0.1)


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_sample_histogram_matches_density(alpha):
    """Test binned Kanter draws against the density integrated over each bin."""
    draws = subordinator.sample(alpha, 1.0, substream(31, 1), size=1_000_000)
    edges = np.geomspace(*np.quantile(draws, [0.01, 0.99]), 51)
    counts, _ = np.histogram(draws, bins=edges)
    for lo, hi, observed in zip(edges, edges[1:], counts):
        p, _ = integrate.quad(lambda x: subordinator.density(alpha, x), lo, hi, epsabs=1e-12, limit=200)
        expected = draws.size * p
        assert abs(observed - expected) <= 4.0 * math.sqrt(expected * (1.0 - p)) + 1.0
