import math

import numpy as np
import pytest

from inference import subsampling
from inference.params import SubsamplingParams
from inference.subsampling import EmpiricalDistribution
from spectra.core import (
    BifrequencyPoint,
    DegenerateDenominatorError,
    InvalidArgumentError,
    TimeSeries,
)
from spectra.estimators import MeanSpec, smoothed_bispectral
from spectra.windows import DEFAULT_WINDOW, LagWindowSpec

PI = math.pi
P_OFF = BifrequencyPoint.of(PI / 2, PI / 3)


def _white(n, seed):
    return TimeSeries(np.random.default_rng(seed).standard_normal(n))


def test_empirical_distribution():
    """Test sorting, CDF and shifting."""
    d = EmpiricalDistribution(np.array([3.0, 1.0, 2.0, 2.0]), b=10, L_b=2)
    assert list(d.values) == [1.0, 2.0, 2.0, 3.0]
    assert d.cdf(0.5) == 0.0
    assert d.cdf(2.0) == 0.75
    assert d.cdf(10.0) == 1.0
    assert list(d.shifted(1.0).values) == [2.0, 3.0, 3.0, 4.0]
    with pytest.raises(InvalidArgumentError):
        EmpiricalDistribution(np.array([]), b=10, L_b=2)


def test_quantile_convention():
    """Test the smallest order statistic reaching the level."""
    d = EmpiricalDistribution(np.array([4.0, 1.0, 3.0, 2.0]), b=10, L_b=2)
    assert subsampling.quantile(d, 0.5) == 2.0
    assert subsampling.quantile(d, 0.99) == 4.0
    assert subsampling.quantile(d, 0.25) == 1.0
    assert subsampling.quantile(d, 0.75) == 3.0
    assert subsampling.quantile(d, 0.01) == 1.0
    single = EmpiricalDistribution(np.array([7.0]), b=10, L_b=2)
    for level in (0.01, 0.5, 0.99):
        assert subsampling.quantile(single, level) == 7.0


def test_quantile_shift_equivariance():
    """Test that shifting every value shifts every quantile."""
    rng = np.random.default_rng(0)
    d = EmpiricalDistribution(rng.standard_normal(57), b=10, L_b=2)
    for level in (0.05, 0.5, 0.975):
        assert subsampling.quantile(d.shifted(2.5), level) == pytest.approx(
            subsampling.quantile(d, level) + 2.5
        )


def test_subsample_distribution_zero_series():
    """Test that a zero series gives an all-zero distribution."""
    x = TimeSeries(np.zeros(64))
    params = SubsamplingParams(b=24, L_n=2, L_b=2)
    d = subsampling.subsample_distribution_P(x, DEFAULT_WINDOW, params, P_OFF)
    assert len(d) == 41
    assert np.all(d.values == 0.0)


def test_subsample_distribution_matches_direct_sum():
    """Test the sliding block values against a literal per-block evaluation."""
    x = _white(60, 1)
    w = LagWindowSpec.trapezoid(0.5)
    params = SubsamplingParams(b=20, L_n=3, L_b=2)
    d = subsampling.subsample_distribution_P(x, w, params, P_OFF)

    full = abs(smoothed_bispectral(x, w, 3, P_OFF).value)
    direct = np.sort(
        [
            math.sqrt(20 / 2) * (abs(smoothed_bispectral(x.block(o, 20), w, 2, P_OFF).value) - full)
            for o in range(41)
        ]
    )
    assert np.allclose(d.values, direct, rtol=1e-9, atol=1e-12)
    for v in (-1.0, 0.0, 0.5):
        assert d.cdf(v) == pytest.approx(np.mean(direct <= v))


def test_subsample_distribution_checks_params():
    """Test that too few blocks are rejected."""
    x = _white(30, 2)
    with pytest.raises(InvalidArgumentError):
        subsampling.subsample_distribution_P(
            x, DEFAULT_WINDOW, SubsamplingParams(b=25, L_n=2, L_b=2), P_OFF
        )


def test_subsample_distribution_with_mean():
    """Test that a constant level is removed block by block."""
    x = TimeSeries(np.full(64, 5.0))
    params = SubsamplingParams(b=24, L_n=2, L_b=2)
    p = BifrequencyPoint.of(2 * PI, 2 * PI)
    plain = subsampling.subsample_distribution_P(x, DEFAULT_WINDOW, params, p)
    demeaned = subsampling.subsample_distribution_P(
        x, DEFAULT_WINDOW, params, p, mean=MeanSpec.of([0.0])
    )
    assert np.max(np.abs(plain.values)) > 1.0
    assert np.max(np.abs(demeaned.values)) < 1e-9


def test_subsample_distribution_gamma_errors():
    """Test the coherence distribution preconditions."""
    params = SubsamplingParams(b=24, L_n=2, L_b=2)
    with pytest.raises(InvalidArgumentError):
        subsampling.subsample_distribution_gamma(
            _white(64, 3), DEFAULT_WINDOW, params, BifrequencyPoint.of(1.0, 1.0)
        )
    with pytest.raises(DegenerateDenominatorError):
        subsampling.subsample_distribution_gamma(
            TimeSeries(np.zeros(64)), DEFAULT_WINDOW, params, P_OFF
        )


def test_subsample_distribution_gamma_excludes_degenerate_blocks():
    """Test block exclusion below and above the 1% limit."""
    rng = np.random.default_rng(4)
    params = SubsamplingParams(b=20, L_n=2, L_b=2)

    x = np.concatenate([rng.standard_normal(180), np.zeros(20)])
    d = subsampling.subsample_distribution_gamma(TimeSeries(x), DEFAULT_WINDOW, params, P_OFF)
    assert d.excluded == 1
    assert len(d) == 180

    y = np.concatenate([rng.standard_normal(80), np.zeros(20)])
    with pytest.raises(DegenerateDenominatorError):
        subsampling.subsample_distribution_gamma(TimeSeries(y), DEFAULT_WINDOW, params, P_OFF)


def test_interval_construction():
    """Test equal-tailed bounds and clamping."""
    ci = subsampling._interval(1.0, 0.5, -0.5, 1.0, 0.95, None, "subsampling")
    assert (ci.lo, ci.hi) == (0.5, 1.5)
    assert ci.lo + ci.hi == pytest.approx(2 * ci.estimate)
    assert not ci.clamped_lo and not ci.clamped_hi

    ci = subsampling._interval(0.1, 0.5, -0.5, 1.0, 0.95, None, "subsampling")
    assert ci.lo == 0.0 and ci.clamped_lo

    ci = subsampling._interval(0.9, 0.5, -0.5, 1.0, 0.95, 1.0, "subsampling")
    assert ci.hi == 1.0 and ci.clamped_hi
    assert ci.contains(0.9)


def test_ci_magnitude_P_zero_series():
    """Test that a degenerate distribution gives a point interval."""
    x = TimeSeries(np.zeros(64))
    params = SubsamplingParams(b=24, L_n=2, L_b=2)
    ci = subsampling.ci_magnitude_P(x, DEFAULT_WINDOW, params, P_OFF, 0.95)
    assert (ci.lo, ci.hi, ci.estimate) == (0.0, 0.0, 0.0)
    assert not ci.clamped_lo
    with pytest.raises(InvalidArgumentError):
        subsampling.ci_magnitude_P(x, DEFAULT_WINDOW, params, P_OFF, 1.0)


def test_ci_magnitude_P_brackets_estimate():
    """Test interval ordering on a white-noise sample."""
    x = _white(400, 5)
    params = SubsamplingParams(b=60, L_n=3, L_b=2)
    ci = subsampling.ci_magnitude_P(x, DEFAULT_WINDOW, params, P_OFF, 0.9)
    assert 0.0 <= ci.lo <= ci.hi
    assert ci.estimate == pytest.approx(abs(smoothed_bispectral(x, DEFAULT_WINDOW, 3, P_OFF).value))
    assert ci.method == "subsampling"


def test_ci_coherence_range():
    """Test that coherence intervals stay inside [0, 1]."""
    x = _white(400, 6)
    params = SubsamplingParams(b=60, L_n=3, L_b=2)
    ci = subsampling.ci_coherence(x, DEFAULT_WINDOW, params, P_OFF, 0.95)
    assert 0.0 <= ci.lo <= ci.hi <= 1.0


def test_ci_asymptotic_is_symmetric():
    """Test the plug-in normal interval around the estimate."""
    x = _white(400, 7)
    params = SubsamplingParams(b=60, L_n=3, L_b=2)
    ci = subsampling.ci_magnitude_P_asymptotic(
        x, DEFAULT_WINDOW, params, P_OFF, 0.95, rng=np.random.default_rng(0)
    )
    assert ci.method == "asymptotic"
    assert ci.lo <= ci.estimate <= ci.hi
    if not ci.clamped_lo:
        assert ci.hi - ci.estimate == pytest.approx(ci.estimate - ci.lo)
