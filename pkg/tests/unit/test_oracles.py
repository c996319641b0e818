import math

import numpy as np
import pytest

from simulation.models import PeriodicMAModel
from spectra.core import BifrequencyPoint, InvalidArgumentError, TimeSeries
from spectra.estimators import smoothed_bispectral
from spectra.windows import DEFAULT_WINDOW, LagWindowSpec
from testkit import oracles
from testkit.oracles import OracleReport

PI = math.pi


def test_report_tolerances():
    """Test pass/fail logic of oracle reports."""
    r = OracleReport.compare("x", 1.0, 1.05, rel_tol=0.1)
    assert r.passed
    assert r.rel_dev == pytest.approx(0.05)
    assert not OracleReport.compare("x", 1.0, 1.5, rel_tol=0.1, abs_tol=0.2).passed
    assert OracleReport.compare("x", 0.0, 1e-13, abs_tol=1e-12).passed
    assert not OracleReport.compare("x", 0.0, 1e-13, rel_tol=0.5).passed
    with pytest.raises(InvalidArgumentError):
        OracleReport.compare("x", 1.0, 1.0)
    assert "PASS" in str(r)
    assert r.to_dict()["quantity"] == "x"


def test_brute_force_alternating_series():
    """Test the literal double sum on [1, -1, 1, -1]."""
    x = TimeSeries(np.array([1.0, -1.0, 1.0, -1.0]))
    g = oracles.brute_force_G(x, DEFAULT_WINDOW, 1, BifrequencyPoint.of(PI, PI))
    assert g.real == pytest.approx(5.0 / (4.0 * PI))
    with pytest.raises(InvalidArgumentError):
        big = TimeSeries(np.zeros(5000))
        oracles.brute_force_G(big, DEFAULT_WINDOW, 2, BifrequencyPoint.of(1, 2))


def test_brute_force_matches_lag_sum():
    """Test the production estimator against the literal double sum."""
    rng = np.random.default_rng(21)
    x = TimeSeries(rng.standard_normal(40), start_index=9)
    w = LagWindowSpec.trapezoid(0.4)
    p = BifrequencyPoint.of(0.8, 3.7)
    expected = oracles.brute_force_G(x, w, 7, p)
    got = smoothed_bispectral(x, w, 7, p).value
    assert abs(got - expected) <= 1e-10 * max(1.0, abs(expected))


def test_window_convolution_matches_lag_sum():
    """Test the convolution form used by the Monte Carlo oracle."""
    rng = np.random.default_rng(22)
    x = TimeSeries(rng.standard_normal(50), start_index=4)
    L = 5
    h = np.ones(2 * L + 1)
    p = BifrequencyPoint.of(1.2, 2.9)
    got = oracles._window_convolution_G(
        x.samples, x.times.astype(float), h, L, p.nu.value, p.omega.value
    )
    expected = smoothed_bispectral(x, DEFAULT_WINDOW, L, p).value
    assert abs(got - expected) <= 1e-10 * max(1.0, abs(expected))


def test_mc_covariance_white_noise():
    """Test the simulated covariance of white noise against 1 / (2 pi^2)."""
    p = BifrequencyPoint.of(PI / 2, PI / 3)
    mc = oracles.mc_covariance(PeriodicMAModel.white(), 512, 4, p, p, 200, seed=1)
    expected = 1.0 / (2.0 * PI**2)
    assert mc.replicates == 200
    assert mc.cov.real == pytest.approx(expected, rel=0.3)
    assert mc.as_matrix().shape == (2, 2)


def test_mc_covariance_thread_independent():
    """Test that threads do not change Monte Carlo results."""
    p = BifrequencyPoint.of(1.0, 2.0)
    a = oracles.mc_covariance(PeriodicMAModel.white(), 64, 2, p, p, 100, seed=3, threads=1)
    b = oracles.mc_covariance(PeriodicMAModel.white(), 64, 2, p, p, 100, seed=3, threads=4)
    assert a == b


def test_mc_covariance_argument_checks():
    """Test replicate and bandwidth checks."""
    p = BifrequencyPoint.of(1.0, 2.0)
    with pytest.raises(InvalidArgumentError):
        oracles.mc_covariance(PeriodicMAModel.white(), 64, 2, p, p, 10, seed=0)
    with pytest.raises(InvalidArgumentError):
        oracles.mc_covariance(PeriodicMAModel.white(), 64, 64, p, p, 100, seed=0)


def test_ks_distance():
    """Test the two-sample Kolmogorov statistic."""
    assert oracles.ks_distance(np.arange(1000), np.arange(1, 1001)) == pytest.approx(0.001)
    assert oracles.ks_distance(np.zeros(3), np.ones(3)) == 1.0
    with pytest.raises(InvalidArgumentError):
        oracles.ks_distance(np.array([]), np.ones(3))
