import math

import numpy as np
import pytest
from scipy import stats

from simulation.models import PeriodicMAModel, spectral_truth
from spectra import asymptotics
from spectra.asymptotics import Cov2, Cov4, FoldedBivariateNormal, Normal, SpectralTruth
from spectra.core import BifrequencyPoint, InvalidArgumentError, NonPSDError

PI = math.pi
WHITE = spectral_truth(PeriodicMAModel.white())
OFF = BifrequencyPoint.of(PI / 2, PI / 3)


def test_white_noise_kernel():
    """Test the covariance kernel of white noise on the diagonal."""
    d = BifrequencyPoint.of(PI / 2, PI / 2)
    k = asymptotics.complex_cov_kernel(WHITE, 2.0, d, d)
    assert k.real == pytest.approx(1.0 / (2.0 * PI**2), rel=1e-12)
    assert k.imag == 0.0


def test_zero_truth_gives_zero_covariances():
    """Test that the zero process has zero kernel, Sigma and Psi."""
    zero = asymptotics.ZeroTruth()
    assert asymptotics.complex_cov_kernel(zero, 2.0, OFF, OFF) == 0
    assert asymptotics.sigma_matrix(zero, OFF) == Cov2.zero()
    assert np.all(asymptotics.psi_matrix(zero, OFF).as_array() == 0.0)


def test_white_noise_sigma_off_support():
    """Test Sigma of white noise away from the diagonal."""
    s = asymptotics.sigma_matrix(WHITE, OFF, "kernel_derived", 2.0)
    assert s.s11 == pytest.approx(1.0 / (4.0 * PI**2), rel=1e-12)
    assert s.s22 == pytest.approx(1.0 / (4.0 * PI**2), rel=1e-12)
    assert s.s12 == pytest.approx(0.0, abs=1e-15)


def test_sigma_variants_differ_by_rho_for_white_noise():
    """Test that the published entries lack the rho factor."""
    kernel = asymptotics.sigma_matrix(WHITE, OFF, "kernel_derived", 2.0)
    printed = asymptotics.sigma_matrix(WHITE, OFF, "as_printed")
    assert printed.s11 == pytest.approx(1.0 / (8.0 * PI**2), rel=1e-12)
    assert kernel.s11 == pytest.approx(2.0 * printed.s11, rel=1e-12)
    with pytest.raises(InvalidArgumentError):
        asymptotics.sigma_matrix(WHITE, OFF, "bogus")  # type: ignore[arg-type]


def test_sigma_scales_with_rho():
    """Test linearity of the kernel Sigma in rho."""
    truth = spectral_truth(PeriodicMAModel.pma1(4))
    p = BifrequencyPoint.of(PI / 2, PI)
    a = asymptotics.sigma_matrix(truth, p, rho=2.0).as_array()
    b = asymptotics.sigma_matrix(truth, p, rho=4.0 / 3.0).as_array()
    assert np.allclose(b, a * (2.0 / 3.0), rtol=1e-12, atol=1e-15)


def test_white_noise_psi():
    """Test Psi of white noise: Var(Re G(nu, nu)) = 2 / (4 pi^2)."""
    psi = asymptotics.psi_matrix(WHITE, OFF, 2.0)
    sigma = asymptotics.sigma_matrix(WHITE, OFF, rho=2.0)
    assert psi[1, 1] == pytest.approx(2.0 / (4.0 * PI**2), rel=1e-12)
    assert psi[2, 2] == pytest.approx(2.0 / (4.0 * PI**2), rel=1e-12)
    assert psi[0, 0] == pytest.approx(sigma.s11, rel=1e-12)
    assert psi[3, 3] == pytest.approx(sigma.s22, rel=1e-12)
    assert psi[0, 3] == pytest.approx(sigma.s12, abs=1e-15)


def test_psi_is_symmetric_and_psd():
    """Test Psi symmetry and positive semidefiniteness for a PMA(1) model."""
    truth = spectral_truth(PeriodicMAModel.pma1(4))
    for p in (BifrequencyPoint.of(PI / 3, PI / 3 - PI / 2), BifrequencyPoint.of(1.0, 1.0 + PI)):
        m = asymptotics.psi_matrix(truth, p).as_array()
        assert np.allclose(m, m.T)
        assert np.linalg.eigvalsh(m).min() > -1e-10


def test_cov4_layout():
    """Test the row-major lower-triangle storage of Cov4."""
    a = np.arange(16, dtype=float).reshape(4, 4)
    a = a + a.T
    c = Cov4.from_array(a)
    assert c.entries[:3] == (a[0, 0], a[1, 0], a[1, 1])
    assert c[0, 3] == c[3, 0] == a[3, 0]
    assert np.array_equal(c.as_array(), a)
    with pytest.raises(InvalidArgumentError):
        Cov4((1.0, 2.0))


def test_d1_gradient():
    """Test the gradient of |P|."""
    assert np.allclose(asymptotics.d1_gradient(1 + 0j), [1.0, 0.0])
    assert np.allclose(asymptotics.d1_gradient(3 + 4j), [0.6, 0.8])
    assert asymptotics.delta_method_variance(asymptotics.d1_gradient(3 + 4j), np.eye(2)) == (
        pytest.approx(1.0)
    )
    with pytest.raises(InvalidArgumentError):
        asymptotics.d1_gradient(0j)


def test_d2_gradient():
    """Test the coherence gradient."""
    assert np.allclose(asymptotics.d2_gradient(1 + 0j, 1.0, 1.0), [1.0, -0.5, -0.5, 0.0])
    assert np.allclose(asymptotics.d2_gradient(1j, 1.0, 1.0), [0.0, -0.5, -0.5, 1.0])
    assert np.allclose(
        asymptotics.d2_gradient(1 + 0j, 4.0, 1.0), [0.5, -0.0625, -0.25, 0.0]
    )
    with pytest.raises(InvalidArgumentError):
        asymptotics.d2_gradient(0j, 1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        asymptotics.d2_gradient(1 + 0j, 0.0, 1.0)


def test_delta_method_shape_check():
    """Test that mismatched gradient and covariance sizes are rejected."""
    with pytest.raises(InvalidArgumentError):
        asymptotics.delta_method_variance(np.ones(4), Cov2(1.0, 0.0, 1.0))


def test_limit_law_P_branches():
    """Test the folded law under P = 0 and the normal law otherwise."""
    law = asymptotics.limit_law_P(WHITE, 2.0, OFF)
    assert isinstance(law, FoldedBivariateNormal)
    assert law.cov.s11 == pytest.approx(1.0 / (4.0 * PI**2))

    truth = spectral_truth(PeriodicMAModel.pma1(4))
    law = asymptotics.limit_law_P(truth, 2.0, BifrequencyPoint.of(PI / 2, 3 * PI / 2))
    assert isinstance(law, Normal)
    assert law.variance > 0


def test_limit_law_gamma_branches():
    """Test the coherence law and its preconditions."""
    law = asymptotics.limit_law_gamma(WHITE, 2.0, OFF)
    assert isinstance(law, FoldedBivariateNormal)
    assert law.scale == pytest.approx(2.0 * PI)

    truth = spectral_truth(PeriodicMAModel.pma1(4))
    law = asymptotics.limit_law_gamma(truth, 2.0, BifrequencyPoint.of(PI / 2, PI))
    assert isinstance(law, Normal)

    with pytest.raises(InvalidArgumentError):
        asymptotics.limit_law_gamma(WHITE, 2.0, BifrequencyPoint.of(1.0, 1.0))
    with pytest.raises(InvalidArgumentError):
        asymptotics.limit_law_gamma(asymptotics.ZeroTruth(), 2.0, OFF)


def test_sample_limit_law_deterministic():
    """Test that sampling depends only on the generator state."""
    law = FoldedBivariateNormal(Cov2(1.0, 0.3, 2.0))
    a = asymptotics.sample_limit_law(law, np.random.default_rng(42), 1000)
    b = asymptotics.sample_limit_law(law, np.random.default_rng(42), 1000)
    assert np.array_equal(a, b)
    assert np.all(a >= 0)


def test_sample_degenerate_laws():
    """Test that zero covariances give point masses at zero."""
    rng = np.random.default_rng(0)
    assert np.all(asymptotics.sample_limit_law(Normal(0.0), rng, 10) == 0.0)
    assert np.all(asymptotics.sample_limit_law(FoldedBivariateNormal(Cov2.zero()), rng, 10) == 0.0)


def test_folded_isotropic_law_is_rayleigh():
    """Test the mean of the folded standard normal against sqrt(pi / 2)."""
    law = FoldedBivariateNormal(Cov2(1.0, 0.0, 1.0))
    draws = asymptotics.sample_limit_law(law, np.random.default_rng(1), 200_000)
    assert draws.mean() == pytest.approx(math.sqrt(PI / 2.0), abs=0.01)


def test_non_psd_covariance():
    """Test that an indefinite covariance is rejected."""
    law = FoldedBivariateNormal(Cov2(1.0, 2.0, 1.0))
    with pytest.raises(NonPSDError):
        asymptotics.sample_limit_law(law, np.random.default_rng(0), 10)
    with pytest.raises(NonPSDError):
        Normal(-1.0)


def test_law_quantile_closed_forms():
    """Test quantiles of normal and Rayleigh laws."""
    assert asymptotics.law_quantile(Normal(1.0), 0.975) == pytest.approx(1.959964, rel=1e-6)
    law = FoldedBivariateNormal(Cov2(4.0, 0.0, 4.0), scale=0.5)
    expected = 0.5 * stats.rayleigh.ppf(0.9, scale=2.0)
    assert asymptotics.law_quantile(law, 0.9) == pytest.approx(expected)
    with pytest.raises(InvalidArgumentError):
        asymptotics.law_quantile(Normal(1.0), 1.0)


def test_law_quantile_monte_carlo():
    """Test the simulated quantile of an anisotropic folded law."""
    law = FoldedBivariateNormal(Cov2(1.0, 0.0, 0.0))
    # |N(0, 1)| has median 0.6745
    q = asymptotics.law_quantile(law, 0.5, np.random.default_rng(7), m=200_000)
    assert q == pytest.approx(0.6745, abs=0.01)


def test_chi2_reference():
    """Test the chi-square(2) survival function and critical values."""
    assert asymptotics.chi2_2_sf(0.0) == 1.0
    assert asymptotics.chi2_2_sf(2.0 * math.log(100.0)) == pytest.approx(0.01)
    assert asymptotics.chi2_2_sf(2.0 * math.log(2.0)) == pytest.approx(0.5)
    assert asymptotics.chi2_2_critical(0.01) == pytest.approx(9.2103404, rel=1e-7)
    with pytest.raises(InvalidArgumentError):
        asymptotics.chi2_2_sf(-1.0)


def test_function_truth():
    """Test truths built from plain callables."""
    truth = SpectralTruth.from_functions(lambda p: 1j if not p.is_diagonal else 2.0, lambda nu: 3.0)
    assert truth.at(1.0, 2.0) == 1j
    assert truth.g0(1.0) == 3.0
    default_g0 = SpectralTruth.from_functions(lambda p: 2.0)
    assert default_g0.g0(1.0) == 2.0
