"""
Independent Oracles

Reference computations used to check the production estimators. None of them goes
through the lag-sum kernels: the brute-force estimator evaluates the double sum
literally, and the Monte Carlo covariance evaluates G_hat as a window convolution.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from simulation.models import PeriodicMAModel, simulate
from spectra.core import TWO_PI, BifrequencyPoint, InvalidArgumentError, TimeSeries
from spectra.windows import DEFAULT_WINDOW, LagWindowSpec, eval_taper

BRUTE_FORCE_MAX_N = 4096
MIN_REPLICATES = 100


# -----------------------------------------------------------------------------
# Reports
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleReport:
    """
    One oracle comparison. Passes when the absolute deviation is within abs_tol
    or the relative deviation is within rel_tol (a missing tolerance never passes).
    """

    quantity: str
    oracle: float
    candidate: float
    abs_dev: float
    rel_dev: float
    abs_tol: Optional[float]
    rel_tol: Optional[float]
    passed: bool

    @classmethod
    def compare(
        cls,
        quantity: str,
        oracle: complex,
        candidate: complex,
        rel_tol: Optional[float] = None,
        abs_tol: Optional[float] = None,
    ) -> OracleReport:
        if rel_tol is None and abs_tol is None:
            raise InvalidArgumentError("OracleReport needs a tolerance")
        abs_dev = float(abs(complex(candidate) - complex(oracle)))
        scale = abs(complex(oracle))
        rel_dev = abs_dev / scale if scale > 0 else (0.0 if abs_dev == 0 else math.inf)
        passed = (abs_tol is not None and abs_dev <= abs_tol) or (
            rel_tol is not None and rel_dev <= rel_tol
        )
        return cls(
            quantity=quantity,
            oracle=_as_real(oracle),
            candidate=_as_real(candidate),
            abs_dev=abs_dev,
            rel_dev=rel_dev,
            abs_tol=abs_tol,
            rel_tol=rel_tol,
            passed=bool(passed),
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def __str__(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (
            f"[{mark}] {self.quantity}: oracle={self.oracle:.6g} candidate={self.candidate:.6g} "
            f"abs_dev={self.abs_dev:.3g} rel_dev={self.rel_dev:.3g} "
            f"(abs_tol={self.abs_tol}, rel_tol={self.rel_tol})"
        )


def _as_real(v: complex) -> float:
    """Magnitude for complex values with a nonzero imaginary part, else the real value."""
    c = complex(v)
    return float(c.real) if c.imag == 0 else float(abs(c))


# -----------------------------------------------------------------------------
# Brute-Force Estimator
# -----------------------------------------------------------------------------


def brute_force_G(
    x: TimeSeries, w: LagWindowSpec, L: int, p: BifrequencyPoint
) -> complex:
    """
    Literal O(n^2) double sum
    (1/(2 pi n)) sum_s sum_t H_L(s - t) X_s X_t e^{-i nu s} e^{i omega t}.
    """
    n = len(x)
    if n > BRUTE_FORCE_MAX_N:
        raise InvalidArgumentError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    if L < 1:
        raise InvalidArgumentError(f"bandwidth must be >= 1, got {L}")
    t = x.times.astype(np.float64)
    a = x.samples * np.exp(-1j * p.nu.value * t)
    b = x.samples * np.exp(1j * p.omega.value * t)
    total = 0j
    for i in range(n):
        h = np.array([eval_taper(w, (i - j) / L) for j in range(n)])
        total += a[i] * np.sum(h * b)
    return complex(total / (TWO_PI * n))


# -----------------------------------------------------------------------------
# Monte Carlo Covariance
# -----------------------------------------------------------------------------


def _window_convolution_G(
    x: np.ndarray, times: np.ndarray, h: np.ndarray, L: int, nu: float, omega: float
) -> complex:
    """G_hat as sum_s a_s (H * b)_s with a = X e^{-i nu s}, b = X e^{i omega t}."""
    a = x * np.exp(-1j * nu * times)
    b = x * np.exp(1j * omega * times)
    conv = np.convolve(b, h)[L : L + x.size]
    return complex(np.sum(a * conv) / (TWO_PI * x.size))


@dataclass(frozen=True)
class McCovariance:
    """
    Simulation estimates of (n/L) cov(G(p1), G(p2)) (Hermitian, E[A conj B]) and
    (n/L) cov(G(p1), conj G(p2)) (pseudo, E[A B]), with standard errors of the
    real and imaginary parts packed as complex numbers. The Re/Im variances of
    G(p1) are estimated directly from the replicates.
    """

    cov: complex
    pseudo: complex
    cov_se: complex
    pseudo_se: complex
    re_var: float
    re_var_se: float
    im_var: float
    im_var_se: float
    replicates: int

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.cov, self.pseudo], [np.conj(self.pseudo), np.conj(self.cov)]])


def _se(z: np.ndarray) -> complex:
    m = z.size
    return complex(np.std(z.real, ddof=1) / math.sqrt(m), np.std(z.imag, ddof=1) / math.sqrt(m))


def mc_covariance(
    model: PeriodicMAModel,
    n: int,
    L: int,
    p1: BifrequencyPoint,
    p2: BifrequencyPoint,
    replicates: int,
    seed: int,
    w: LagWindowSpec = DEFAULT_WINDOW,
    threads: int = 1,
) -> McCovariance:
    """
    Monte Carlo estimate of the normalized covariance of G_hat at two points.

    Replicate r uses the r-th child of SeedSequence(seed), so results do not
    depend on the number of threads.
    """
    if replicates < MIN_REPLICATES:
        raise InvalidArgumentError(f"need at least {MIN_REPLICATES} replicates, got {replicates}")
    if not (1 <= L < n):
        raise InvalidArgumentError(f"need 1 <= L < n, got L={L}, n={n}")
    h = np.array([eval_taper(w, tau / L) for tau in range(-L, L + 1)])
    seeds = np.random.SeedSequence(seed).spawn(replicates)

    def one(ss: np.random.SeedSequence) -> tuple:
        x = simulate(model, n, int(ss.generate_state(1)[0]))
        t = x.times.astype(np.float64)
        g1 = _window_convolution_G(x.samples, t, h, L, p1.nu.value, p1.omega.value)
        g2 = _window_convolution_G(x.samples, t, h, L, p2.nu.value, p2.omega.value)
        return g1, g2

    if threads <= 1:
        pairs = [one(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            pairs = list(executor.map(one, seeds))

    A = np.array([g1 for g1, _ in pairs])
    B = np.array([g2 for _, g2 in pairs])
    m = A.size
    scale = n / L
    dA = A - A.mean()
    dB = B - B.mean()
    herm = dA * np.conj(dB)
    pseu = dA * dB
    corr = m / (m - 1)
    re2 = dA.real**2
    im2 = dA.imag**2
    return McCovariance(
        cov=complex(scale * corr * herm.mean()),
        pseudo=complex(scale * corr * pseu.mean()),
        cov_se=scale * _se(herm),
        pseudo_se=scale * _se(pseu),
        re_var=float(scale * corr * re2.mean()),
        re_var_se=float(scale * np.std(re2, ddof=1) / math.sqrt(m)),
        im_var=float(scale * corr * im2.mean()),
        im_var_se=float(scale * np.std(im2, ddof=1) / math.sqrt(m)),
        replicates=m,
    )


# -----------------------------------------------------------------------------
# Distribution Distance
# -----------------------------------------------------------------------------


def ks_distance(sample: np.ndarray, law_sample: np.ndarray) -> float:
    """Two-sample Kolmogorov statistic sup_x |F1(x) - F2(x)|."""
    a = np.sort(np.asarray(sample, dtype=np.float64))
    b = np.sort(np.asarray(law_sample, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise InvalidArgumentError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))
