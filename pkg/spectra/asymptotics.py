"""
Asymptotic Covariance Structures

Closed-form limits of the normalized estimators: the complex covariance kernel of
G_hat, the 2x2 covariance Sigma of (Re G_hat, Im G_hat), the 4x4 covariance Psi
used by the coherence delta method, the delta-method gradients D1 and D2, and the
limit laws J^P and J^gamma together with a seeded sampler.

Every covariance here is built from `complex_cov_kernel` and the conjugation rule
conj(G(nu, omega)) = G(2pi - nu, 2pi - omega). For complex A, B with Hermitian
covariance C = E[A conj B] and pseudo-covariance Q = E[A B]:

    cov(Re A, Re B) = (Re C + Re Q) / 2
    cov(Re A, Im B) = (Im Q - Im C) / 2
    cov(Im A, Re B) = (Im Q + Im C) / 2
    cov(Im A, Im B) = (Re C - Re Q) / 2
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Literal, Optional, Tuple, Union

import numpy as np
from scipy import stats

from spectra.core import (
    BifrequencyPoint,
    ComplexValue,
    FrequencyLike,
    InvalidArgumentError,
    NonPSDError,
    TimeSeries,
    canonicalize_frequency,
    reflect,
)
from spectra.estimators import smoothed_bispectral
from spectra.windows import LagWindowSpec

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------------
# Constants & Types
# -----------------------------------------------------------------------------

PSD_TOL = 1e-12
DEFAULT_LAW_DRAWS = 200_000

SigmaVariant = Literal["kernel_derived", "as_printed"]


# -----------------------------------------------------------------------------
# Spectral Truth
# -----------------------------------------------------------------------------


class SpectralTruth:
    """
    Spectral density extension P(nu, omega) on the bifrequency square.

    Subclasses implement `P`; `g0(nu)` defaults to Re P(nu, nu). Implementations
    must be safe to call from several threads.
    """

    def P(self, point: BifrequencyPoint) -> ComplexValue:
        raise NotImplementedError

    def g0(self, nu: FrequencyLike) -> float:
        f = canonicalize_frequency(nu)
        return float(self.P(BifrequencyPoint(f, f)).real)

    def at(self, nu: FrequencyLike, omega: FrequencyLike) -> ComplexValue:
        """P at raw angles, canonicalizing both."""
        return self.P(BifrequencyPoint.of(nu, omega))

    @staticmethod
    def from_functions(
        P: Callable[[BifrequencyPoint], complex],
        g0: Optional[Callable[[float], float]] = None,
    ) -> SpectralTruth:
        return FunctionTruth(P, g0)


class FunctionTruth(SpectralTruth):
    """SpectralTruth backed by plain callables."""

    def __init__(
        self,
        P: Callable[[BifrequencyPoint], complex],
        g0: Optional[Callable[[float], float]] = None,
    ):
        self._P = P
        self._g0 = g0

    def P(self, point: BifrequencyPoint) -> ComplexValue:
        return complex(self._P(point))

    def g0(self, nu: FrequencyLike) -> float:
        if self._g0 is None:
            return super().g0(nu)
        return float(self._g0(canonicalize_frequency(nu).value))


class ZeroTruth(SpectralTruth):
    """The zero process."""

    def P(self, point: BifrequencyPoint) -> ComplexValue:
        return 0j


class PlugInTruth(SpectralTruth):
    """
    Truth obtained by replacing P with the smoothed estimate of a sample.

    Estimates are computed lazily and cached. Points listed in `null_points` (and
    their reflections) are forced to zero, which is how a null hypothesis
    P(nu, omega) = 0 enters the plug-in covariance.
    """

    def __init__(
        self,
        x: TimeSeries,
        w: LagWindowSpec,
        L: int,
        null_points: Iterable[BifrequencyPoint] = (),
    ):
        self.x = x
        self.w = w
        self.L = int(L)
        nulls = []
        for p in null_points:
            nulls.append(p)
            nulls.append(p.reflected())
        self._nulls: Tuple[BifrequencyPoint, ...] = tuple(nulls)
        self._cache: Dict[Tuple[float, float], complex] = {}
        self._lock = threading.Lock()

    def P(self, point: BifrequencyPoint) -> ComplexValue:
        if any(point.close_to(q) for q in self._nulls):
            return 0j
        key = point.as_tuple()
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        logger.debug("plug-in estimate at (%.6f, %.6f)", *key)
        value = smoothed_bispectral(self.x, self.w, self.L, point).value
        if point.is_diagonal:
            value = complex(value.real, 0.0)
        with self._lock:
            self._cache[key] = value
        return value


# -----------------------------------------------------------------------------
# Covariance Containers
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Cov2:
    """Symmetric 2x2 covariance [[s11, s12], [s12, s22]]."""

    s11: float
    s12: float
    s22: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s12, self.s22]], dtype=np.float64)

    @classmethod
    def from_array(cls, a: np.ndarray) -> Cov2:
        a = np.asarray(a, dtype=np.float64)
        return cls(float(a[0, 0]), float(0.5 * (a[0, 1] + a[1, 0])), float(a[1, 1]))

    @classmethod
    def zero(cls) -> Cov2:
        return cls(0.0, 0.0, 0.0)


_TRIL4 = [(i, j) for i in range(4) for j in range(i + 1)]


@dataclass(frozen=True)
class Cov4:
    """
    Symmetric 4x4 covariance stored as its lower triangle, row by row:
    (00, 10, 11, 20, 21, 22, 30, 31, 32, 33).
    """

    entries: Tuple[float, ...]

    def __post_init__(self):
        if len(self.entries) != 10:
            raise InvalidArgumentError("Cov4 needs exactly 10 lower-triangle entries")
        object.__setattr__(self, "entries", tuple(float(e) for e in self.entries))

    def as_array(self) -> np.ndarray:
        a = np.zeros((4, 4), dtype=np.float64)
        for (i, j), v in zip(_TRIL4, self.entries):
            a[i, j] = v
            a[j, i] = v
        return a

    @classmethod
    def from_array(cls, a: np.ndarray) -> Cov4:
        a = np.asarray(a, dtype=np.float64)
        sym = 0.5 * (a + a.T)
        return cls(tuple(sym[i, j] for i, j in _TRIL4))

    def __getitem__(self, ij: Tuple[int, int]) -> float:
        i, j = ij
        if i < j:
            i, j = j, i
        return self.entries[_TRIL4.index((i, j))]


# -----------------------------------------------------------------------------
# Limit Laws
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldedBivariateNormal:
    """Law of scale * sqrt(S1^2 + S2^2) with (S1, S2) ~ N2(0, cov)."""

    cov: Cov2
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidArgumentError(f"scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class Normal:
    """Centered normal law N(0, variance)."""

    variance: float

    def __post_init__(self):
        if self.variance < -PSD_TOL:
            raise NonPSDError(f"negative variance {self.variance}")


LimitLaw = Union[FoldedBivariateNormal, Normal]


# -----------------------------------------------------------------------------
# Kernel & Covariances
# -----------------------------------------------------------------------------


def complex_cov_kernel(
    truth: SpectralTruth, rho: float, p1: BifrequencyPoint, p2: BifrequencyPoint
) -> ComplexValue:
    """
    Limit of (d/L) cov(G_hat(p1), G_hat(p2)) with cov(A, B) = E[A conj B].

    rho * (P(nu1, nu2) conj P(omega1, omega2)
           + P(nu1, 2pi - omega2) conj P(nu2, 2pi - omega1))
    """
    nu1, om1 = p1.nu, p1.omega
    nu2, om2 = p2.nu, p2.omega
    first = truth.P(BifrequencyPoint(nu1, nu2)) * np.conj(truth.P(BifrequencyPoint(om1, om2)))
    second = truth.P(BifrequencyPoint(nu1, reflect(om2))) * np.conj(
        truth.P(BifrequencyPoint(nu2, reflect(om1)))
    )
    return complex(rho * (first + second))


def _pair_blocks(
    truth: SpectralTruth, rho: float, p1: BifrequencyPoint, p2: BifrequencyPoint
) -> np.ndarray:
    """2x2 real covariance of (Re A, Im A) against (Re B, Im B)."""
    C = complex_cov_kernel(truth, rho, p1, p2)
    Q = complex_cov_kernel(truth, rho, p1, p2.reflected())
    return 0.5 * np.array(
        [
            [C.real + Q.real, Q.imag - C.imag],
            [Q.imag + C.imag, C.real - Q.real],
        ]
    )


def sigma_matrix(
    truth: SpectralTruth,
    p: BifrequencyPoint,
    variant: SigmaVariant = "kernel_derived",
    rho: float = 2.0,
) -> Cov2:
    """
    Asymptotic covariance of sqrt(n/L) (Re G_hat(p), Im G_hat(p)).

    Args:
        truth: Spectral density extension.
        p: Bifrequency point.
        variant: "kernel_derived" builds Sigma from the covariance kernel and
            carries rho; "as_printed" evaluates the closed-form entries as
            published, without a rho factor and with the degree-4 cross term.
        rho: Window constant, used by the kernel variant only.

    Returns:
        Cov2.
    """
    if variant == "kernel_derived":
        return Cov2.from_array(_pair_blocks(truth, rho, p, p))
    if variant != "as_printed":
        raise InvalidArgumentError(f"unknown Sigma variant '{variant}'")

    nu, om = p.nu, p.omega
    g = truth.g0(nu) * truth.g0(om)
    Pv = truth.P(p)
    cross = abs(truth.P(BifrequencyPoint(nu, reflect(om)))) ** 2
    prod = truth.P(BifrequencyPoint(nu, reflect(nu))) * truth.P(BifrequencyPoint(reflect(om), om))
    re2, im2 = Pv.real**2, Pv.imag**2
    s11 = 0.5 * (g + cross + prod.real + re2 - im2)
    s12 = -re2 * im2 - 0.5 * prod.imag
    s22 = 0.5 * (g + cross - prod.real - re2 + im2)
    return Cov2(s11, s12, s22)


def psi_matrix(truth: SpectralTruth, p: BifrequencyPoint, rho: float = 2.0) -> Cov4:
    """
    Asymptotic covariance of sqrt(n/L) times
    (Re G(nu,omega), Re G(nu,nu), Re G(omega,omega), Im G(nu,omega)).
    """
    pts = [p, BifrequencyPoint(p.nu, p.nu), BifrequencyPoint(p.omega, p.omega)]
    # (point index, 0 for Re / 1 for Im)
    comps = [(0, 0), (1, 0), (2, 0), (0, 1)]
    blocks: Dict[Tuple[int, int], np.ndarray] = {}

    out = np.zeros((4, 4))
    for r, (ir, kr) in enumerate(comps):
        for s, (js, ks) in enumerate(comps[: r + 1]):
            if (ir, js) not in blocks:
                blocks[(ir, js)] = _pair_blocks(truth, rho, pts[ir], pts[js])
            out[r, s] = blocks[(ir, js)][kr, ks]
            out[s, r] = out[r, s]
    return Cov4.from_array(out)


# -----------------------------------------------------------------------------
# Delta Method
# -----------------------------------------------------------------------------


def d1_gradient(Pval: ComplexValue) -> np.ndarray:
    """Gradient of |P| with respect to (Re P, Im P)."""
    mod = abs(Pval)
    if mod == 0.0:
        raise InvalidArgumentError("|P| = 0: gradient of the modulus is undefined")
    return np.array([Pval.real / mod, Pval.imag / mod])


def d2_gradient(Pval: ComplexValue, g0nu: float, g0om: float) -> np.ndarray:
    """Gradient of |P| / sqrt(g0nu g0om) with respect to (Re P, g0nu, g0om, Im P)."""
    mod = abs(Pval)
    if mod == 0.0:
        raise InvalidArgumentError("|P| = 0: coherence gradient is undefined")
    if not (g0nu > 0 and g0om > 0):
        raise InvalidArgumentError(f"g0 values must be positive, got {g0nu}, {g0om}")
    lead = mod / math.sqrt(g0nu * g0om)
    return lead * np.array(
        [Pval.real / mod**2, -0.5 / g0nu, -0.5 / g0om, Pval.imag / mod**2]
    )


def delta_method_variance(gradient: np.ndarray, cov: Union[Cov2, Cov4, np.ndarray]) -> float:
    """Quadratic form D cov D^T."""
    m = cov.as_array() if isinstance(cov, (Cov2, Cov4)) else np.asarray(cov, dtype=np.float64)
    g = np.asarray(gradient, dtype=np.float64)
    if m.shape != (g.size, g.size):
        raise InvalidArgumentError(f"gradient of size {g.size} does not match cov {m.shape}")
    return float(g @ m @ g)


def limit_law_P(truth: SpectralTruth, rho: float, p: BifrequencyPoint) -> LimitLaw:
    """Law J^P of sqrt(n/L) (|G_hat(p)| - |P(p)|)."""
    sigma = sigma_matrix(truth, p, "kernel_derived", rho)
    Pv = truth.P(p)
    if Pv == 0:
        return FoldedBivariateNormal(sigma, 1.0)
    return Normal(delta_method_variance(d1_gradient(Pv), sigma))


def limit_law_gamma(truth: SpectralTruth, rho: float, p: BifrequencyPoint) -> LimitLaw:
    """Law J^gamma of sqrt(n/L) (|gamma_hat(p)| - |gamma(p)|); off-diagonal p only."""
    if p.is_diagonal:
        raise InvalidArgumentError("coherence limit law requires nu != omega")
    g_nu, g_om = truth.g0(p.nu), truth.g0(p.omega)
    if not (g_nu > 0 and g_om > 0):
        raise InvalidArgumentError(f"g0 must be positive at both frequencies, got {g_nu}, {g_om}")
    Pv = truth.P(p)
    if Pv == 0:
        sigma = sigma_matrix(truth, p, "kernel_derived", rho)
        return FoldedBivariateNormal(sigma, 1.0 / math.sqrt(g_nu * g_om))
    psi = psi_matrix(truth, p, rho)
    return Normal(delta_method_variance(d2_gradient(Pv, g_nu, g_om), psi))


# -----------------------------------------------------------------------------
# Sampling
# -----------------------------------------------------------------------------


def psd_sqrt(cov: np.ndarray) -> np.ndarray:
    """
    Symmetric square root of a covariance matrix.

    Eigenvalues in [-1e-12, 0) are clipped to zero; anything more negative
    raises NonPSDError.
    """
    m = np.asarray(cov, dtype=np.float64)
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    if np.any(vals < -PSD_TOL):
        raise NonPSDError(
            f"covariance is not positive semidefinite (min eigenvalue {vals.min():.3g})"
        )
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def sample_limit_law(law: LimitLaw, rng: np.random.Generator, m: int) -> np.ndarray:
    """Draw m i.i.d. values from a limit law using the caller's generator."""
    if m < 1:
        raise InvalidArgumentError(f"m must be >= 1, got {m}")
    if isinstance(law, Normal):
        if law.variance <= 0:
            return np.zeros(m)
        return rng.normal(0.0, math.sqrt(law.variance), size=m)
    root = psd_sqrt(law.cov.as_array())
    s = rng.standard_normal((m, 2)) @ root
    return law.scale * np.hypot(s[:, 0], s[:, 1])


def law_quantile(
    law: LimitLaw,
    level: float,
    rng: Optional[np.random.Generator] = None,
    m: int = DEFAULT_LAW_DRAWS,
) -> float:
    """
    Quantile of a limit law.

    Normal laws and isotropic folded laws (Rayleigh) use scipy.stats closed forms;
    other folded laws fall back to the empirical quantile of `m` draws.
    """
    if not (0.0 < level < 1.0):
        raise InvalidArgumentError(f"level must lie in (0, 1), got {level}")
    if isinstance(law, Normal):
        if law.variance <= 0:
            return 0.0
        return float(stats.norm.ppf(level, scale=math.sqrt(law.variance)))

    c = law.cov
    if c.s12 == 0.0 and math.isclose(c.s11, c.s22, rel_tol=1e-12, abs_tol=0.0):
        if c.s11 <= 0:
            return 0.0
        return float(law.scale * stats.rayleigh.ppf(level, scale=math.sqrt(c.s11)))

    if rng is None:
        rng = np.random.default_rng(0)
    draws = np.sort(sample_limit_law(law, rng, m))
    k = min(max(int(math.ceil(level * m - 1e-9)), 1), m)
    return float(draws[k - 1])


# -----------------------------------------------------------------------------
# Chi-square(2) Reference
# -----------------------------------------------------------------------------


def chi2_2_sf(x: float) -> float:
    """Survival function of chi-square with two degrees of freedom."""
    if x < 0:
        raise InvalidArgumentError(f"chi-square argument must be >= 0, got {x}")
    return math.exp(-x / 2.0)


def chi2_2_critical(alpha: float) -> float:
    """The (1 - alpha) quantile 2 ln(1/alpha)."""
    if not (0.0 < alpha < 1.0):
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    return 2.0 * math.log(1.0 / alpha)
