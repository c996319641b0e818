"""
Bifrequency Estimators

This module implements the spectral density estimators on the bifrequency square:
the raw estimator P_hat, the lag-window estimator G_hat, the coherence statistic
|gamma_hat| and the demeaned estimator T_hat. Block estimators are the same
functions applied to `TimeSeries.block(...)`, since every phase factor uses the
absolute sample times.

G_hat is evaluated through the lag-sum form

    G(nu, omega) = 1/(2 pi d) * sum_{|tau|<=L} H_L(tau) e^{-i nu tau}
                   * sum_t X_{t+tau} X_t e^{-i (nu - omega) t}

which costs O(d L). The sliding variant used by subsampling computes the same
quantity for every length-b block with prefix sums in O(d L) overall. Both run as
numba kernels when numba is installed and fall back to NumPy otherwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Tuple

import numpy as np

from spectra.core import (
    TWO_PI,
    BifrequencyPoint,
    ComplexValue,
    DegenerateDenominatorError,
    Frequency,
    InvalidArgumentError,
    TimeSeries,
    canonicalize_frequency,
    frequencies_close,
    reflect,
)
from spectra.windows import DEFAULT_WINDOW, LagWindowSpec, lag_weights

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------------
# Numba Support
# -----------------------------------------------------------------------------

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func

        return decorator


# -----------------------------------------------------------------------------
# Data Structures
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralEstimate:
    """
    A complex bifrequency estimate with the metadata needed to normalize it.

    `L` is the bandwidth used; the raw estimator records L = n (no smoothing).
    """

    point: BifrequencyPoint
    value: ComplexValue
    n: int
    L: int
    window: LagWindowSpec
    warnings: Tuple[str, ...] = field(default=(), compare=False)

    @property
    def normalizer(self) -> float:
        """sqrt(n / L), the rate of the normalized statistics."""
        return float(np.sqrt(self.n / self.L))

    @property
    def magnitude(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class MeanSpec:
    """The finite set Gamma of frequencies carried by the mean function."""

    gamma_set: FrozenSet[Frequency] = frozenset()

    @classmethod
    def of(cls, freqs: Iterable[float]) -> MeanSpec:
        canon = [canonicalize_frequency(f) for f in freqs]
        for i, a in enumerate(canon):
            for b in canon[i + 1 :]:
                if frequencies_close(a, b):
                    raise InvalidArgumentError(f"duplicate mean frequency {a.value}")
        return cls(frozenset(canon))

    @property
    def is_empty(self) -> bool:
        return not self.gamma_set

    def closed_under_negation(self) -> bool:
        return all(
            any(frequencies_close(reflect(g), h) for h in self.gamma_set)
            for g in self.gamma_set
        )


# -----------------------------------------------------------------------------
# Kernels
# -----------------------------------------------------------------------------


@njit(nogil=True)
def _lag_sum_numba(x, start, weights, L, nu, omega):
    n = x.shape[0]
    dphi = nu - omega
    phase = np.empty(n, dtype=np.complex128)
    for i in range(n):
        phase[i] = np.exp(-1j * dphi * (start + 1 + i))
    total = 0j
    for k in range(-L, L + 1):
        w = weights[k + L]
        if w == 0.0:
            continue
        lo = max(0, -k)
        hi = min(n, n - k)
        acc = 0j
        for i in range(lo, hi):
            acc += x[i + k] * x[i] * phase[i]
        total += w * np.exp(-1j * nu * k) * acc
    return total


def _lag_sum_numpy(x, start, weights, L, nu, omega):
    n = x.shape[0]
    t = start + 1 + np.arange(n)
    phase = np.exp(-1j * (nu - omega) * t)
    total = 0j
    for k in range(-L, L + 1):
        w = weights[k + L]
        if w == 0.0:
            continue
        if k >= 0:
            acc = np.sum(x[k:] * x[: n - k] * phase[: n - k])
        else:
            acc = np.sum(x[: n + k] * x[-k:] * phase[-k:])
        total += w * np.exp(-1j * nu * k) * acc
    return total


@njit(nogil=True)
def _block_lag_sums_numba(x, start, weights, L, nu, omega, b):
    n = x.shape[0]
    n_blocks = n - b + 1
    out = np.zeros(n_blocks, dtype=np.complex128)
    dphi = nu - omega
    phase = np.empty(n, dtype=np.complex128)
    for i in range(n):
        phase[i] = np.exp(-1j * dphi * (start + 1 + i))
    prefix = np.empty(n + 1, dtype=np.complex128)
    for k in range(0, L + 1):
        w = weights[L + k]
        if w == 0.0:
            continue
        if k == 0:
            coef = 1.0 + 0j
        else:
            # lag -k folds onto lag k: e^{-i nu k} + e^{-i(nu-omega)k} e^{i nu k}
            coef = np.exp(-1j * nu * k) + np.exp(1j * omega * k)
        prefix[0] = 0j
        for i in range(n - k):
            prefix[i + 1] = prefix[i] + x[i + k] * x[i] * phase[i]
        for o in range(n_blocks):
            out[o] += w * coef * (prefix[o + b - k] - prefix[o])
    return out


def _block_lag_sums_numpy(x, start, weights, L, nu, omega, b):
    n = x.shape[0]
    n_blocks = n - b + 1
    out = np.zeros(n_blocks, dtype=np.complex128)
    t = start + 1 + np.arange(n)
    phase = np.exp(-1j * (nu - omega) * t)
    offsets = np.arange(n_blocks)
    for k in range(0, L + 1):
        w = weights[L + k]
        if w == 0.0:
            continue
        coef = 1.0 + 0j if k == 0 else np.exp(-1j * nu * k) + np.exp(1j * omega * k)
        prefix = np.concatenate([[0j], np.cumsum(x[k:] * x[: n - k] * phase[: n - k])])
        out += w * coef * (prefix[offsets + b - k] - prefix[offsets])
    return out


def _lag_sum(
    x: np.ndarray, start: int, weights: np.ndarray, L: int, nu: float, omega: float
) -> complex:
    if NUMBA_AVAILABLE:
        return complex(_lag_sum_numba(x, start, weights, L, nu, omega))
    return complex(_lag_sum_numpy(x, start, weights, L, nu, omega))


def _check_bandwidth(d: int, L: int) -> None:
    if int(L) != L or L < 1:
        raise InvalidArgumentError(f"bandwidth L must be a positive integer, got {L}")
    if L >= d:
        raise InvalidArgumentError(f"bandwidth L={L} must be smaller than the sample length {d}")


# -----------------------------------------------------------------------------
# Estimators
# -----------------------------------------------------------------------------


def raw_bispectral(x: TimeSeries, p: BifrequencyPoint) -> SpectralEstimate:
    """
    Raw (unsmoothed) estimator P_hat over the whole sample.

    The full double sum factorizes into A(nu) * conj(A(omega)) with
    A(f) = sum_s X_s e^{-i f s}, so it is evaluated in O(d).
    """
    d = len(x)
    t = x.times.astype(np.float64)
    a_nu = np.sum(x.samples * np.exp(-1j * p.nu.value * t))
    a_om = np.sum(x.samples * np.exp(-1j * p.omega.value * t))
    value = complex(a_nu * np.conj(a_om) / (TWO_PI * d))
    return SpectralEstimate(point=p, value=value, n=d, L=d, window=DEFAULT_WINDOW)


def smoothed_bispectral(
    x: TimeSeries, w: LagWindowSpec, L: int, p: BifrequencyPoint
) -> SpectralEstimate:
    """
    Lag-window estimator G_hat(nu, omega) of the sample `x`.

    Args:
        x: Sample; its start_index fixes the absolute time origin.
        w: Lag window.
        L: Bandwidth, 1 <= L < len(x).
        p: Bifrequency point.

    Returns:
        SpectralEstimate with n = len(x) and the given L.
    """
    d = len(x)
    _check_bandwidth(d, L)
    L = int(L)
    weights = lag_weights(w, L)
    total = _lag_sum(x.samples, x.start_index, weights, L, p.nu.value, p.omega.value)
    return SpectralEstimate(point=p, value=total / (TWO_PI * d), n=d, L=L, window=w)


def block_bispectral(
    x: TimeSeries, w: LagWindowSpec, L: int, b: int, p: BifrequencyPoint
) -> np.ndarray:
    """
    G_hat over every length-b block of `x` (stride one).

    Returns:
        Complex array of length len(x) - b + 1; entry o is
        smoothed_bispectral(x.block(o, b), w, L, p).value.
    """
    n = len(x)
    if int(b) != b or b < 1 or b > n:
        raise InvalidArgumentError(f"block length b={b} must lie in [1, {n}]")
    _check_bandwidth(int(b), L)
    L, b = int(L), int(b)
    weights = lag_weights(w, L)
    args = (x.samples, x.start_index, weights, L, p.nu.value, p.omega.value, b)
    if NUMBA_AVAILABLE:
        sums = _block_lag_sums_numba(*args)
    else:
        sums = _block_lag_sums_numpy(*args)
    return sums / (TWO_PI * b)


def coherence_from_values(g: complex, g_nu: complex, g_omega: complex) -> float:
    """|g| / sqrt(|Re g_nu * Re g_omega|), raising on a zero denominator."""
    denom = g_nu.real * g_omega.real
    if denom == 0.0 or not np.isfinite(denom):
        raise DegenerateDenominatorError(g_nu.real, g_omega.real)
    return abs(g) / float(np.sqrt(abs(denom)))


def coherence_stat(
    x: TimeSeries, w: LagWindowSpec, L: int, p: BifrequencyPoint
) -> float:
    """Magnitude of coherence statistic |gamma_hat(nu, omega)|."""
    g = smoothed_bispectral(x, w, L, p).value
    g_nu = smoothed_bispectral(x, w, L, BifrequencyPoint(p.nu, p.nu)).value
    g_om = smoothed_bispectral(x, w, L, BifrequencyPoint(p.omega, p.omega)).value
    return coherence_from_values(g, g_nu, g_om)


def estimate_mean(x: TimeSeries, mean: MeanSpec) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """
    Fourier estimate of an almost periodic mean on the sample's absolute times.

    Returns:
        (mu_hat, warnings) where mu_hat is the real part of
        sum_gamma b_hat(gamma) e^{i gamma t}.
    """
    t = x.times.astype(np.float64)
    mu = np.zeros(len(x), dtype=np.complex128)
    for g in sorted(mean.gamma_set):
        b_hat = np.mean(x.samples * np.exp(-1j * g.value * t))
        mu += b_hat * np.exp(1j * g.value * t)

    warnings: Tuple[str, ...] = ()
    if not mean.closed_under_negation():
        residue = float(np.max(np.abs(mu.imag))) if mu.size else 0.0
        msg = (
            "mean frequency set is not closed under negation; "
            f"discarded imaginary residue up to {residue:.3g}"
        )
        logger.warning(msg)
        warnings = (msg,)
    return mu.real, warnings


def demeaned_smoothed_bispectral(
    x: TimeSeries, mean: MeanSpec, w: LagWindowSpec, L: int, p: BifrequencyPoint
) -> SpectralEstimate:
    """Demeaned estimator T_hat: G_hat applied to X_t - mu_hat(t)."""
    _check_bandwidth(len(x), L)
    if mean.is_empty:
        return smoothed_bispectral(x, w, L, p)
    mu, warnings = estimate_mean(x, mean)
    residual = TimeSeries(x.samples - mu, start_index=x.start_index)
    est = smoothed_bispectral(residual, w, L, p)
    return SpectralEstimate(
        point=est.point, value=est.value, n=est.n, L=est.L, window=w, warnings=warnings
    )
