"""
Periodic Moving-Average Models

This module simulates periodically correlated moving-average processes

    X_t = eps_t + sum_{q=1..Q} theta_q(t - q) eps_{t-q},   eps_t ~ N(0, sd^2)

with T-periodic coefficients, and derives their exact second-order structure: the
autocovariance B(t, tau), its Fourier coefficients a(2pi k / T, tau) and the
spectral density extension P(nu, omega) on the bifrequency square.

Samples are indexed by absolute time t = 1..n (start_index 0), and theta_q(s) is
read at s mod T, so simulation and closed forms share one time origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from spectra.asymptotics import SpectralTruth
from spectra.core import (
    TWO_PI,
    BifrequencyPoint,
    ComplexValue,
    InvalidArgumentError,
    TimeSeries,
)

# -----------------------------------------------------------------------------
# Constants
# -----------------------------------------------------------------------------

SUPPORT_TOL = 1e-9


# -----------------------------------------------------------------------------
# Model
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodicMAModel:
    """
    Periodic MA(Q) model.

    `coeffs` maps each lag q >= 1 to the T values theta_q(0), ..., theta_q(T-1).
    Lags missing from the map have zero coefficients.
    """

    period: int
    coeffs: Mapping[int, Tuple[float, ...]] = field(default_factory=dict)
    innovation_sd: float = 1.0
    label: str = "pma"

    def __post_init__(self):
        if int(self.period) != self.period or self.period < 1:
            raise InvalidArgumentError(f"period must be a positive integer, got {self.period}")
        T = int(self.period)
        clean: Dict[int, Tuple[float, ...]] = {}
        for q, row in self.coeffs.items():
            if int(q) != q or q < 1:
                raise InvalidArgumentError(f"MA lags must be integers >= 1, got {q}")
            vals = tuple(float(v) for v in row)
            if len(vals) != T:
                raise InvalidArgumentError(f"lag {q} needs {T} coefficients, got {len(vals)}")
            if not all(math.isfinite(v) for v in vals):
                raise InvalidArgumentError(f"lag {q} has non-finite coefficients")
            clean[int(q)] = vals
        if not (math.isfinite(self.innovation_sd) and self.innovation_sd >= 0):
            raise InvalidArgumentError(f"innovation_sd must be >= 0, got {self.innovation_sd}")
        object.__setattr__(self, "period", T)
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "innovation_sd", float(self.innovation_sd))

    # --- Constructors ---

    @classmethod
    def pma1(cls, T: int, innovation_sd: float = 1.0) -> PeriodicMAModel:
        """Order-1 model with theta(t) = (2 + sin(2 pi t / T))^2."""
        theta = tuple((2.0 + math.sin(TWO_PI * t / T)) ** 2 for t in range(T))
        return cls(T, {1: theta}, innovation_sd, label=f"pma1:T={T}")

    @classmethod
    def ma2(cls) -> PeriodicMAModel:
        """Stationary X_t = 2 eps_{t-2} + eps_{t-1} + eps_t."""
        return cls(1, {1: (1.0,), 2: (2.0,)}, 1.0, label="ma2")

    @classmethod
    def white(cls, innovation_sd: float = 1.0) -> PeriodicMAModel:
        return cls(1, {}, innovation_sd, label="white")

    # --- Structure ---

    @property
    def max_lag(self) -> int:
        return max(self.coeffs, default=0)

    def theta(self, q: int, s: int) -> float:
        """theta_q(s); theta_0 is identically one."""
        if q == 0:
            return 1.0
        row = self.coeffs.get(q)
        if row is None:
            return 0.0
        return row[s % self.period]

    def psi(self, j: int, t: int) -> float:
        """Weight of eps_{t-j} in X_t."""
        return self.theta(j, t - j)


# -----------------------------------------------------------------------------
# Simulation
# -----------------------------------------------------------------------------


def simulate(model: PeriodicMAModel, n: int, seed: Optional[int] = None) -> TimeSeries:
    """
    Draw a length-n sample at times 1..n.

    Args:
        model: Periodic MA model.
        n: Sample length.
        seed: Seed of the numpy default generator.

    Returns:
        TimeSeries with start_index 0 and the model label and seed in metadata.
    """
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n}")
    n = int(n)
    Q = model.max_lag
    rng = np.random.default_rng(seed)

    # eps[j] is the innovation at time j + 1 - Q
    eps = model.innovation_sd * rng.standard_normal(n + Q)
    t = np.arange(1, n + 1)
    x = eps[Q:].copy()
    for q, row in model.coeffs.items():
        theta = np.asarray(row)[(t - q) % model.period]
        x += theta * eps[Q - q : Q - q + n]

    return TimeSeries(x, start_index=0, metadata={"model": model.label, "seed": seed})


# -----------------------------------------------------------------------------
# Second-Order Structure
# -----------------------------------------------------------------------------


def autocovariance(model: PeriodicMAModel, t: int, tau: int) -> float:
    """Exact B(t, tau) = cov(X_t, X_{t+tau})."""
    Q = model.max_lag
    if abs(tau) > Q:
        return 0.0
    total = 0.0
    for j in range(max(0, -tau), min(Q, Q - tau) + 1):
        total += model.psi(j, t) * model.psi(j + tau, t + tau)
    return model.innovation_sd**2 * total


def fourier_coefficient(model: PeriodicMAModel, k: int, tau: int) -> ComplexValue:
    """a(2 pi k / T, tau) = (1/T) sum_{t=0}^{T-1} B(t, tau) e^{-i 2 pi k t / T}."""
    T = model.period
    t = np.arange(T)
    B = np.array([autocovariance(model, int(s), tau) for s in t])
    return complex(np.mean(B * np.exp(-1j * TWO_PI * k * t / T)))


class PeriodicMATruth(SpectralTruth):
    """Exact spectral density extension of a periodic MA model."""

    def __init__(self, model: PeriodicMAModel):
        self.model = model
        Q = model.max_lag
        self._lags = np.arange(-Q, Q + 1)
        self._a = np.array(
            [
                [fourier_coefficient(model, k, int(tau)) for tau in self._lags]
                for k in range(model.period)
            ]
        )

    def support_index(self, lam: float) -> Optional[int]:
        """k with lam = 2 pi k / T (mod 2 pi) within tolerance, else None."""
        T = self.model.period
        step = TWO_PI / T
        k = int(round(lam / step))
        if abs(lam - k * step) > SUPPORT_TOL:
            return None
        return k % T

    def P(self, point: BifrequencyPoint) -> ComplexValue:
        nu, om = point.nu.value, point.omega.value
        k = self.support_index(nu - om)
        if k is None:
            return 0j
        value = np.sum(self._a[k] * np.exp(-1j * nu * self._lags)) / TWO_PI
        if point.is_diagonal:
            return complex(value.real, 0.0)
        return complex(value)

    def g(self, lam: float, nu: float) -> ComplexValue:
        """g_lambda(nu) = P(nu, nu - lambda)."""
        return self.at(nu, nu - lam)


def spectral_truth(model: PeriodicMAModel) -> PeriodicMATruth:
    return PeriodicMATruth(model)


def sample_autocovariance(x: TimeSeries, T: int, tau: int) -> np.ndarray:
    """
    Empirical B(t, tau) of a zero-mean series, averaged over t with equal phase.

    Returns:
        Array of length T; entry r averages X_t X_{t+tau} over absolute times
        t = r (mod T) with both samples inside the series.
    """
    if T < 1:
        raise InvalidArgumentError(f"period must be >= 1, got {T}")
    n = len(x)
    if abs(tau) >= n:
        raise InvalidArgumentError(f"lag {tau} too large for series of length {n}")
    lo, hi = max(0, -tau), min(n, n - tau)
    prods = x.samples[lo:hi] * x.samples[lo + tau : hi + tau]
    phase = x.times[lo:hi] % T
    out = np.full(T, np.nan)
    for r in range(T):
        sel = prods[phase == r]
        if sel.size:
            out[r] = sel.mean()
    return out
