"""
Core Types

This module defines the value types shared by every other module: frequencies on
(0, 2pi], bifrequency points, time series samples carrying their absolute start
index, and the error hierarchy. All types are immutable and safe to share between
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

# -----------------------------------------------------------------------------
# Constants & Types
# -----------------------------------------------------------------------------

TWO_PI = 2.0 * math.pi

# Complex values (P, G estimates) use the builtin complex type.
ComplexValue = complex

FrequencyLike = Union["Frequency", float, int]


# -----------------------------------------------------------------------------
# Errors
# -----------------------------------------------------------------------------


class SpectraError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(SpectraError, ValueError):
    """An argument violates an operation's precondition."""


class NonPSDError(InvalidArgumentError):
    """A covariance matrix is not positive semidefinite beyond tolerance."""


class DegenerateDenominatorError(SpectraError, ArithmeticError):
    """The coherence denominator Re G(nu,nu) * Re G(omega,omega) is zero."""

    def __init__(self, g_nu: float, g_omega: float):
        self.g_nu = g_nu
        self.g_omega = g_omega
        super().__init__(
            f"degenerate coherence denominator: Re G(nu,nu)={g_nu!r}, "
            f"Re G(omega,omega)={g_omega!r}"
        )


# -----------------------------------------------------------------------------
# Frequency Arithmetic
# -----------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Frequency:
    """An angular frequency in radians, canonical on (0, 2pi]."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or not (0.0 < v <= TWO_PI):
            raise InvalidArgumentError(
                f"frequency {self.value!r} is not canonical; use canonicalize_frequency"
            )
        object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value

    def reflected(self) -> Frequency:
        return reflect(self)


def canonicalize_frequency(x: FrequencyLike) -> Frequency:
    """
    Map any finite real to its representative in (0, 2pi].

    Args:
        x: Angle in radians (or an existing Frequency).

    Returns:
        Frequency congruent to x modulo 2pi; 0 maps to 2pi.
    """
    if isinstance(x, Frequency):
        return x
    v = float(x)
    if not math.isfinite(v):
        raise InvalidArgumentError(f"frequency must be finite, got {x!r}")
    if 0.0 < v <= TWO_PI:
        return Frequency(v)
    r = math.fmod(v, TWO_PI)
    if r <= 0.0:
        r += TWO_PI
    # fmod rounding can land exactly past the upper end
    if r > TWO_PI:
        r = TWO_PI
    return Frequency(r)


def reflect(f: FrequencyLike) -> Frequency:
    """Return canonicalize(2pi - f), the reflection used throughout Sigma."""
    f = canonicalize_frequency(f)
    return canonicalize_frequency(TWO_PI - f.value)


def frequencies_close(a: FrequencyLike, b: FrequencyLike, tol: float = 1e-9) -> bool:
    """True if a and b agree modulo 2pi within tol."""
    d = abs(canonicalize_frequency(a).value - canonicalize_frequency(b).value)
    return min(d, TWO_PI - d) <= tol


# -----------------------------------------------------------------------------
# Bifrequency Points
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class BifrequencyPoint:
    """A point (nu, omega) of the bifrequency square (0, 2pi]^2."""

    nu: Frequency
    omega: Frequency

    @classmethod
    def of(cls, nu: FrequencyLike, omega: FrequencyLike) -> BifrequencyPoint:
        """Build a point from raw angles, canonicalizing both coordinates."""
        return cls(canonicalize_frequency(nu), canonicalize_frequency(omega))

    @property
    def is_diagonal(self) -> bool:
        return self.nu.value == self.omega.value

    def reflected(self) -> BifrequencyPoint:
        """(2pi - nu, 2pi - omega): conj(G(nu, omega)) = G(reflected point)."""
        return BifrequencyPoint(reflect(self.nu), reflect(self.omega))

    def close_to(self, other: BifrequencyPoint, tol: float = 1e-9) -> bool:
        return frequencies_close(self.nu, other.nu, tol) and frequencies_close(
            self.omega, other.omega, tol
        )

    def as_tuple(self) -> tuple[float, float]:
        return (self.nu.value, self.omega.value)


def grid_frequency(s: int, grid_size: int) -> Frequency:
    """The s-th grid frequency 2pi*s/grid_size, 1 <= s <= grid_size."""
    return canonicalize_frequency(TWO_PI * (s / grid_size))


# -----------------------------------------------------------------------------
# Time Series
# -----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """
    A real sample {X_{c+1}, ..., X_{c+d}} with absolute start offset c.

    `start_index` is the absolute time of the first sample minus one, so sample
    `samples[i]` sits at absolute time `start_index + 1 + i`. Phase factors in every
    estimator use these absolute times.
    """

    samples: np.ndarray
    start_index: int = 0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64).reshape(-1)
        if x.size < 1:
            raise InvalidArgumentError("time series must hold at least one sample")
        if not np.all(np.isfinite(x)):
            raise InvalidArgumentError("time series samples must be finite")
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "start_index", int(self.start_index))

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self.start_index == other.start_index and np.array_equal(
            self.samples, other.samples
        )

    @property
    def times(self) -> np.ndarray:
        """Absolute time of every sample."""
        return self.start_index + 1 + np.arange(len(self), dtype=np.int64)

    def block(self, offset: int, length: int) -> TimeSeries:
        """
        Contiguous sub-sample starting `offset` samples in, `length` samples long.

        The returned series keeps absolute time: its start_index is
        `start_index + offset`.
        """
        if offset < 0 or length < 1 or offset + length > len(self):
            raise InvalidArgumentError(
                f"block(offset={offset}, length={length}) outside series of length {len(self)}"
            )
        return TimeSeries(
            self.samples[offset : offset + length],
            start_index=self.start_index + offset,
        )

    def scaled(self, a: float) -> TimeSeries:
        return TimeSeries(a * self.samples, start_index=self.start_index)
