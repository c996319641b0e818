"""
Lag Windows

Tapers w(x) for the lag-window estimators: even, zero outside [-1, 1],
non-increasing on [0, 1], flat (equal to one) on [-theta, theta] and Lipschitz on
[-1, 1]. A window produces the discrete weights H_L(tau) = w(tau / L) and the
constant rho = integral of w^2 over [-1, 1] that scales every asymptotic
covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
from scipy import integrate

from spectra.core import InvalidArgumentError

# -----------------------------------------------------------------------------
# Constants & Types
# -----------------------------------------------------------------------------

WindowKind = Literal["truncated", "trapezoid", "custom"]

VALIDATION_GRID_POINTS = 10_001
RHO_ABS_TOL = 1e-10
_TOL = 1e-12


# -----------------------------------------------------------------------------
# Data Structures
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class LagWindowSpec:
    """
    Descriptor of a lag-window taper.

    Use the constructors `truncated()`, `trapezoid(theta)` and
    `custom(taper, theta, lipschitz_W)` rather than building instances directly;
    they validate the taper contract.
    """

    kind: WindowKind = "truncated"
    theta: float = 1.0
    lipschitz_W: float = 0.0
    taper: Optional[Callable[[float], float]] = None

    @classmethod
    def truncated(cls) -> LagWindowSpec:
        return cls(kind="truncated", theta=1.0, lipschitz_W=0.0)

    @classmethod
    def trapezoid(cls, theta: float) -> LagWindowSpec:
        theta = float(theta)
        if not (0.0 < theta <= 1.0):
            raise InvalidArgumentError(f"trapezoid theta must lie in (0, 1], got {theta}")
        W = 0.0 if theta == 1.0 else 1.0 / (1.0 - theta)
        return cls(kind="trapezoid", theta=theta, lipschitz_W=W)

    @classmethod
    def custom(
        cls, taper: Callable[[float], float], theta: float, lipschitz_W: float
    ) -> LagWindowSpec:
        spec = cls(
            kind="custom",
            theta=float(theta),
            lipschitz_W=float(lipschitz_W),
            taper=taper,
        )
        validate_window(spec)
        return spec

    @property
    def label(self) -> str:
        if self.kind == "trapezoid":
            return f"trapezoid:{self.theta:g}"
        return self.kind


DEFAULT_WINDOW = LagWindowSpec.truncated()


# -----------------------------------------------------------------------------
# Taper Evaluation
# -----------------------------------------------------------------------------


def eval_taper(spec: LagWindowSpec, x: float) -> float:
    """Return w(x) for the given window; zero outside [-1, 1]."""
    ax = abs(float(x))
    if ax > 1.0:
        return 0.0
    if spec.kind == "truncated":
        return 1.0
    if spec.kind == "trapezoid":
        if ax <= spec.theta:
            return 1.0
        return (1.0 - ax) / (1.0 - spec.theta)
    assert spec.taper is not None
    return float(spec.taper(ax))


def lag_weights(spec: LagWindowSpec, L: int) -> np.ndarray:
    """
    Discrete weights H_L(tau) = w(tau / L) for tau = -L..L.

    Returns:
        Array of length 2L + 1; entry `L + tau` holds H_L(tau).
    """
    if int(L) != L or L < 1:
        raise InvalidArgumentError(f"bandwidth L must be a positive integer, got {L}")
    L = int(L)
    half = np.array([eval_taper(spec, tau / L) for tau in range(0, L + 1)])
    weights = np.concatenate([half[:0:-1], half])
    return weights


def rho(spec: LagWindowSpec) -> float:
    """Window constant rho = integral_{-1}^{1} w(x)^2 dx."""
    if spec.kind == "truncated":
        return 2.0
    if spec.kind == "trapezoid":
        return 2.0 * spec.theta + 2.0 * (1.0 - spec.theta) / 3.0
    val, _err = integrate.quad(
        lambda u: eval_taper(spec, u) ** 2,
        0.0,
        1.0,
        epsabs=RHO_ABS_TOL / 2.0,
        points=[spec.theta] if 0.0 < spec.theta < 1.0 else None,
        limit=200,
    )
    return 2.0 * val


# -----------------------------------------------------------------------------
# Validation
# -----------------------------------------------------------------------------


def validate_window(spec: LagWindowSpec) -> None:
    """
    Check the taper contract on a dense grid and raise on any violation.

    Checks: values in [0, 1], evenness, zero beyond |x| = 1, flat top on
    [-theta, theta], non-increasing on [0, 1] and the declared Lipschitz bound.
    """
    if not (0.0 < spec.theta <= 1.0):
        raise InvalidArgumentError(f"theta must lie in (0, 1], got {spec.theta}")
    if spec.lipschitz_W < 0 or not math.isfinite(spec.lipschitz_W):
        raise InvalidArgumentError("Lipschitz constant W must be finite and >= 0")
    if spec.kind != "custom":
        return
    if spec.taper is None:
        raise InvalidArgumentError("custom window needs a taper function")

    taper = spec.taper
    xs = np.linspace(-1.0, 1.0, VALIDATION_GRID_POINTS)
    vals = np.array([float(taper(x)) for x in xs])
    mirrored = np.array([float(taper(-x)) for x in xs])

    if not np.all(np.isfinite(vals)):
        raise InvalidArgumentError("taper must be finite on [-1, 1]")
    if np.any(vals < -_TOL) or np.any(vals > 1.0 + _TOL):
        raise InvalidArgumentError("taper values must lie in [0, 1]")
    if np.any(np.abs(vals - mirrored) > _TOL):
        raise InvalidArgumentError("taper must be even")

    outside = np.linspace(1.0, 2.0, 101)[1:]
    if any(abs(float(taper(x))) > _TOL for x in outside):
        raise InvalidArgumentError("taper must vanish for |x| > 1")

    flat = np.abs(xs) <= spec.theta
    if np.any(np.abs(vals[flat] - 1.0) > _TOL):
        raise InvalidArgumentError(f"taper must equal 1 on [-{spec.theta}, {spec.theta}]")

    right = vals[xs >= 0.0]
    if np.any(np.diff(right) > _TOL):
        raise InvalidArgumentError("taper must be non-increasing on [0, 1]")

    slopes = np.abs(np.diff(vals)) / np.diff(xs)
    if np.any(slopes > spec.lipschitz_W * (1.0 + 1e-9) + 1e-9):
        raise InvalidArgumentError(
            f"taper violates Lipschitz bound W={spec.lipschitz_W} "
            f"(max slope {slopes.max():.6g})"
        )


def parse_window(text: str) -> LagWindowSpec:
    """Parse the CLI window syntax `truncated` | `trapezoid:<theta>`."""
    text = text.strip().lower()
    if text == "truncated":
        return LagWindowSpec.truncated()
    if text.startswith("trapezoid:"):
        try:
            theta = float(text.split(":", 1)[1])
        except ValueError as e:
            raise InvalidArgumentError(f"bad trapezoid theta in '{text}'") from e
        return LagWindowSpec.trapezoid(theta)
    raise InvalidArgumentError(f"unknown window '{text}'")
