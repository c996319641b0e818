"""
Subsampling Inference

Subsampling estimators of the sampling distributions of the normalized magnitude
statistics, their quantiles and the confidence intervals built from them.

For a sample of length n and parameters (b, L_n, L_b), every overlapping block of
length b (stride one, blocks t = 1..n-b+1) yields the centered statistic

    sqrt(b / L_b) * (|G_hat over the block| - |G_hat over the full sample|)

and the empirical distribution of these values estimates the law of
sqrt(n / L_n) * (|G_hat_n| - |P|). The coherence version replaces |G_hat| by
|gamma_hat|.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from inference.params import SubsamplingParams
from spectra.asymptotics import PlugInTruth, law_quantile, limit_law_P
from spectra.core import (
    BifrequencyPoint,
    DegenerateDenominatorError,
    InvalidArgumentError,
    TimeSeries,
)
from spectra.estimators import (
    MeanSpec,
    block_bispectral,
    coherence_stat,
    demeaned_smoothed_bispectral,
    smoothed_bispectral,
)
from spectra.windows import LagWindowSpec, rho

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------------
# Constants
# -----------------------------------------------------------------------------

MAX_EXCLUDED_FRACTION = 0.01
_LEVEL_EPS = 1e-9


# -----------------------------------------------------------------------------
# Data Structures
# -----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Sorted subsampling statistics with the block settings that produced them."""

    values: np.ndarray
    b: int
    L_b: int
    excluded: int = 0

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=np.float64).reshape(-1))
        if v.size < 1:
            raise InvalidArgumentError("empirical distribution needs at least one value")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.size)

    def cdf(self, x: float) -> float:
        """Fraction of values <= x."""
        return float(np.searchsorted(self.values, x, side="right")) / len(self)

    def shifted(self, c: float) -> EmpiricalDistribution:
        return EmpiricalDistribution(self.values + c, self.b, self.L_b, self.excluded)


@dataclass(frozen=True)
class ConfidenceInterval:
    """
    Two-sided interval for a magnitude. `clamped_lo` / `clamped_hi` record that a
    bound was moved onto the admissible range ([0, inf) or [0, 1]).
    """

    lo: float
    hi: float
    estimate: float
    conf: float
    clamped_lo: bool = False
    clamped_hi: bool = False
    method: Literal["subsampling", "asymptotic"] = "subsampling"

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


# -----------------------------------------------------------------------------
# Distributions
# -----------------------------------------------------------------------------


def _check_params(x: TimeSeries, params: SubsamplingParams) -> None:
    params.validate(len(x))


def subsample_distribution_P(
    x: TimeSeries,
    w: LagWindowSpec,
    params: SubsamplingParams,
    p: BifrequencyPoint,
    mean: Optional[MeanSpec] = None,
) -> EmpiricalDistribution:
    """
    Subsampling distribution of sqrt(b/L_b) (|G_hat_block| - |G_hat_n|).

    Args:
        x: Full sample.
        w: Lag window.
        params: Subsampling parameters, validated against len(x).
        p: Bifrequency point.
        mean: Optional mean frequency set; when given, the demeaned estimator is
            used and the mean is re-estimated inside every block.

    Returns:
        EmpiricalDistribution of n - b + 1 values.
    """
    _check_params(x, params)
    b, L_b = int(params.b), int(params.L_b)

    if mean is None or mean.is_empty:
        full = abs(smoothed_bispectral(x, w, params.L_n, p).value)
        blocks = np.abs(block_bispectral(x, w, L_b, b, p))
    else:
        full = abs(demeaned_smoothed_bispectral(x, mean, w, params.L_n, p).value)
        blocks = np.array(
            [
                abs(demeaned_smoothed_bispectral(x.block(o, b), mean, w, L_b, p).value)
                for o in range(params.n_blocks(len(x)))
            ]
        )

    values = math.sqrt(b / L_b) * (blocks - full)
    return EmpiricalDistribution(values, b, L_b)


def subsample_distribution_gamma(
    x: TimeSeries,
    w: LagWindowSpec,
    params: SubsamplingParams,
    p: BifrequencyPoint,
) -> EmpiricalDistribution:
    """
    Subsampling distribution of sqrt(b/L_b) (|gamma_hat_block| - |gamma_hat_n|).

    Blocks whose coherence denominator vanishes are dropped and counted in
    `excluded`. More than 1% of blocks excluded is an error.
    """
    if p.is_diagonal:
        raise InvalidArgumentError("coherence subsampling requires nu != omega")
    _check_params(x, params)
    b, L_b = int(params.b), int(params.L_b)

    full = coherence_stat(x, w, params.L_n, p)

    g = block_bispectral(x, w, L_b, b, p)
    g_nu = block_bispectral(x, w, L_b, b, BifrequencyPoint(p.nu, p.nu)).real
    g_om = block_bispectral(x, w, L_b, b, BifrequencyPoint(p.omega, p.omega)).real
    denom = g_nu * g_om
    ok = (denom != 0.0) & np.isfinite(denom)

    excluded = int(ok.size - np.count_nonzero(ok))
    if excluded:
        if excluded > MAX_EXCLUDED_FRACTION * ok.size:
            first = int(np.argmin(ok))
            raise DegenerateDenominatorError(float(g_nu[first]), float(g_om[first]))
        logger.warning(
            "excluded %d of %d blocks with degenerate coherence denominator at (%.6f, %.6f)",
            excluded,
            ok.size,
            *p.as_tuple(),
        )

    coh = np.abs(g[ok]) / np.sqrt(np.abs(denom[ok]))
    values = math.sqrt(b / L_b) * (coh - full)
    return EmpiricalDistribution(values, b, L_b, excluded=excluded)


def quantile(dist: EmpiricalDistribution, level: float) -> float:
    """
    Smallest order statistic whose empirical CDF reaches `level`.

    values[ceil(level * m)] with 1-based indexing, clamped to [1, m].
    """
    m = len(dist)
    k = int(math.ceil(level * m - _LEVEL_EPS))
    k = min(max(k, 1), m)
    return float(dist.values[k - 1])


# -----------------------------------------------------------------------------
# Confidence Intervals
# -----------------------------------------------------------------------------


def _check_conf(conf: float) -> float:
    if not (0.0 < conf < 1.0):
        raise InvalidArgumentError(f"confidence level must lie in (0, 1), got {conf}")
    return 1.0 - conf


def _interval(
    estimate: float,
    q_hi: float,
    q_lo: float,
    norm: float,
    conf: float,
    upper: Optional[float],
    method: Literal["subsampling", "asymptotic"],
) -> ConfidenceInterval:
    lo = estimate - q_hi / norm
    hi = estimate - q_lo / norm
    clamped_lo = clamped_hi = False
    if lo < 0.0:
        lo, clamped_lo = 0.0, True
    if hi < 0.0:
        hi, clamped_hi = 0.0, True
    if upper is not None:
        if hi > upper:
            hi, clamped_hi = upper, True
        if lo > upper:
            lo, clamped_lo = upper, True
    return ConfidenceInterval(lo, hi, estimate, conf, clamped_lo, clamped_hi, method)


def ci_magnitude_P(
    x: TimeSeries,
    w: LagWindowSpec,
    params: SubsamplingParams,
    p: BifrequencyPoint,
    conf: float,
) -> ConfidenceInterval:
    """Equal-tailed subsampling interval for |P(p)|."""
    alpha = _check_conf(conf)
    dist = subsample_distribution_P(x, w, params, p)
    estimate = abs(smoothed_bispectral(x, w, params.L_n, p).value)
    norm = math.sqrt(len(x) / params.L_n)
    return _interval(
        estimate,
        quantile(dist, 1.0 - alpha / 2.0),
        quantile(dist, alpha / 2.0),
        norm,
        conf,
        None,
        "subsampling",
    )


def ci_coherence(
    x: TimeSeries,
    w: LagWindowSpec,
    params: SubsamplingParams,
    p: BifrequencyPoint,
    conf: float,
) -> ConfidenceInterval:
    """Equal-tailed subsampling interval for |gamma(p)|, clamped to [0, 1]."""
    alpha = _check_conf(conf)
    dist = subsample_distribution_gamma(x, w, params, p)
    estimate = coherence_stat(x, w, params.L_n, p)
    norm = math.sqrt(len(x) / params.L_n)
    return _interval(
        estimate,
        quantile(dist, 1.0 - alpha / 2.0),
        quantile(dist, alpha / 2.0),
        norm,
        conf,
        1.0,
        "subsampling",
    )


def ci_magnitude_P_asymptotic(
    x: TimeSeries,
    w: LagWindowSpec,
    params: SubsamplingParams,
    p: BifrequencyPoint,
    conf: float,
    rng: Optional[np.random.Generator] = None,
) -> ConfidenceInterval:
    """
    Interval for |P(p)| from the limit law with P replaced by its estimate.

    The plug-in truth is nonzero almost surely, so the law is normal and the
    interval symmetric; a zero estimate falls back to the folded law.
    """
    alpha = _check_conf(conf)
    truth = PlugInTruth(x, w, params.L_n)
    law = limit_law_P(truth, rho(w), p)
    estimate = abs(truth.P(p))
    norm = math.sqrt(len(x) / params.L_n)
    return _interval(
        estimate,
        law_quantile(law, 1.0 - alpha / 2.0, rng),
        law_quantile(law, alpha / 2.0, rng),
        norm,
        conf,
        None,
        "asymptotic",
    )
