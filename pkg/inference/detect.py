"""
Detection Tests & Grid Scan

Tests of H0: P(nu, omega) = 0 at a single bifrequency point, and the scan that runs
one of them over every off-diagonal point of a g x g frequency grid. The scan's
reject flags form the rejection map: periodic correlation shows up as rejections
concentrated on the lines omega = nu - lambda.

Three tests are available:
    subs-p      sqrt(n/L_n) |G_hat_n| against the subsampling quantile of |G_hat|
    subs-gamma  sqrt(n/L_n) |gamma_hat_n| against the subsampling quantile of |gamma_hat|
    chi2        (n/L_n) (Re^2 / s11 + Im^2 / s22) against the chi-square(2) quantile,
                with s11, s22 from a plug-in covariance under H0
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd

from inference.params import SubsamplingParams
from inference.subsampling import (
    quantile,
    subsample_distribution_gamma,
    subsample_distribution_P,
)
from spectra.asymptotics import PlugInTruth, chi2_2_critical, sigma_matrix
from spectra.core import (
    TWO_PI,
    BifrequencyPoint,
    DegenerateDenominatorError,
    InvalidArgumentError,
    TimeSeries,
    grid_frequency,
)
from spectra.estimators import coherence_stat, smoothed_bispectral
from spectra.windows import LagWindowSpec, rho

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------------
# Types & Constants
# -----------------------------------------------------------------------------

TestMethod = Literal["subs-p", "subs-gamma", "chi2"]
OutcomeStatus = Literal["ok", "undetermined"]

SCAN_COLUMNS = ["s", "t", "nu", "omega", "statistic", "critical", "reject", "status"]
LINE_TOL = 1e-9


# -----------------------------------------------------------------------------
# Data Structures
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class TestOutcome:
    """Result of one test at one point. reject is False unless status is "ok"."""

    __test__ = False

    point: BifrequencyPoint
    statistic: float
    critical: float
    reject: bool
    method: TestMethod
    status: OutcomeStatus = "ok"
    message: str = ""

    @classmethod
    def decided(
        cls, point: BifrequencyPoint, statistic: float, critical: float, method: TestMethod
    ) -> TestOutcome:
        return cls(point, float(statistic), float(critical), bool(statistic > critical), method)

    @classmethod
    def undetermined(cls, point: BifrequencyPoint, method: TestMethod, message: str) -> TestOutcome:
        return cls(point, math.nan, math.nan, False, method, "undetermined", message)


@dataclass(frozen=True)
class ScanResult:
    """Outcomes of a grid scan in row-major (s, t) order."""

    grid_size: int
    indices: Tuple[Tuple[int, int], ...]
    outcomes: Tuple[TestOutcome, ...]
    params: SubsamplingParams
    method: TestMethod

    def __len__(self) -> int:
        return len(self.outcomes)

    def to_frame(self) -> pd.DataFrame:
        """The rejection map as a table with the scan CSV columns."""
        rows = []
        for (s, t), o in zip(self.indices, self.outcomes):
            rows.append(
                {
                    "s": s,
                    "t": t,
                    "nu": o.point.nu.value,
                    "omega": o.point.omega.value,
                    "statistic": o.statistic,
                    "critical": o.critical,
                    "reject": int(o.reject),
                    "status": o.status,
                }
            )
        return pd.DataFrame(rows, columns=SCAN_COLUMNS)

    @property
    def reject_flags(self) -> np.ndarray:
        return np.array([o.reject for o in self.outcomes], dtype=bool)

    @property
    def determined(self) -> np.ndarray:
        return np.array([o.status == "ok" for o in self.outcomes], dtype=bool)

    def rejection_fraction(self) -> float:
        ok = self.determined
        if not ok.any():
            return math.nan
        return float(self.reject_flags[ok].mean())

    def line_mask(self, lags: Iterable[float]) -> np.ndarray:
        """True for points with |nu - omega| equal to one of `lags`."""
        diffs = np.array([abs(o.point.nu.value - o.point.omega.value) for o in self.outcomes])
        mask = np.zeros(len(self.outcomes), dtype=bool)
        for lam in lags:
            mask |= np.abs(diffs - lam) <= LINE_TOL
        return mask

    def line_contrast(self, lags: Iterable[float]) -> Tuple[float, float]:
        """(on-line, off-line) rejection fractions among determined points."""
        on = self.line_mask(lags)
        ok = self.determined
        rej = self.reject_flags

        def frac(sel: np.ndarray) -> float:
            sel = sel & ok
            return float(rej[sel].mean()) if sel.any() else math.nan

        return frac(on), frac(~on)


# -----------------------------------------------------------------------------
# Single-Point Tests
# -----------------------------------------------------------------------------


def _normalizer(x: TimeSeries, params: SubsamplingParams) -> float:
    return math.sqrt(len(x) / params.L_n)


def test_P_subsampling(
    x: TimeSeries, w: LagWindowSpec, params: SubsamplingParams, p: BifrequencyPoint
) -> TestOutcome:
    """Reject when sqrt(n/L_n) |G_hat_n(p)| exceeds the (1 - alpha) subsampling quantile."""
    stat = _normalizer(x, params) * abs(smoothed_bispectral(x, w, params.L_n, p).value)
    crit = quantile(subsample_distribution_P(x, w, params, p), 1.0 - params.alpha)
    return TestOutcome.decided(p, stat, crit, "subs-p")


def test_gamma_subsampling(
    x: TimeSeries, w: LagWindowSpec, params: SubsamplingParams, p: BifrequencyPoint
) -> TestOutcome:
    """Coherence counterpart of test_P_subsampling; p must be off the diagonal."""
    if p.is_diagonal:
        raise InvalidArgumentError("coherence test requires nu != omega")
    try:
        stat = _normalizer(x, params) * coherence_stat(x, w, params.L_n, p)
        crit = quantile(subsample_distribution_gamma(x, w, params, p), 1.0 - params.alpha)
    except DegenerateDenominatorError as e:
        return TestOutcome.undetermined(p, "subs-gamma", str(e))
    return TestOutcome.decided(p, stat, crit, "subs-gamma")


def test_P_chi2(
    x: TimeSeries, w: LagWindowSpec, params: SubsamplingParams, p: BifrequencyPoint
) -> TestOutcome:
    """
    Chi-square(2) test with plug-in variances.

    The variances of Re G_hat and Im G_hat come from the diagonal of Sigma, built
    from smoothed estimates at the points Sigma needs, with P(p) set to zero.
    """
    truth = PlugInTruth(x, w, params.L_n, null_points=[p])
    sigma = sigma_matrix(truth, p, "kernel_derived", rho(w))
    if not (sigma.s11 > 0 and sigma.s22 > 0):
        return TestOutcome.undetermined(
            p, "chi2", f"nonpositive plug-in variance (s11={sigma.s11:.3g}, s22={sigma.s22:.3g})"
        )
    g = smoothed_bispectral(x, w, params.L_n, p).value
    stat = (len(x) / params.L_n) * (g.real**2 / sigma.s11 + g.imag**2 / sigma.s22)
    return TestOutcome.decided(p, stat, chi2_2_critical(params.alpha), "chi2")


TESTS: Dict[str, Callable[..., TestOutcome]] = {
    "subs-p": test_P_subsampling,
    "subs-gamma": test_gamma_subsampling,
    "chi2": test_P_chi2,
}


# -----------------------------------------------------------------------------
# Grid Scan
# -----------------------------------------------------------------------------


def grid_points(grid_size: int) -> List[Tuple[int, int, BifrequencyPoint]]:
    """Off-diagonal grid points (s, t, (2 pi s/g, 2 pi t/g)) in row-major order."""
    freqs = [grid_frequency(s, grid_size) for s in range(1, grid_size + 1)]
    return [
        (s, t, BifrequencyPoint(freqs[s - 1], freqs[t - 1]))
        for s in range(1, grid_size + 1)
        for t in range(1, grid_size + 1)
        if s != t
    ]


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count: explicit value, else APC_SPECTRA_THREADS, else the CPU count."""
    if threads is None:
        env = os.environ.get("APC_SPECTRA_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError as e:
                raise InvalidArgumentError(
                    f"APC_SPECTRA_THREADS must be an integer, got '{env}'"
                ) from e
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise InvalidArgumentError(f"thread count must be >= 1, got {threads}")
    return int(threads)


def scan(
    x: TimeSeries,
    w: LagWindowSpec,
    params: SubsamplingParams,
    grid_size: int,
    method: TestMethod = "subs-p",
    threads: Optional[int] = None,
) -> ScanResult:
    """
    Run one test at every off-diagonal point of the g x g grid.

    Args:
        x: Sample.
        w: Lag window.
        params: Subsampling parameters, validated against len(x).
        grid_size: g >= 2.
        method: "subs-p", "subs-gamma" or "chi2".
        threads: Worker cap (see resolve_threads).

    Returns:
        ScanResult with g(g-1) outcomes; per-point numeric failures are recorded
        as undetermined and never abort the scan.
    """
    if grid_size < 2:
        raise InvalidArgumentError(f"grid_size must be >= 2, got {grid_size}")
    if method not in TESTS:
        raise InvalidArgumentError(f"unknown test method '{method}'")
    params.validate(len(x))
    test = TESTS[method]
    workers = resolve_threads(threads)
    cells = grid_points(grid_size)

    def run_one(cell: Tuple[int, int, BifrequencyPoint]) -> TestOutcome:
        p = cell[2]
        try:
            return test(x, w, params, p)
        except (DegenerateDenominatorError, ArithmeticError) as e:
            return TestOutcome.undetermined(p, method, str(e))

    logger.info(
        "scan: method=%s grid=%d points=%d n=%d workers=%d",
        method,
        grid_size,
        len(cells),
        len(x),
        workers,
    )
    if workers == 1:
        outcomes = [run_one(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(run_one, cells))

    n_undetermined = sum(o.status == "undetermined" for o in outcomes)
    if n_undetermined:
        logger.warning("scan: %d of %d points undetermined", n_undetermined, len(outcomes))

    return ScanResult(
        grid_size=grid_size,
        indices=tuple((s, t) for s, t, _ in cells),
        outcomes=tuple(outcomes),
        params=params,
        method=method,
    )


def support_lags(period: int) -> List[float]:
    """Off-diagonal line offsets 2 pi k / T, k = 1..T-1, for a period-T model."""
    return [TWO_PI * k / period for k in range(1, period)]
