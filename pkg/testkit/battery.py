"""
Oracle battery for the hidden `verify` command: a quick smoke run of every oracle
against the production code.
"""

from __future__ import annotations

import logging
import math
from typing import List

import numpy as np

from inference.params import default_params
from simulation.models import PeriodicMAModel, spectral_truth
from spectra.asymptotics import complex_cov_kernel, sigma_matrix
from spectra.core import TWO_PI, BifrequencyPoint, TimeSeries
from spectra.estimators import raw_bispectral, smoothed_bispectral
from spectra.windows import DEFAULT_WINDOW, LagWindowSpec, rho
from testkit.oracles import OracleReport, brute_force_G, ks_distance, mc_covariance

logger = logging.getLogger(__name__)

PI = math.pi


def log(msg: str) -> None:
    logger.info(msg)


def _lag_sum_cases(rng: np.random.Generator, cases: int) -> List[OracleReport]:
    reports = []
    for i in range(cases):
        n = int(rng.integers(2, 65))
        L = int(rng.integers(1, n))
        if rng.random() < 0.5:
            w = DEFAULT_WINDOW
        else:
            w = LagWindowSpec.trapezoid(float(rng.uniform(0.2, 1.0)))
        x = TimeSeries(rng.standard_normal(n), start_index=int(rng.integers(0, 50)))
        p = BifrequencyPoint.of(rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI))
        oracle = brute_force_G(x, w, L, p)
        cand = smoothed_bispectral(x, w, L, p).value
        reports.append(
            OracleReport.compare(
                f"lag-sum vs double sum #{i}", oracle, cand, rel_tol=1e-10, abs_tol=1e-10
            )
        )
    return reports


def run_battery(seed: int = 0, threads: int = 1) -> List[OracleReport]:
    """Run the quick oracle checks and return their reports."""
    rng = np.random.default_rng(seed)
    reports: List[OracleReport] = []

    log("Checking lag-sum estimator against the literal double sum...")
    reports.extend(_lag_sum_cases(rng, 20))

    alt = TimeSeries(np.array([1.0, -1.0, 1.0, -1.0]))
    g_alt = smoothed_bispectral(alt, DEFAULT_WINDOW, 1, BifrequencyPoint.of(PI, PI)).value
    reports.append(
        OracleReport.compare(
            "G(pi, pi) of [1,-1,1,-1], L=1", 5.0 / (4.0 * PI), g_alt, rel_tol=1e-12
        )
    )
    x = TimeSeries(rng.standard_normal(40), start_index=3)
    q = BifrequencyPoint.of(1.1, 2.3)
    reports.append(
        OracleReport.compare(
            "full-band window collapses to raw estimator",
            raw_bispectral(x, q).value,
            brute_force_G(x, DEFAULT_WINDOW, len(x) - 1, q),
            rel_tol=1e-10,
            abs_tol=1e-12,
        )
    )

    log("Checking closed-form spectral truth...")
    truth4 = spectral_truth(PeriodicMAModel.pma1(4))
    reports.append(
        OracleReport.compare(
            "PMA(1) T=4 g0(2pi)", 77.0 / (4.0 * PI), truth4.g0(TWO_PI), rel_tol=1e-9
        )
    )
    reports.append(
        OracleReport.compare(
            "PMA(1) T=4 |P(pi/2, -pi/2)|",
            math.sqrt(629.0) / (4.0 * PI),
            abs(truth4.at(PI / 2, -PI / 2)),
            rel_tol=1e-9,
        )
    )

    log("Checking covariance kernel and Monte Carlo covariance...")
    white = PeriodicMAModel.white()
    truth_w = spectral_truth(white)
    d = BifrequencyPoint.of(PI / 2, PI / 2)
    reports.append(
        OracleReport.compare(
            "white-noise kernel at (pi/2, pi/2)",
            1.0 / (2.0 * PI**2),
            complex_cov_kernel(truth_w, 2.0, d, d),
            rel_tol=1e-12,
        )
    )
    off = BifrequencyPoint.of(PI / 2, PI / 3)
    mc = mc_covariance(white, 2048, 4, off, off, 200, seed, threads=threads)
    sig = sigma_matrix(truth_w, off, "kernel_derived", rho(DEFAULT_WINDOW))
    for name, expected, got, se in (
        ("Var(Re G)", sig.s11, mc.re_var, mc.re_var_se),
        ("Var(Im G)", sig.s22, mc.im_var, mc.im_var_se),
    ):
        reports.append(
            OracleReport.compare(
                f"white-noise {name} off support", expected, got, rel_tol=0.15, abs_tol=3 * se
            )
        )

    log("Checking distribution distance and parameter rules...")
    ks = ks_distance(np.arange(1000), np.arange(1, 1001))
    reports.append(OracleReport.compare("KS of grid shifted by one slot", 0.001, ks, abs_tol=1e-12))
    params = default_params(720)
    expected_params = (("L_n", 4, params.L_n), ("b", 80, params.b), ("L_b", 2, params.L_b))
    for name, expected, got in expected_params:
        reports.append(OracleReport.compare(f"default {name} at n=720", expected, got, abs_tol=0.0))

    failed = sum(not r.passed for r in reports)
    log(f"Battery finished: {len(reports) - failed}/{len(reports)} passed")
    return reports
