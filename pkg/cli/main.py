"""
Command-line entry point.

Usage (from the repository root):

    PYTHONPATH=. python -m cli.main simulate --model pma1:T=4 --n 720 --seed 1 --out x.txt
    PYTHONPATH=. python -m cli.main estimate --input x.txt --lambda pi/2
    PYTHONPATH=. python -m cli.main ci --model pma1:T=4 --n 500 --lambda pi/2 --conf 0.95
    PYTHONPATH=. python -m cli.main scan --model ma2 --n 720 --grid 120 --method subs-gamma

Exit status: 0 on success, 2 on configuration or input errors, 3 on a degenerate
coherence denominator.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from cli.config import ConfigError, RunConfig
from cli.io import read_series, write_series, write_table
from inference.detect import scan
from inference.params import default_params
from inference.subsampling import ci_magnitude_P, ci_magnitude_P_asymptotic
from simulation.models import PeriodicMAModel, simulate, spectral_truth
from spectra.core import (
    BifrequencyPoint,
    DegenerateDenominatorError,
    SpectraError,
    TimeSeries,
    grid_frequency,
)
from spectra.estimators import NUMBA_AVAILABLE, coherence_stat, smoothed_bispectral

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


# -----------------------------------------------------------------------------
# Parser
# -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="Model preset or spec, e.g. pma1:T=4, ma2, white")
    common.add_argument("--input", help="Series file (alternative to --model)")
    common.add_argument("--n", type=int, help="Sample length when simulating")
    common.add_argument("--seed", type=int, default=0, help="Random seed")
    common.add_argument("--window", default="truncated", help="truncated | trapezoid:<theta>")
    common.add_argument("--Ln", dest="L_n", type=int, help="Full-sample bandwidth override")
    common.add_argument("--b", type=int, help="Block length override")
    common.add_argument("--Lb", dest="L_b", type=int, help="Block bandwidth override")
    common.add_argument("--grid", type=int, default=120, help="Frequency grid size")
    common.add_argument(
        "--method", choices=["subs-p", "subs-gamma", "chi2"], default="subs-p", help="Scan test"
    )
    common.add_argument("--alpha", type=float, default=0.01, help="Significance level")
    common.add_argument("--conf", type=float, default=0.95, help="Confidence level")
    common.add_argument(
        "--lambda", dest="lam", default=None, help="Line offset nu - omega, e.g. pi/2"
    )
    common.add_argument("--out", help="Output path")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--threads", type=int, default=None, help="Worker cap")
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    p = argparse.ArgumentParser(
        prog="apc-spectra",
        description="Bifrequency spectral estimation and periodic-correlation detection.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="Simulate a model to a series file")
    sub.add_parser("estimate", parents=[common], help="Smoothed estimates along a line")
    sub.add_parser("ci", parents=[common], help="Confidence intervals along a line")
    sub.add_parser("scan", parents=[common], help="Rejection map over the frequency grid")
    sub.add_parser("verify", parents=[common], help=argparse.SUPPRESS)
    return p


# -----------------------------------------------------------------------------
# Helpers
# -----------------------------------------------------------------------------


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _load(config: RunConfig) -> Tuple[TimeSeries, Optional[PeriodicMAModel]]:
    if config.input:
        x, _meta = read_series(config.input)
        return x, None
    model = config.resolve_model()
    assert config.n is not None
    return simulate(model, config.n, config.seed), model


def _line_points(config: RunConfig) -> List[Tuple[int, BifrequencyPoint]]:
    g = config.grid_size
    points = []
    for k in range(1, g + 1):
        nu = grid_frequency(k, g)
        points.append((k, BifrequencyPoint.of(nu, nu.value - config.lam)))
    return points


def _header(config: RunConfig, x: TimeSeries, extra: Dict[str, Any]) -> Dict[str, Any]:
    header = {k: v for k, v in config.to_dict().items() if v is not None}
    header.update({"n_samples": len(x), "start_index": x.start_index, "numba": NUMBA_AVAILABLE})
    header.update(extra)
    return header


def _map(config: RunConfig, fn, items):
    if config.threads == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=config.threads) as executor:
        return list(executor.map(fn, items))


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------


def cmd_simulate(config: RunConfig) -> int:
    model = config.resolve_model()
    assert config.n is not None
    x = simulate(model, config.n, config.seed)
    path = config.output_path
    write_series(path, x, {"seed": config.seed, "model": config.model})
    print(f"Simulated {len(x)} samples of '{config.model}' to '{path}'")
    return EXIT_OK


def cmd_estimate(config: RunConfig) -> int:
    x, model = _load(config)
    w = config.resolve_window()
    L = config.L_n if config.L_n is not None else default_params(len(x)).L_n
    truth = spectral_truth(model) if model is not None else None

    def row(item: Tuple[int, BifrequencyPoint]) -> Dict[str, Any]:
        k, p = item
        g = smoothed_bispectral(x, w, L, p).value
        try:
            coh = coherence_stat(x, w, L, p)
        except DegenerateDenominatorError:
            coh = float("nan")
        r = {
            "k": k,
            "nu": p.nu.value,
            "omega": p.omega.value,
            "re": g.real,
            "im": g.imag,
            "magnitude": abs(g),
            "coherence": coh,
        }
        if truth is not None:
            r["truth"] = abs(truth.P(p))
        return r

    frame = pd.DataFrame(_map(config, row, _line_points(config)))
    path = config.output_path
    write_table(path, frame, _header(config, x, {"L": L}), config.fmt)
    print(f"Estimated {len(frame)} points (L={L}) to '{path}'")
    if frame["coherence"].isna().all():
        print("error: coherence denominator vanished at every point", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_ci(config: RunConfig) -> int:
    x, model = _load(config)
    w = config.resolve_window()
    params = config.resolve_params(len(x))
    truth = spectral_truth(model) if model is not None else None

    def row(item: Tuple[int, BifrequencyPoint]) -> Dict[str, Any]:
        k, p = item
        sub = ci_magnitude_P(x, w, params, p, config.conf)
        asym = ci_magnitude_P_asymptotic(
            x, w, params, p, config.conf, rng=np.random.default_rng([config.seed, k])
        )
        r: Dict[str, Any] = {"k": k, "nu": p.nu.value, "omega": p.omega.value}
        if truth is not None:
            r["truth"] = abs(truth.P(p))
        r.update(
            {
                "estimate": sub.estimate,
                "lo": sub.lo,
                "hi": sub.hi,
                "clamped_lo": int(sub.clamped_lo),
                "clamped_hi": int(sub.clamped_hi),
                "asym_lo": asym.lo,
                "asym_hi": asym.hi,
            }
        )
        return r

    frame = pd.DataFrame(_map(config, row, _line_points(config)))
    path = config.output_path
    header = _header(config, x, {"b": params.b, "L_n": params.L_n, "L_b": params.L_b})
    write_table(path, frame, header, config.fmt)
    if "truth" in frame:
        cover = ((frame["lo"] <= frame["truth"]) & (frame["truth"] <= frame["hi"])).mean()
        print(f"Wrote {len(frame)} intervals to '{path}' (truth covered at {cover:.1%})")
    else:
        print(f"Wrote {len(frame)} intervals to '{path}'")
    return EXIT_OK


def cmd_scan(config: RunConfig) -> int:
    x, _model = _load(config)
    w = config.resolve_window()
    params = config.resolve_params(len(x))
    method = config.method
    result = scan(x, w, params, config.grid_size, method, config.threads)  # type: ignore[arg-type]
    frame = result.to_frame()
    path = config.output_path
    header = _header(config, x, {"b": params.b, "L_n": params.L_n, "L_b": params.L_b})
    write_table(path, frame, header, config.fmt)
    print(
        f"Scanned {len(frame)} points with {config.method}: "
        f"rejection fraction {result.rejection_fraction():.4f}, map saved to '{path}'"
    )
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    from testkit.battery import run_battery

    reports = run_battery(seed=config.seed, threads=config.threads)
    frame = pd.DataFrame([r.to_dict() for r in reports])
    print(frame.to_string(index=False))
    if config.out:
        write_table(config.out, frame, {"seed": config.seed}, config.fmt)
    failed = int((~frame["passed"]).sum()) if len(frame) else 0
    print(f"{len(frame) - failed}/{len(frame)} oracle checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAILED_CHECKS


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "ci": cmd_ci,
    "scan": cmd_scan,
    "verify": cmd_verify,
}


# -----------------------------------------------------------------------------
# Entry Point
# -----------------------------------------------------------------------------


def run(config: RunConfig) -> int:
    """Execute a validated configuration and return the exit status."""
    try:
        return COMMANDS[config.command](config)
    except DegenerateDenominatorError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConfigError, SpectraError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    try:
        config = RunConfig.from_args(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    logger.debug("resolved config: %s", config.to_dict())
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
