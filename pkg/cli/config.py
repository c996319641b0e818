"""
Run configuration for the command line.

RunConfig collects everything a command needs from argparse and the environment,
validates it up front and resolves the window, model and subsampling parameters.
"""

from __future__ import annotations

import argparse
import math
import os
import re
from dataclasses import asdict, dataclass
from typing import Any, Dict, Literal, Optional

from inference.detect import TESTS, resolve_threads
from inference.params import SubsamplingParams, build_params
from simulation.models import PeriodicMAModel
from simulation.scenarios import parse_model
from spectra.core import InvalidArgumentError
from spectra.windows import LagWindowSpec, parse_window

# -----------------------------------------------------------------------------
# Types & Constants
# -----------------------------------------------------------------------------

Command = Literal["simulate", "estimate", "ci", "scan", "verify"]
OutputFormat = Literal["csv", "json"]

DEFAULT_OUTPUTS: Dict[str, str] = {
    "simulate": "series.txt",
    "estimate": "estimate.csv",
    "ci": "ci.csv",
    "scan": "scan.csv",
    "verify": "verify.csv",
}

_PI_EXPR = re.compile(
    r"^(?P<coef>[+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?$"
)


class ConfigError(ValueError):
    """Invalid command-line configuration."""


# -----------------------------------------------------------------------------
# Angle Literals
# -----------------------------------------------------------------------------


def parse_angle(text: str) -> float:
    """
    Parse an angle given as a number or a pi-expression.

    Accepts "1.25", "pi", "-pi", "pi/2", "3pi/2", "3*pi/4", "0.5pi".
    """
    s = str(text).strip().lower().replace(" ", "")
    m = _PI_EXPR.match(s)
    if m:
        coef = m.group("coef")
        if coef in ("", "+"):
            c = 1.0
        elif coef == "-":
            c = -1.0
        else:
            c = float(coef)
        den = float(m.group("den")) if m.group("den") else 1.0
        if den == 0:
            raise ConfigError(f"division by zero in angle '{text}'")
        return c * math.pi / den
    try:
        value = float(s)
    except ValueError as e:
        raise ConfigError(f"cannot parse angle '{text}'") from e
    if not math.isfinite(value):
        raise ConfigError(f"angle must be finite, got '{text}'")
    return value


# -----------------------------------------------------------------------------
# RunConfig
# -----------------------------------------------------------------------------


@dataclass
class RunConfig:
    """Resolved settings of one CLI command."""

    command: Command
    model: Optional[str] = None
    input: Optional[str] = None
    window: str = "truncated"
    n: Optional[int] = None
    seed: int = 0
    grid_size: int = 120
    method: str = "subs-p"
    alpha: float = 0.01
    conf: float = 0.95
    lam: float = 0.0
    L_n: Optional[int] = None
    b: Optional[int] = None
    L_b: Optional[int] = None
    out: Optional[str] = None
    fmt: OutputFormat = "csv"
    threads: int = 1
    verbose: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        """Build and validate a RunConfig from parsed arguments."""
        try:
            threads = resolve_threads(getattr(args, "threads", None))
        except InvalidArgumentError as e:
            raise ConfigError(str(e)) from e
        lam_text = getattr(args, "lam", None)
        config = cls(
            command=args.command,
            model=getattr(args, "model", None),
            input=getattr(args, "input", None),
            window=getattr(args, "window", "truncated"),
            n=getattr(args, "n", None),
            seed=getattr(args, "seed", 0),
            grid_size=getattr(args, "grid", 120),
            method=getattr(args, "method", "subs-p"),
            alpha=getattr(args, "alpha", 0.01),
            conf=getattr(args, "conf", 0.95),
            lam=parse_angle(lam_text) if lam_text is not None else 0.0,
            L_n=getattr(args, "L_n", None),
            b=getattr(args, "b", None),
            L_b=getattr(args, "L_b", None),
            out=getattr(args, "out", None),
            fmt=getattr(args, "format", "csv"),
            threads=threads,
            verbose=getattr(args, "verbose", False),
        )
        config.validate()
        return config

    def validate(self) -> None:
        """Raise ConfigError on any inconsistent setting."""
        if self.command == "verify":
            return
        if self.command == "simulate":
            if not self.model:
                raise ConfigError("simulate needs --model")
            if self.n is None:
                raise ConfigError("simulate needs --n")
        else:
            if bool(self.model) == bool(self.input):
                raise ConfigError("give exactly one of --model or --input")
            if self.model and self.n is None:
                raise ConfigError("--model needs --n")
            if self.input and not os.path.isfile(self.input):
                raise ConfigError(f"input file '{self.input}' does not exist")
        if self.n is not None and self.n < 1:
            raise ConfigError(f"--n must be >= 1, got {self.n}")
        if self.grid_size < 2:
            raise ConfigError(f"--grid must be >= 2, got {self.grid_size}")
        if self.method not in TESTS:
            raise ConfigError(f"unknown --method '{self.method}'")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"--alpha must lie in (0, 1), got {self.alpha}")
        if not (0.0 < self.conf < 1.0):
            raise ConfigError(f"--conf must lie in (0, 1), got {self.conf}")
        for name in ("L_n", "b", "L_b"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"--{name.replace('_', '')} must be >= 1, got {v}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown --format '{self.fmt}'")
        # Fail early on malformed specs.
        self.resolve_window()
        if self.model:
            self.resolve_model()

    # --- Resolution ---

    def resolve_window(self) -> LagWindowSpec:
        try:
            return parse_window(self.window)
        except InvalidArgumentError as e:
            raise ConfigError(str(e)) from e

    def resolve_model(self) -> PeriodicMAModel:
        assert self.model is not None
        try:
            return parse_model(self.model)
        except (InvalidArgumentError, ValueError) as e:
            raise ConfigError(str(e)) from e

    def resolve_params(self, n: int) -> SubsamplingParams:
        """Default rate rules for n with the --Ln/--b/--Lb/--alpha overrides applied."""
        overrides = {"L_n": self.L_n, "b": self.b, "L_b": self.L_b, "alpha": self.alpha}
        try:
            return build_params(n, overrides)
        except InvalidArgumentError as e:
            raise ConfigError(str(e)) from e

    @property
    def output_path(self) -> str:
        if self.out:
            return self.out
        default = DEFAULT_OUTPUTS[self.command]
        if self.fmt == "json" and default.endswith(".csv"):
            default = default[:-4] + ".json"
        return default

    def to_dict(self) -> Dict[str, Any]:
        """Convert RunConfig to dictionary."""
        return asdict(self)
