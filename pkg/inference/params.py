"""
Subsampling parameter configuration.

This module provides the bandwidth and block-length settings for the subsampling
procedures, with the default rate rules, named presets and support for custom
overrides.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Union

from spectra.core import InvalidArgumentError

# -----------------------------------------------------------------------------
# Constants
# -----------------------------------------------------------------------------

MIN_SAMPLE_LENGTH = 16
MIN_BLOCKS = 8
DEFAULT_ALPHA = 0.01


# -----------------------------------------------------------------------------
# Data Structures
# -----------------------------------------------------------------------------


@dataclass
class SubsamplingParams:
    """
    Bandwidths and block length for the subsampling procedures.

    L_n is the bandwidth of the full-sample estimate, b the block length and L_b
    the bandwidth used inside each block. alpha is the significance level of the
    tests (quantile level 1 - alpha).
    """

    b: int
    L_n: int
    L_b: int
    alpha: float = DEFAULT_ALPHA

    # Identity/meta
    key: str = "custom"
    description: str = ""

    def validate(self, n: int, min_blocks: int = MIN_BLOCKS) -> None:
        """
        Check the parameters against a sample of length n.

        Raises:
            InvalidArgumentError: if 1 <= L_b < b <= n, 1 <= L_n < n or
                n - b + 1 >= min_blocks fails, or alpha is outside (0, 1).
        """
        for name in ("b", "L_n", "L_b"):
            v = getattr(self, name)
            if int(v) != v:
                raise InvalidArgumentError(f"{name} must be an integer, got {v}")
        if not (1 <= self.L_b < self.b <= n):
            raise InvalidArgumentError(
                f"need 1 <= L_b < b <= n, got L_b={self.L_b}, b={self.b}, n={n}"
            )
        if not (1 <= self.L_n < n):
            raise InvalidArgumentError(f"need 1 <= L_n < n, got L_n={self.L_n}, n={n}")
        if n - self.b + 1 < min_blocks:
            raise InvalidArgumentError(
                f"only {n - self.b + 1} blocks of length {self.b} in n={n}; "
                f"at least {min_blocks} required"
            )
        if not (0.0 < self.alpha < 1.0):
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {self.alpha}")

    def n_blocks(self, n: int) -> int:
        return n - self.b + 1

    def to_dict(self) -> Dict[str, Any]:
        """Convert SubsamplingParams to dictionary."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> SubsamplingParams:
        """Create SubsamplingParams from dictionary, ignoring unknown keys."""
        known_fields = {f.name for f in cls.__dataclass_fields__.values()}
        filtered_data = {k: v for k, v in data.items() if k in known_fields}
        return cls(**filtered_data)


# -----------------------------------------------------------------------------
# Rate Rules
# -----------------------------------------------------------------------------


def round_half_away(x: float) -> int:
    """Nearest integer, halves rounded away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def default_params(n: int, alpha: float = DEFAULT_ALPHA) -> SubsamplingParams:
    """
    Rate rules L_n = [n^(1/5)], b = [3 sqrt(n)], L_b = [b^(1/5)], [.] rounding
    half away from zero.

    n=720 gives (L_n, b, L_b) = (4, 80, 2).
    """
    if n < MIN_SAMPLE_LENGTH:
        raise InvalidArgumentError(
            f"sample length {n} too short for default parameters (need >= {MIN_SAMPLE_LENGTH})"
        )
    L_n = min(max(round_half_away(n ** 0.2), 1), n - 1)
    b = min(max(round_half_away(3.0 * math.sqrt(n)), 2), n)
    L_b = min(max(round_half_away(b ** 0.2), 1), b - 1)
    params = SubsamplingParams(b=b, L_n=L_n, L_b=L_b, alpha=alpha, key="default")
    params.validate(n, min_blocks=1)
    return params


# -----------------------------------------------------------------------------
# Presets
# -----------------------------------------------------------------------------

PARAM_PRESETS: Dict[str, SubsamplingParams] = {
    "scan-720": SubsamplingParams(
        key="scan-720",
        description="Grid scan setting for n=720 at significance 0.01",
        b=80,
        L_n=4,
        L_b=2,
        alpha=0.01,
    ),
    "ci-500": SubsamplingParams(
        key="ci-500",
        description="Confidence interval setting for n=500 at 95% confidence",
        b=67,
        L_n=3,
        L_b=2,
        alpha=0.05,
    ),
}


# -----------------------------------------------------------------------------
# Factory
# -----------------------------------------------------------------------------


def build_params(
    n: int, overrides: Optional[Union[str, dict, SubsamplingParams]] = None
) -> SubsamplingParams:
    """
    Resolve subsampling parameters for a sample of length n.

    Args:
        n: Sample length.
        overrides: Can be:
            - None: the default rate rules for n
            - str: preset key (e.g. "scan-720")
            - dict: overlay on a preset (if "key" names one) or on the defaults
            - SubsamplingParams: used as-is

    Returns:
        SubsamplingParams validated against n.
    """
    if overrides is None:
        params = default_params(n)

    elif isinstance(overrides, str):
        if overrides not in PARAM_PRESETS:
            raise InvalidArgumentError(f"unknown parameter preset '{overrides}'")
        params = PARAM_PRESETS[overrides]

    elif isinstance(overrides, dict):
        key = overrides.get("key")
        if key and key in PARAM_PRESETS:
            base_dict = PARAM_PRESETS[key].to_dict()
        elif all(overrides.get(k) is not None for k in ("b", "L_n", "L_b")):
            base_dict = {"key": "custom"}
        else:
            base_dict = default_params(n).to_dict()
            base_dict["key"] = "custom"
        base_dict.update({k: v for k, v in overrides.items() if v is not None})
        params = SubsamplingParams.from_dict(base_dict)

    elif isinstance(overrides, SubsamplingParams):
        params = overrides

    else:
        raise TypeError(f"Unsupported overrides type: {type(overrides)}")

    params.validate(n)
    return params
