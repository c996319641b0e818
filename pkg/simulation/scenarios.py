"""
Model Presets

This module provides the named data-generating models used by the command line and
the test suites, plus the parser for the model mini-language:

    pma1:T=<T>                              order-1 periodic MA, theta(t)=(2+sin(2 pi t/T))^2
    ma2                                     stationary X_t = 2 eps_{t-2} + eps_{t-1} + eps_t
    white                                   i.i.d. N(0, 1)
    pma:T=<T>;q=<q>;coeffs=<csv>[;sd=<sd>]  general periodic MA(q)

`coeffs` lists q*T values, lag by lag, and within a lag phase 0..T-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional

from simulation.models import PeriodicMAModel
from spectra.core import InvalidArgumentError

# -----------------------------------------------------------------------------
# Data Structures
# -----------------------------------------------------------------------------


@dataclass
class ModelDefinition:
    """A named model with a short description."""

    key: str
    name: str
    description: str
    model: PeriodicMAModel


# -----------------------------------------------------------------------------
# Registry
# -----------------------------------------------------------------------------

MODEL_PRESETS: Dict[str, ModelDefinition] = {
    "pma1:T=4": ModelDefinition(
        key="pma1:T=4",
        name="PMA(1), period 4",
        description="Order-1 periodic MA; spectral support on |nu - omega| in {0, pi/2, pi, 3pi/2}",
        model=PeriodicMAModel.pma1(4),
    ),
    "pma1:T=12": ModelDefinition(
        key="pma1:T=12",
        name="PMA(1), period 12",
        description="Order-1 periodic MA with vanishing g at 5pi/6 and pi",
        model=PeriodicMAModel.pma1(12),
    ),
    "ma2": ModelDefinition(
        key="ma2",
        name="MA(2)",
        description="Stationary moving average; spectral mass on the diagonal only",
        model=PeriodicMAModel.ma2(),
    ),
    "white": ModelDefinition(
        key="white",
        name="White noise",
        description="i.i.d. standard normal; null model for size checks",
        model=PeriodicMAModel.white(),
    ),
}


# -----------------------------------------------------------------------------
# Public API
# -----------------------------------------------------------------------------


def get_model_preset(key: str) -> Optional[ModelDefinition]:
    """Get a model preset by key."""
    return MODEL_PRESETS.get(key)


def list_model_presets() -> List[ModelDefinition]:
    """List all available model presets."""
    return list(MODEL_PRESETS.values())


def _parse_fields(body: str) -> Dict[str, str]:
    fields: Dict[str, str] = {}
    for part in body.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InvalidArgumentError(f"expected key=value in model spec, got '{part}'")
        k, v = part.split("=", 1)
        fields[k.strip()] = v.strip()
    return fields


def _int_field(fields: Dict[str, str], name: str, text: str) -> int:
    if name not in fields:
        raise InvalidArgumentError(f"model '{text}' is missing {name}=")
    try:
        return int(fields[name])
    except ValueError as e:
        raise InvalidArgumentError(f"bad {name} in model '{text}'") from e


def parse_model(text: str) -> PeriodicMAModel:
    """
    Resolve a model from a preset key or the model mini-language.

    Raises:
        InvalidArgumentError: unknown model or malformed parameters.
    """
    text = text.strip()
    preset = get_model_preset(text)
    if preset is not None:
        return preset.model

    kind, _, body = text.partition(":")
    fields = _parse_fields(body)

    if kind == "pma1":
        T = _int_field(fields, "T", text)
        if T < 1:
            raise InvalidArgumentError(f"period must be >= 1 in '{text}'")
        sd = float(fields.get("sd", 1.0))
        return PeriodicMAModel.pma1(T, sd)

    if kind == "white":
        return PeriodicMAModel.white(float(fields.get("sd", 1.0)))

    if kind == "pma":
        T = _int_field(fields, "T", text)
        q = _int_field(fields, "q", text)
        if "coeffs" not in fields:
            raise InvalidArgumentError(f"model '{text}' is missing coeffs=")
        try:
            values = [float(v) for v in fields["coeffs"].split(",") if v.strip()]
            sd = float(fields.get("sd", 1.0))
        except ValueError as e:
            raise InvalidArgumentError(f"bad numbers in model '{text}'") from e
        if T < 1 or q < 0 or len(values) != q * T:
            raise InvalidArgumentError(
                f"model '{text}' needs q*T = {q * T} coefficients, got {len(values)}"
            )
        coeffs = {lag + 1: tuple(values[lag * T : (lag + 1) * T]) for lag in range(q)}
        return PeriodicMAModel(T, coeffs, sd, label=text)

    raise InvalidArgumentError(f"unknown model '{text}'")
