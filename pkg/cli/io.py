"""
Series and table files.

Series files hold one sample per line in full-precision decimal text, preceded by
optional `# key=value` header lines (start_index, seed, model). Tables are written
with pandas as CSV (header lines first) or as JSON with the resolved configuration
alongside the rows.
"""

from __future__ import annotations

import json
from typing import Any, Dict, Mapping, Tuple

import numpy as np
import pandas as pd

from spectra.core import TimeSeries

SERIES_FMT = "%.17g"


def _header_lines(header: Mapping[str, Any]) -> str:
    return "\n".join(f"{k}={v}" for k, v in header.items())


def write_series(path: str, x: TimeSeries, header: Mapping[str, Any]) -> None:
    """Write a series with `# key=value` headers; start_index is always recorded."""
    meta = {"start_index": x.start_index, **{k: v for k, v in header.items() if k != "start_index"}}
    np.savetxt(path, x.samples, fmt=SERIES_FMT, header=_header_lines(meta), comments="# ")


def read_header(path: str) -> Dict[str, str]:
    meta: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
    return meta


def read_series(path: str) -> Tuple[TimeSeries, Dict[str, str]]:
    """
    Read a series file.

    Raises:
        OSError: unreadable file.
        ValueError: malformed numbers; InvalidArgumentError for empty or
            non-finite samples.
    """
    meta = read_header(path)
    samples = np.loadtxt(path, comments="#", dtype=np.float64, ndmin=1)
    start = int(meta.get("start_index", 0))
    return TimeSeries(samples, start_index=start, metadata=dict(meta)), meta


def write_table(
    path: str, frame: pd.DataFrame, header: Mapping[str, Any], fmt: str = "csv"
) -> None:
    """Write a result table with the run configuration echoed into it."""
    if fmt == "json":
        payload = {
            "config": {k: v for k, v in header.items()},
            "rows": json.loads(frame.to_json(orient="records", double_precision=15)),
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, default=str)
        return

    with open(path, "w", encoding="utf-8", newline="") as f:
        for k, v in header.items():
            f.write(f"# {k}={v}\n")
        frame.to_csv(f, index=False, float_format="%.17g")


def read_table(path: str) -> pd.DataFrame:
    """Read a CSV result table, skipping the header comment lines."""
    return pd.read_csv(path, comment="#")
