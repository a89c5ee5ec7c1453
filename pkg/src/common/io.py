"""
Report serialization.

JSON reports are single documents with sorted keys; CSV tables go through pandas.
Every float is written with 17 significant digits so outputs are bitwise
reproducible and round-trip exactly.
"""

import json
import math
import re
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from common.config import CSV_FLOAT_FORMAT

_FLOAT_MARK = "__wavelab_float__"
_FLOAT_PATTERN = re.compile(rf'"{_FLOAT_MARK}([^"]*)"')


def _mark_floats(obj: Any) -> Any:
    """Replace floats by marked strings so the encoder cannot reformat them."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return None
        return f"{_FLOAT_MARK}{CSV_FLOAT_FORMAT % value}"
    if isinstance(obj, np.ndarray):
        return [_mark_floats(v) for v in obj.tolist()]
    if isinstance(obj, Mapping):
        return {str(k): _mark_floats(v) for k, v in obj.items()}
    if isinstance(obj, Sequence):
        return [_mark_floats(v) for v in obj]
    raise TypeError(f"Cannot serialize object of type {type(obj).__name__}")


def dumps_report(obj: Any) -> str:
    """
    Serialize a report to JSON text.

    Non-finite floats become null (undefined ratios, missing fits).

    Args:
        obj: Nested mappings/sequences of numbers, strings, booleans and None

    Returns:
        JSON document text
    """
    text = json.dumps(_mark_floats(obj), indent=2, sort_keys=True)
    return _FLOAT_PATTERN.sub(r"\1", text) + "\n"


def write_json(path: str | Path, obj: Any) -> Path:
    """Write a report as one JSON document."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(obj))
    return path


def write_csv(path: str | Path, frame: pd.DataFrame) -> Path:
    """Write a table with a header row and 17-digit floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path
