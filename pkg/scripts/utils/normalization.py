"""Helpers to turn library results into strict JSON (no NaN/Infinity tokens)."""
from __future__ import annotations

import math
from typing import Any

import numpy as np


def normalize_number(value: float) -> Any:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def normalize_value(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): normalize_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize_value(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [normalize_value(v) for v in sorted(value, key=repr)]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return normalize_number(value)
    if hasattr(value, "to_dict"):
        return normalize_value(value.to_dict())
    return value


def normalize_structure(payload: Any) -> Any:
    """Normalize a nested payload of dicts/lists/dataclasses before dumping it."""
    return normalize_value(payload)
