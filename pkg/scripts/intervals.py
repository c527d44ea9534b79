"""Host intervals and sub-windows on the real line."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from scripts.errors import InvalidInterval

INF = math.inf


class IntervalKind(str, Enum):
    COMPACT = "compact"        # [a, b]
    RIGHT_RAY = "right_ray"    # [a, inf)
    LEFT_RAY = "left_ray"      # (-inf, a]
    LINE = "line"              # R
    NONNEG = "nonneg"          # R+ = [0, inf)
    WINDOW = "window"          # any sub-interval, endpoints may be open


@dataclass(frozen=True)
class IntervalSpec:
    """A closed host interval (one of the five classes) or a sub-window.

    Host intervals are always closed at finite endpoints. Windows carry
    explicit open/closed flags so that (0, t] and friends can be expressed.
    """

    kind: IntervalKind
    lower: float = -INF
    upper: float = INF
    open_left: bool = False
    open_right: bool = False

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise InvalidInterval("interval endpoints must be numbers")
        if self.kind is IntervalKind.COMPACT and not self.lower < self.upper:
            raise InvalidInterval(f"compact interval requires a < b, got [{self.lower}, {self.upper}]")
        if self.kind is IntervalKind.WINDOW and self.lower > self.upper:
            raise InvalidInterval(f"window requires lower <= upper, got ({self.lower}, {self.upper})")
        if self.kind is not IntervalKind.WINDOW and (self.open_left or self.open_right):
            raise InvalidInterval("host intervals are closed; use a window for open ends")

    # -- constructors -----------------------------------------------------
    @classmethod
    def compact(cls, a: float, b: float) -> "IntervalSpec":
        return cls(IntervalKind.COMPACT, float(a), float(b))

    @classmethod
    def right_ray(cls, a: float) -> "IntervalSpec":
        return cls(IntervalKind.RIGHT_RAY, float(a), INF)

    @classmethod
    def left_ray(cls, a: float) -> "IntervalSpec":
        return cls(IntervalKind.LEFT_RAY, -INF, float(a))

    @classmethod
    def line(cls) -> "IntervalSpec":
        return cls(IntervalKind.LINE)

    @classmethod
    def nonneg(cls) -> "IntervalSpec":
        return cls(IntervalKind.NONNEG, 0.0, INF)

    @classmethod
    def window(cls, lower: float, upper: float, *, open_left: bool = False, open_right: bool = False) -> "IntervalSpec":
        return cls(IntervalKind.WINDOW, float(lower), float(upper), open_left=open_left, open_right=open_right)

    # -- predicates -------------------------------------------------------
    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    @property
    def is_empty(self) -> bool:
        if self.lower < self.upper:
            return False
        return self.open_left or self.open_right or not math.isfinite(self.lower)

    def contains(self, t: float) -> bool:
        if math.isnan(t):
            return False
        if t < self.lower or t > self.upper:
            return False
        if t == self.lower and (self.open_left or math.isinf(t)):
            return False
        if t == self.upper and (self.open_right or math.isinf(t)):
            return False
        return True

    def is_interior(self, t: float) -> bool:
        return self.lower < t < self.upper

    def has_left_neighborhood(self, t: float) -> bool:
        return self.contains(t) and t > self.lower

    def has_right_neighborhood(self, t: float) -> bool:
        return self.contains(t) and t < self.upper

    def within(self, other: "IntervalSpec") -> bool:
        """True when every point of self lies in other."""
        if self.is_empty:
            return True
        lo_ok = self.lower > other.lower or (
            self.lower == other.lower and (self.open_left or not other.open_left)
        )
        hi_ok = self.upper < other.upper or (
            self.upper == other.upper and (self.open_right or not other.open_right)
        )
        return lo_ok and hi_ok

    # -- transforms -------------------------------------------------------
    def reflect(self) -> "IntervalSpec":
        """-I; a host interval stays in its class (rays swap sides)."""
        kind = {
            IntervalKind.RIGHT_RAY: IntervalKind.LEFT_RAY,
            IntervalKind.LEFT_RAY: IntervalKind.RIGHT_RAY,
            IntervalKind.NONNEG: IntervalKind.LEFT_RAY,
        }.get(self.kind, self.kind)
        return IntervalSpec(kind, 0.0 - self.upper, 0.0 - self.lower, open_left=self.open_right, open_right=self.open_left)

    def as_window(self) -> "IntervalSpec":
        return IntervalSpec.window(self.lower, self.upper, open_left=self.open_left, open_right=self.open_right)

    def interior(self) -> "IntervalSpec":
        return IntervalSpec.window(self.lower, self.upper, open_left=True, open_right=True)

    def clip(self, lower: Optional[float] = None, upper: Optional[float] = None,
             *, open_left: Optional[bool] = None, open_right: Optional[bool] = None) -> "IntervalSpec":
        """Window intersected with [lower, upper] (flags apply to the new ends)."""
        lo, lo_open = self.lower, self.open_left
        hi, hi_open = self.upper, self.open_right
        if lower is not None and (lower > lo or (lower == lo and open_left)):
            lo, lo_open = lower, bool(open_left)
        if upper is not None and (upper < hi or (upper == hi and open_right)):
            hi, hi_open = upper, bool(open_right)
        if lo > hi:
            return IntervalSpec.window(lo, lo, open_left=True)
        return IntervalSpec.window(lo, hi, open_left=lo_open, open_right=hi_open)

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> Dict[str, Any]:
        if self.kind is IntervalKind.COMPACT:
            return {"kind": "compact", "a": self.lower, "b": self.upper}
        if self.kind is IntervalKind.RIGHT_RAY:
            return {"kind": "right_ray", "a": self.lower}
        if self.kind is IntervalKind.LEFT_RAY:
            return {"kind": "left_ray", "a": self.upper}
        if self.kind is IntervalKind.WINDOW:
            return {
                "kind": "window",
                "interval": [_num(self.lower), _num(self.upper)],
                "open_left": self.open_left,
                "open_right": self.open_right,
            }
        return {"kind": self.kind.value}

    def __str__(self) -> str:
        left = "(" if self.open_left or math.isinf(self.lower) else "["
        right = ")" if self.open_right or math.isinf(self.upper) else "]"
        return f"{left}{self.lower}, {self.upper}{right}"


def _num(x: float) -> Any:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x
