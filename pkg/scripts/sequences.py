"""Generated nonnegative sequences k -> h_k with certified tails, and index maps k -> s_k.

These are the building blocks shared by generated jump trains (magnitudes
at locations) and generated weight families (weights at indices).
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple

from scripts.errors import InvalidWeights
from scripts.intervals import IntervalSpec

Bracket = Tuple[float, float]  # (estimate, radius)


# ============================================================================
# WEIGHT RULES
# ============================================================================

class WeightRule(ABC):
    """k -> h_k >= 0 for k = 1, 2, ... together with its certificates."""

    name: str = "abstract"

    @abstractmethod
    def weight(self, k: int) -> float: ...

    @abstractmethod
    def tail(self, n: int, power: float = 1.0) -> float:
        """Upper bound on sum_{k>n} h_k**power (inf when none is known)."""

    @abstractmethod
    def cutoff(self, eps: float) -> Optional[int]:
        """N with h_k < eps for every k > N, or None."""

    @property
    def divergent(self) -> bool:
        """True when every ordinal set of positive lower density has infinite sum."""
        return False

    @property
    def length(self) -> Optional[int]:
        return None

    def remainder(self, n: int) -> Bracket:
        """Interval (estimate +- radius) holding sum_{k>n} h_k."""
        bound = self.tail(n)
        return 0.0, bound

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]: ...


def _count_at_least(weight, eps: float, guess: int) -> int:
    """Number of leading k with weight(k) >= eps for a nonincreasing weight."""
    k = max(0, guess)
    while k > 0 and weight(k) < eps:
        k -= 1
    while weight(k + 1) >= eps:
        k += 1
    return k


def layer_index(value: float) -> Optional[int]:
    """Smallest j >= 1 with |value| >= 1/j (None for 0).

    1/j is the correctly rounded quotient, so subnormal magnitudes get a
    finite (huge) layer instead of overflowing.
    """
    size = abs(value)
    if size == 0.0:
        return None
    if size >= 1.0:
        return 1
    lo, hi = 1, math.ceil(1 / Fraction(size))
    while lo < hi:
        mid = (lo + hi) // 2
        if size >= 1 / mid:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class GeometricWeights(WeightRule):
    ratio: float
    scale: float = 1.0
    name = "geometric"

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise InvalidWeights(f"geometric ratio must lie in (0, 1), got {self.ratio}")
        if not self.scale > 0.0 or not math.isfinite(self.scale):
            raise InvalidWeights(f"geometric scale must be positive, got {self.scale}")

    def weight(self, k: int) -> float:
        return self.scale * self.ratio ** k

    def tail(self, n: int, power: float = 1.0) -> float:
        q = self.ratio ** power
        return self.scale ** power * q ** (n + 1) / (1.0 - q)

    def cutoff(self, eps: float) -> Optional[int]:
        if eps > self.weight(1):
            return 0
        guess = int(math.log(self.scale / eps) / math.log(1.0 / self.ratio))
        return _count_at_least(self.weight, eps, guess)

    def to_dict(self) -> Dict[str, Any]:
        return {"rule": "geometric", "ratio": self.ratio, "scale": self.scale}


@dataclass(frozen=True)
class PowerWeights(WeightRule):
    """h_k = scale * k**(-exponent); exponent <= 1 is the divergent (harmonic) regime."""

    exponent: float
    scale: float = 1.0
    name = "power"

    def __post_init__(self):
        if not self.exponent > 0.0:
            raise InvalidWeights(f"power exponent must be positive, got {self.exponent}")
        if not self.scale > 0.0 or not math.isfinite(self.scale):
            raise InvalidWeights(f"power scale must be positive, got {self.scale}")

    def weight(self, k: int) -> float:
        return self.scale * float(k) ** (-self.exponent)

    def tail(self, n: int, power: float = 1.0) -> float:
        s = self.exponent * power
        if s <= 1.0:
            return math.inf
        # Hermite-Hadamard: f(k) <= integral over [k-1/2, k+1/2] for convex f
        return self.scale ** power * (n + 0.5) ** (1.0 - s) / (s - 1.0)

    def remainder(self, n: int) -> Bracket:
        q = self.exponent
        if q <= 1.0:
            return math.inf, math.inf
        upper = self.scale * (n + 0.5) ** (1.0 - q) / (q - 1.0)
        # trapezoid over-estimates the integral of a convex function
        lower = self.scale * (n + 1.0) ** (1.0 - q) / (q - 1.0) + 0.5 * self.weight(n + 1)
        slack = 4.0 * math.ulp(upper) * max(1, n)
        return 0.5 * (upper + lower), 0.5 * (upper - lower) + slack

    def cutoff(self, eps: float) -> Optional[int]:
        if eps > self.scale:
            return 0
        try:
            guess = int((self.scale / eps) ** (1.0 / self.exponent))
        except OverflowError:
            return None
        return _count_at_least(self.weight, eps, guess)

    @property
    def divergent(self) -> bool:
        return self.exponent <= 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {"rule": "power_p", "p": self.exponent, "scale": self.scale}


@dataclass(frozen=True)
class TableWeights(WeightRule):
    values: Tuple[float, ...]
    name = "custom_table"

    def __post_init__(self):
        for v in self.values:
            if not (v >= 0.0 and math.isfinite(v)):
                raise InvalidWeights(f"table weights must be finite and nonnegative, got {v}")

    def weight(self, k: int) -> float:
        return self.values[k - 1] if 1 <= k <= len(self.values) else 0.0

    def tail(self, n: int, power: float = 1.0) -> float:
        return math.fsum(v ** power for v in self.values[max(n, 0):])

    def cutoff(self, eps: float) -> Optional[int]:
        last = 0
        for k, v in enumerate(self.values, start=1):
            if v >= eps:
                last = k
        return last

    @property
    def length(self) -> Optional[int]:
        return len(self.values)

    def to_dict(self) -> Dict[str, Any]:
        return {"rule": "custom_table", "values": list(self.values)}


@dataclass(frozen=True)
class ConstantWeights(WeightRule):
    value: float
    name = "constant"

    def __post_init__(self):
        if not (self.value >= 0.0 and math.isfinite(self.value)):
            raise InvalidWeights(f"constant weight must be finite and nonnegative, got {self.value}")

    def weight(self, k: int) -> float:
        return self.value

    def tail(self, n: int, power: float = 1.0) -> float:
        return math.inf if self.value > 0.0 else 0.0

    def cutoff(self, eps: float) -> Optional[int]:
        return 0 if eps > self.value else None

    @property
    def divergent(self) -> bool:
        return self.value > 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"rule": "constant", "value": self.value}


# ============================================================================
# INDEX MAPS
# ============================================================================

KRange = Tuple[int, Optional[int]]  # (k_lo, k_hi); k_hi None = unbounded; empty when k_lo > k_hi


class IndexMap(ABC):
    """k -> s_k, strictly monotone in k."""

    increasing: bool = True

    @abstractmethod
    def at(self, k: int) -> float: ...

    @abstractmethod
    def k_range(self, window: IntervalSpec) -> KRange:
        """Every k with at(k) in window lies in [k_lo, k_hi] (a superset is allowed)."""

    @property
    def infimum(self) -> float:
        return self.at(1) if self.increasing else -math.inf

    @property
    def supremum(self) -> float:
        return math.inf if self.increasing else self.at(1)

    @property
    def resolution_limit(self) -> Optional[int]:
        """Largest k whose location float64 still separates from its successor."""
        return None

    def ordinal_of(self, x: float) -> Optional[int]:
        k_lo, k_hi = self.k_range(IntervalSpec.window(x, x))
        if k_hi is None:
            k_hi = k_lo + 2
        for k in range(max(1, k_lo), k_hi + 1):
            if self.at(k) == x:
                return k
        return None

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]: ...


def _first_at_least(at, lower: float, guess: int) -> int:
    k = max(1, guess)
    while k > 1 and at(k - 1) >= lower:
        k -= 1
    while at(k) < lower:
        k += 1
    return k


def _last_at_most(at, upper: float, guess: int) -> int:
    k = max(0, guess)
    while k > 0 and at(k) > upper:
        k -= 1
    while at(k + 1) <= upper:
        k += 1
    return k


@dataclass(frozen=True)
class OrdinalIndex(IndexMap):
    def at(self, k: int) -> float:
        return float(k)

    def k_range(self, window: IntervalSpec) -> KRange:
        lo = 1 if window.lower < 1 else int(math.ceil(window.lower))
        hi = None if math.isinf(window.upper) else int(math.floor(window.upper))
        return lo, hi

    def ordinal_of(self, x: float) -> Optional[int]:
        if x >= 1 and float(x).is_integer():
            return int(x)
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "ordinal"}


@dataclass(frozen=True)
class AffineIndex(IndexMap):
    origin: float = 0.0
    step: float = 1.0

    def __post_init__(self):
        if not self.step > 0.0:
            raise InvalidWeights(f"affine index step must be positive, got {self.step}")

    def at(self, k: int) -> float:
        return self.origin + self.step * k

    def k_range(self, window: IntervalSpec) -> KRange:
        if math.isinf(window.lower):
            lo = 1
        else:
            lo = _first_at_least(self.at, window.lower, int(math.ceil((window.lower - self.origin) / self.step)))
        if math.isinf(window.upper):
            return lo, None
        hi = _last_at_most(self.at, window.upper, int(math.floor((window.upper - self.origin) / self.step)))
        return lo, hi

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "affine", "origin": self.origin, "step": self.step}


@dataclass(frozen=True)
class DyadicIndex(IndexMap):
    """s_k = origin + span * (1 - ratio**k), accumulating at origin + span."""

    origin: float = 0.0
    span: float = 1.0
    ratio: float = 0.5

    def __post_init__(self):
        if not self.span > 0.0:
            raise InvalidWeights(f"dyadic index span must be positive, got {self.span}")
        if not 0.0 < self.ratio < 1.0:
            raise InvalidWeights(f"dyadic index ratio must lie in (0, 1), got {self.ratio}")

    def at(self, k: int) -> float:
        return self.origin + self.span * (1.0 - self.ratio ** k)

    @property
    def supremum(self) -> float:
        return self.origin + self.span

    @property
    def resolution_limit(self) -> Optional[int]:
        k = 1
        while self.at(k) < self.at(k + 1) < self.supremum:
            k += 1
        return k

    def _guess(self, x: float) -> int:
        frac = (x - self.origin) / self.span
        if frac <= 0.0:
            return 1
        if frac >= 1.0:
            return self.resolution_limit or 1
        return int(math.log(1.0 - frac) / math.log(self.ratio))

    def k_range(self, window: IntervalSpec) -> KRange:
        limit = self.resolution_limit or 1
        if window.lower >= self.supremum:
            return 1, 0
        if math.isinf(window.lower) or window.lower <= self.at(1):
            lo = 1
        elif window.lower > self.at(limit):
            return limit + 1, None if window.upper >= self.supremum else limit
        else:
            lo = _first_at_least(self.at, window.lower, self._guess(window.lower))
        if window.upper >= self.supremum:
            return lo, None
        if window.upper < self.at(1):
            return lo, 0
        hi = min(limit, _last_at_most(self.at, window.upper, min(limit, self._guess(window.upper))))
        return lo, hi

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "dyadic", "origin": self.origin, "span": self.span, "ratio": self.ratio}


@dataclass(frozen=True)
class NegatedIndex(IndexMap):
    inner: IndexMap
    increasing = False

    def at(self, k: int) -> float:
        return 0.0 - self.inner.at(k)

    @property
    def infimum(self) -> float:
        return 0.0 - self.inner.supremum

    @property
    def supremum(self) -> float:
        return 0.0 - self.inner.infimum

    def k_range(self, window: IntervalSpec) -> KRange:
        return self.inner.k_range(window.reflect())

    @property
    def resolution_limit(self) -> Optional[int]:
        return self.inner.resolution_limit

    def ordinal_of(self, x: float) -> Optional[int]:
        return self.inner.ordinal_of(0.0 - x)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "negated", "inner": self.inner.to_dict()}


def index_map_from_dict(spec: Optional[Dict[str, Any]]) -> IndexMap:
    spec = spec or {"kind": "ordinal"}
    kind = spec.get("kind", "ordinal")
    if kind == "ordinal":
        return OrdinalIndex()
    if kind == "affine":
        return AffineIndex(float(spec.get("origin", 0.0)), float(spec.get("step", 1.0)))
    if kind == "dyadic":
        return DyadicIndex(float(spec.get("origin", 0.0)), float(spec.get("span", 1.0)), float(spec.get("ratio", 0.5)))
    if kind == "negated":
        return NegatedIndex(index_map_from_dict(spec.get("inner")))
    raise InvalidWeights(f"unknown index map kind {kind!r}")
