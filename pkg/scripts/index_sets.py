"""Index-set expressions (All, explicit sets, intervals, residues and their
set algebra) and the exact normal form of subsets of the real line."""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Hashable, Iterable, List, Optional, Tuple

from scripts.errors import InvalidIndexSet
from scripts.intervals import IntervalSpec
from scripts.sequences import IndexMap, KRange

Density = Tuple[float, float]  # (lower, upper) ordinal density bounds


# ============================================================================
# REAL-LINE NORMAL FORM
# ============================================================================

@dataclass(frozen=True)
class Span:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed))

    def contains(self, x: float) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True


def _span(lo: float, hi: float, lo_closed: bool, hi_closed: bool) -> Span:
    return Span(lo, hi, lo_closed and math.isfinite(lo), hi_closed and math.isfinite(hi))


@dataclass(frozen=True)
class RealSet:
    """Finite union of intervals, stored as sorted, disjoint, non-touching spans."""

    spans: Tuple[Span, ...] = ()

    @classmethod
    def of(cls, spans: Iterable[Span]) -> "RealSet":
        items = sorted((s for s in spans if not s.is_empty), key=lambda s: (s.lo, not s.lo_closed))
        merged: List[Span] = []
        for s in items:
            if merged:
                last = merged[-1]
                if s.lo < last.hi or (s.lo == last.hi and (last.hi_closed or s.lo_closed)):
                    if s.hi > last.hi or (s.hi == last.hi and s.hi_closed):
                        merged[-1] = Span(last.lo, s.hi, last.lo_closed, s.hi_closed)
                    continue
            merged.append(s)
        return cls(tuple(merged))

    @classmethod
    def line(cls) -> "RealSet":
        return cls((Span(-math.inf, math.inf, False, False),))

    @classmethod
    def points(cls, xs: Iterable[float]) -> "RealSet":
        return cls.of(Span(x, x) for x in xs)

    @classmethod
    def interval(cls, window: IntervalSpec) -> "RealSet":
        return cls.of([_span(window.lower, window.upper, not window.open_left, not window.open_right)])

    @property
    def is_empty(self) -> bool:
        return not self.spans

    def contains(self, x: float) -> bool:
        return any(s.contains(x) for s in self.spans)

    def touches(self, x: float) -> bool:
        """x lies in the closure."""
        return any(s.lo <= x <= s.hi for s in self.spans)

    def distance_to(self, x: float) -> float:
        """Distance from x to the closure (inf for the empty set)."""
        best = math.inf
        for s in self.spans:
            if s.lo <= x <= s.hi:
                return 0.0
            best = min(best, s.lo - x if s.lo > x else x - s.hi)
        return best

    def union(self, other: "RealSet") -> "RealSet":
        return RealSet.of(self.spans + other.spans)

    def complement(self) -> "RealSet":
        gaps: List[Span] = []
        cursor, cursor_closed = -math.inf, False
        for s in self.spans:
            gaps.append(_span(cursor, s.lo, cursor_closed, not s.lo_closed))
            cursor, cursor_closed = s.hi, not s.hi_closed
        gaps.append(_span(cursor, math.inf, cursor_closed, False))
        # gaps touching an infinite end come out empty and are dropped by of()
        return RealSet.of(gaps)

    def intersect(self, other: "RealSet") -> "RealSet":
        return self.complement().union(other.complement()).complement()

    def is_disjoint(self, other: "RealSet") -> bool:
        return self.intersect(other).is_empty

    def within(self, window: IntervalSpec) -> bool:
        return RealSet.interval(window).complement().is_disjoint(self)

    def to_list(self) -> List[List[Any]]:
        return [[_num(s.lo), _num(s.hi), s.lo_closed, s.hi_closed] for s in self.spans]


def _num(x: float) -> Any:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


# ============================================================================
# EXPRESSIONS
# ============================================================================

class IndexSetExpr(ABC):
    """Membership is decided per term: ``contains(s, k)`` gets the index s and,
    when the term comes from an enumeration, its ordinal k."""

    @abstractmethod
    def contains(self, s: Any, k: Optional[int] = None) -> bool: ...

    @abstractmethod
    def density(self, indices: IndexMap) -> Density:
        """Bounds on the natural density of {k : term k is a member}."""

    @abstractmethod
    def hull(self, indices: IndexMap) -> KRange:
        """Ordinals outside [k_lo, k_hi] are never members."""

    @abstractmethod
    def to_real_set(self) -> RealSet: ...

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]: ...

    @property
    def is_all(self) -> bool:
        return False

    @property
    def uses_locations(self) -> bool:
        """Membership depends on the real index s_k, not only on k."""
        return True

    def __or__(self, other: "IndexSetExpr") -> "IndexSetExpr":
        return Union((self, other))

    def __and__(self, other: "IndexSetExpr") -> "IndexSetExpr":
        return Intersection((self, other))

    def __invert__(self) -> "IndexSetExpr":
        return Complement(self)


def _is_number(s: Any) -> bool:
    return isinstance(s, (int, float)) and not isinstance(s, bool)


@dataclass(frozen=True)
class All(IndexSetExpr):
    def contains(self, s: Any, k: Optional[int] = None) -> bool:
        return True

    def density(self, indices: IndexMap) -> Density:
        return 1.0, 1.0

    def hull(self, indices: IndexMap) -> KRange:
        return 1, None

    def to_real_set(self) -> RealSet:
        return RealSet.line()

    @property
    def is_all(self) -> bool:
        return True

    @property
    def uses_locations(self) -> bool:
        return False

    def to_dict(self) -> Dict[str, Any]:
        return {"all": True}


@dataclass(frozen=True)
class ExplicitSet(IndexSetExpr):
    members: FrozenSet[Hashable] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))

    def contains(self, s: Any, k: Optional[int] = None) -> bool:
        try:
            return s in self.members
        except TypeError:
            return False

    def density(self, indices: IndexMap) -> Density:
        return 0.0, 0.0

    def ordinals(self, indices: IndexMap) -> List[int]:
        found = []
        for s in self.members:
            if _is_number(s):
                k = indices.ordinal_of(float(s))
                if k is not None and k >= 1:
                    found.append(k)
        return sorted(found)

    def hull(self, indices: IndexMap) -> KRange:
        ks = self.ordinals(indices)
        return (ks[0], ks[-1]) if ks else (1, 0)

    def to_real_set(self) -> RealSet:
        if not all(_is_number(s) for s in self.members):
            raise InvalidIndexSet("explicit set has non-numeric members; it is not a subset of the real line")
        return RealSet.points(float(s) for s in self.members)

    def to_dict(self) -> Dict[str, Any]:
        return {"explicit": sorted(self.members, key=lambda s: (not _is_number(s), s if _is_number(s) else str(s)))}


@dataclass(frozen=True)
class IndexInterval(IndexSetExpr):
    """Interval on real indices; (lower, upper] unless the flags say otherwise."""

    lower: float
    upper: float
    open_left: bool = True
    open_right: bool = False

    @property
    def window(self) -> IntervalSpec:
        return IntervalSpec.window(self.lower, self.upper, open_left=self.open_left, open_right=self.open_right)

    def contains(self, s: Any, k: Optional[int] = None) -> bool:
        return _is_number(s) and self.window.contains(float(s))

    def density(self, indices: IndexMap) -> Density:
        k_lo, k_hi = indices.k_range(self.window)
        return (1.0, 1.0) if k_hi is None else (0.0, 0.0)

    def hull(self, indices: IndexMap) -> KRange:
        return indices.k_range(self.window)

    def to_real_set(self) -> RealSet:
        return RealSet.interval(self.window)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "interval": [_num(self.lower), _num(self.upper)],
            "open_left": self.open_left,
            "open_right": self.open_right,
        }


@dataclass(frozen=True)
class Complement(IndexSetExpr):
    inner: IndexSetExpr

    def contains(self, s: Any, k: Optional[int] = None) -> bool:
        return not self.inner.contains(s, k)

    def density(self, indices: IndexMap) -> Density:
        lo, hi = self.inner.density(indices)
        return 1.0 - hi, 1.0 - lo

    def hull(self, indices: IndexMap) -> KRange:
        return 1, None

    @property
    def uses_locations(self) -> bool:
        return self.inner.uses_locations

    def to_real_set(self) -> RealSet:
        return self.inner.to_real_set().complement()

    def to_dict(self) -> Dict[str, Any]:
        return {"not": self.inner.to_dict()}


@dataclass(frozen=True)
class Union(IndexSetExpr):
    parts: Tuple[IndexSetExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, s: Any, k: Optional[int] = None) -> bool:
        return any(p.contains(s, k) for p in self.parts)

    def density(self, indices: IndexMap) -> Density:
        bounds = [p.density(indices) for p in self.parts]
        if not bounds:
            return 0.0, 0.0
        return max(lo for lo, _ in bounds), min(1.0, sum(hi for _, hi in bounds))

    def hull(self, indices: IndexMap) -> KRange:
        ranges = [r for r in (p.hull(indices) for p in self.parts) if r[1] is None or r[0] <= r[1]]
        if not ranges:
            return 1, 0
        his = [hi for _, hi in ranges]
        return min(lo for lo, _ in ranges), None if None in his else max(his)

    @property
    def is_all(self) -> bool:
        return any(p.is_all for p in self.parts)

    @property
    def uses_locations(self) -> bool:
        return any(p.uses_locations for p in self.parts)

    def to_real_set(self) -> RealSet:
        out = RealSet()
        for p in self.parts:
            out = out.union(p.to_real_set())
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {"union": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True)
class Intersection(IndexSetExpr):
    parts: Tuple[IndexSetExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, s: Any, k: Optional[int] = None) -> bool:
        return all(p.contains(s, k) for p in self.parts)

    def density(self, indices: IndexMap) -> Density:
        bounds = [p.density(indices) for p in self.parts]
        if not bounds:
            return 1.0, 1.0
        lower = max(0.0, sum(lo for lo, _ in bounds) - (len(bounds) - 1))
        return lower, min(hi for _, hi in bounds)

    def hull(self, indices: IndexMap) -> KRange:
        ranges = [p.hull(indices) for p in self.parts]
        if not ranges:
            return 1, None
        finite = [hi for _, hi in ranges if hi is not None]
        return max(lo for lo, _ in ranges), min(finite) if finite else None

    @property
    def is_all(self) -> bool:
        return bool(self.parts) and all(p.is_all for p in self.parts)

    @property
    def uses_locations(self) -> bool:
        return any(p.uses_locations for p in self.parts)

    def to_real_set(self) -> RealSet:
        out = RealSet.line()
        for p in self.parts:
            out = out.intersect(p.to_real_set())
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {"intersection": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True)
class OrdinalResidue(IndexSetExpr):
    """Terms whose enumeration ordinal k satisfies k % modulus == residue."""

    modulus: int
    residue: int

    def __post_init__(self):
        if self.modulus < 1:
            raise InvalidIndexSet(f"residue modulus must be positive, got {self.modulus}")
        object.__setattr__(self, "residue", self.residue % self.modulus)

    def contains(self, s: Any, k: Optional[int] = None) -> bool:
        return k is not None and k % self.modulus == self.residue

    def density(self, indices: IndexMap) -> Density:
        return 1.0 / self.modulus, 1.0 / self.modulus

    def hull(self, indices: IndexMap) -> KRange:
        return (self.residue or self.modulus), None

    @property
    def uses_locations(self) -> bool:
        return False

    def to_real_set(self) -> RealSet:
        raise InvalidIndexSet("ordinal residues are not subsets of the real line")

    def to_dict(self) -> Dict[str, Any]:
        return {"residue": [self.modulus, self.residue]}


EMPTY = ExplicitSet(frozenset())
ALL = All()


def _float(value: Any) -> float:
    if value in ("inf", "+inf"):
        return math.inf
    if value == "-inf":
        return -math.inf
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidIndexSet(f"not a number: {value!r}") from exc


def index_set_from_dict(spec: Any) -> IndexSetExpr:
    if not isinstance(spec, dict) or len(spec) == 0:
        raise InvalidIndexSet(f"index set must be a JSON object, got {spec!r}")
    if spec.get("all"):
        return ALL
    if "explicit" in spec:
        members = spec["explicit"]
        if not isinstance(members, list):
            raise InvalidIndexSet("'explicit' must be a list")
        return ExplicitSet(frozenset(m if not isinstance(m, list) else tuple(m) for m in members))
    if "interval" in spec:
        bounds = spec["interval"]
        if not isinstance(bounds, list) or len(bounds) != 2:
            raise InvalidIndexSet("'interval' must be [lower, upper]")
        lo, hi = _float(bounds[0]), _float(bounds[1])
        if lo > hi:
            raise InvalidIndexSet(f"interval lower {lo} exceeds upper {hi}")
        return IndexInterval(lo, hi, bool(spec.get("open_left", True)), bool(spec.get("open_right", False)))
    if "not" in spec:
        return Complement(index_set_from_dict(spec["not"]))
    if "union" in spec:
        return Union(tuple(index_set_from_dict(p) for p in spec["union"]))
    if "intersection" in spec:
        return Intersection(tuple(index_set_from_dict(p) for p in spec["intersection"]))
    if "residue" in spec:
        m, r = spec["residue"]
        return OrdinalResidue(int(m), int(r))
    raise InvalidIndexSet(f"unknown index set form {sorted(spec)}")
