"""Phi-sums of jumps, cumulative jump functions and the jump counting measure
of a single realized trajectory."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from scripts.errors import (
    BNotInL,
    InvalidWeights,
    NotSummable,
    OverlappingRectangles,
    SchemaError,
    SizeSetTouchesZero,
    UnboundedWindowWithoutCertificate,
)
from scripts.expressions import ContinuousBase
from scripts.index_sets import ALL, ExplicitSet, IndexInterval, IndexSetExpr, RealSet
from scripts.intervals import IntervalSpec
from scripts.regulated_core import JumpPoint, RegulatedFn, jumps_at_least, layered_partition
from scripts.sequences import ConstantWeights, GeometricWeights, PowerWeights, WeightRule
from scripts.trains import ExplicitTrain, GeneratedTrain, JumpAtom
from scripts.unordered_sum import (
    ExplicitFamily,
    GeneratedFamily,
    SumResult,
    WeightFamily,
    unordered_sum,
)


_PROBE = (0.0, 1e-9, 1e-6, 1e-3, 0.1, 0.5, 1.0, 2.0, 10.0, 1e3)


# ============================================================================
# PHI
# ============================================================================

@dataclass(frozen=True)
class PhiSpec:
    """x -> x**p (power), x/(1+x) (bounded) or 1 - exp(-x) (expm)."""

    kind: str
    p: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power", "bounded", "expm"):
            raise SchemaError(f"unknown phi {self.kind!r}; expected power:<p>, bounded or expm")
        if self.kind == "power" and not (self.p > 0.0 and math.isfinite(self.p)):
            raise InvalidWeights(f"phi power must be positive, got {self.p}")
        values = [self(x) for x in _PROBE]
        if values[0] != 0.0 or any(b <= a for a, b in zip(values, values[1:])):
            raise InvalidWeights(f"phi {self} is not strictly increasing from 0 on the check grid")

    @classmethod
    def parse(cls, text: str) -> "PhiSpec":
        name, _, arg = text.partition(":")
        if name == "power":
            try:
                return cls("power", float(arg or 1.0))
            except ValueError as exc:
                raise SchemaError(f"bad phi exponent in {text!r}") from exc
        return cls(name)

    def __call__(self, x: float) -> float:
        if self.kind == "power":
            return x ** self.p
        if self.kind == "bounded":
            return x / (1.0 + x)
        return -math.expm1(-x)

    def inverse(self, y: float) -> Optional[float]:
        """x with phi(x) = y, or None when y is above the range of phi."""
        if self.kind == "power":
            return y ** (1.0 / self.p)
        if y >= 1.0:
            return None
        return y / (1.0 - y) if self.kind == "bounded" else -math.log1p(-y)

    @property
    def order(self) -> float:
        """phi(x) behaves like x**order near 0."""
        return self.p if self.kind == "power" else 1.0

    def __str__(self) -> str:
        return f"power:{self.p:g}" if self.kind == "power" else self.kind


@dataclass(frozen=True)
class PhiWeights(WeightRule):
    """k -> phi(m_k) for a magnitude rule m; phi(x) <= x**order bounds the tails."""

    phi: PhiSpec
    magnitudes: WeightRule
    name = "phi"

    def weight(self, k: int) -> float:
        return self.phi(self.magnitudes.weight(k))

    def tail(self, n: int, power: float = 1.0) -> float:
        return self.magnitudes.tail(n, power * self.phi.order)

    def cutoff(self, eps: float) -> Optional[int]:
        x = self.phi.inverse(eps)
        if x is None:
            return 0
        return self.magnitudes.cutoff(x)

    @property
    def divergent(self) -> bool:
        m = self.magnitudes
        if isinstance(m, PowerWeights):
            return m.exponent * self.phi.order <= 1.0
        return m.divergent

    @property
    def length(self) -> Optional[int]:
        return self.magnitudes.length

    def to_dict(self) -> Dict[str, Any]:
        return {"rule": "phi", "phi": str(self.phi), "magnitudes": self.magnitudes.to_dict()}


def phi_weights(phi: PhiSpec, magnitudes: WeightRule) -> WeightRule:
    """Closed form when phi is a power of a geometric, power or constant rule."""
    if phi.kind == "power":
        p = phi.p
        if isinstance(magnitudes, GeometricWeights):
            return GeometricWeights(magnitudes.ratio ** p, magnitudes.scale ** p)
        if isinstance(magnitudes, PowerWeights):
            return PowerWeights(magnitudes.exponent * p, magnitudes.scale ** p)
    if isinstance(magnitudes, ConstantWeights):
        return ConstantWeights(phi(magnitudes.value))
    return PhiWeights(phi, magnitudes)


# ============================================================================
# PHI-SUMS AND CUMULATIVE FUNCTIONS
# ============================================================================

def jump_family(f: RegulatedFn, phi: PhiSpec) -> WeightFamily:
    """s -> phi(|Delta f(s)|) over the jump points of f."""
    if isinstance(f.train, ExplicitTrain):
        rows = tuple((a.loc, phi(abs(a.jump))) for a in f.train.atoms if a.jump != 0.0)
        return ExplicitFamily(rows)
    return GeneratedFamily.of(phi_weights(phi, f.train.magnitudes), f.train.locations)


def phi_sum_of_jumps(f: RegulatedFn, phi: PhiSpec, B: IndexSetExpr, tol: Optional[float] = None) -> SumResult:
    """Sum over s in B of phi(|Delta f(s)|); B must lie inside the interior of the domain."""
    if not B.to_real_set().within(f.interior):
        raise BNotInL(f"time set {B.to_dict()} is not inside {f.interior}")
    return unordered_sum(jump_family(f, phi), B, tol)


def phi_sum_by_layers(f: RegulatedFn, phi: PhiSpec, window: IntervalSpec, depth: Optional[int] = None) -> SumResult:
    """The same sum taken cell by cell over a layered partition (tail reported as error)."""
    partition = layered_partition(f, window, depth)
    cell_sums = [math.fsum(phi(abs(jump)) for _, jump in partition.layer(k)) for k in sorted(partition.cells)]
    floor = 1.0 / partition.depth
    if partition.complete:
        tail = 0.0
    elif isinstance(f.train, GeneratedTrain):
        n = f.train.level_cutoff(floor, partition.window) or 0
        tail = f.train.mass_tail(n, partition.window, phi.order)
    else:
        tail = math.fsum(phi(abs(a.jump)) for a in f.train.in_window(partition.window) if 0.0 < abs(a.jump) < floor)
    return SumResult.of(math.fsum(cell_sums), tail)


def cumulative_jump_function(weights: WeightFamily, tol: Optional[float] = None) -> RegulatedFn:
    """g(t) = sum of h(s) over s in (0, t], on [0, inf) with base 0."""
    total = unordered_sum(weights, ALL, tol)
    if not total.finite:
        raise NotSummable("cumulative jump function needs a summable family")
    domain = IntervalSpec.nonneg()
    if isinstance(weights, ExplicitFamily):
        atoms = []
        for s, w in weights.entries:
            if not isinstance(s, (int, float)) or isinstance(s, bool) or not s > 0.0:
                raise InvalidWeights(f"support points must be positive reals, got {s!r}")
            if w > 0.0:
                atoms.append(JumpAtom(float(s), w, 0.0))
        return RegulatedFn.build(domain, ContinuousBase.zero(), ExplicitTrain.build(atoms))
    if len(weights.parts) != 1 or not weights.parts[0].mask.is_all:
        raise InvalidWeights("a generated family must be a single unrestricted rule to become a jump train")
    part = weights.parts[0]
    if part.coef != 1.0:
        raise InvalidWeights("scaled generated families cannot be cumulated; fold the coefficient into the rule")
    indices = weights.indices
    positive = indices.at(1) > 0.0 if indices.increasing else indices.infimum >= 0.0
    if not positive:
        raise InvalidWeights(f"support points must be positive reals, index map {indices.to_dict()} leaves (0, inf)")
    train = GeneratedTrain(part.rule, weights.indices, split=1.0, rule="cumulative", params=part.rule.to_dict())
    return RegulatedFn(domain, ContinuousBase.zero(), train)


# ============================================================================
# JUMP COUNTING MEASURE
# ============================================================================

@dataclass(frozen=True)
class Rectangle:
    """G = B x Lambda, B a set of times and Lambda a set of jump sizes."""

    time_set: IndexSetExpr
    size_set: IndexSetExpr

    @property
    def times(self) -> RealSet:
        return self.time_set.to_real_set()

    @property
    def sizes(self) -> RealSet:
        return self.size_set.to_real_set()

    def contains(self, s: float, jump: float) -> bool:
        return self.time_set.contains(s) and self.size_set.contains(jump)

    def is_disjoint(self, other: "Rectangle") -> bool:
        return self.times.is_disjoint(other.times) or self.sizes.is_disjoint(other.sizes)

    def to_dict(self) -> Dict[str, Any]:
        return {"time": self.time_set.to_dict(), "size": self.size_set.to_dict()}


def complement_ball(eps: float) -> IndexSetExpr:
    """R minus (-eps, eps); eps = 0 gives R minus {0}."""
    if eps == 0.0:
        return ~ExplicitSet(frozenset({0.0}))
    return ~IndexInterval(-eps, eps, open_left=True, open_right=True)


def _fn(path: Any) -> RegulatedFn:
    return getattr(path, "fn", path)


def _positive_times(f: RegulatedFn, rect: Rectangle) -> IntervalSpec:
    span = rect.times.intersect(RealSet.interval(f.interior)).intersect(
        RealSet.interval(IntervalSpec.window(0.0, math.inf, open_left=True))
    )
    if span.is_empty:
        return IntervalSpec.window(0.0, 0.0, open_left=True)
    first, last = span.spans[0], span.spans[-1]
    return IntervalSpec.window(first.lo, last.hi, open_left=not first.lo_closed, open_right=not last.hi_closed)


def jump_graph(path: Any, window: Optional[IntervalSpec] = None, eps: Optional[float] = None) -> Tuple[JumpPoint, ...]:
    """M = {(s, Delta X_s) : s a jump time}, sorted by time. Generated trains need eps."""
    f = _fn(path)
    scan = window or f.interior
    if isinstance(f.train, ExplicitTrain):
        clipped = scan.clip(f.domain.lower, f.domain.upper, open_left=True, open_right=True)
        points = [(a.loc, a.jump) for a in f.train.in_window(clipped) if a.jump != 0.0]
        if eps is not None:
            points = [p for p in points if abs(p[1]) >= eps]
        return tuple(points)
    if eps is None:
        raise UnboundedWindowWithoutCertificate("the jump graph of a generated train is infinite; pass eps")
    return tuple(jumps_at_least(f, eps, scan))


def _candidates(f: RegulatedFn, rect: Rectangle) -> List[JumpPoint]:
    window = _positive_times(f, rect)
    if window.is_empty:
        return []
    if isinstance(f.train, ExplicitTrain):
        return list(jump_graph(f, window))
    clearance = rect.sizes.distance_to(0.0)
    if clearance == 0.0:
        raise SizeSetTouchesZero(
            "the size set reaches 0, so a generated train may put infinitely many jumps in it",
            size=rect.size_set.to_dict(),
        )
    if math.isinf(clearance):
        return []
    return jumps_at_least(f, clearance, window)


def jump_counting_measure(path: Any, rect: Rectangle) -> int:
    """j_X(G): the indicator weights 1_Lambda(Delta X_s) summed over jump times s > 0 in B."""
    f = _fn(path)
    points = _candidates(f, rect)
    family = ExplicitFamily(tuple((s, 1.0 if rect.size_set.contains(jump) else 0.0) for s, jump in points))
    result = unordered_sum(family, rect.time_set)
    return int(result.value)


def card_in(graph: Sequence[JumpPoint], rect: Rectangle) -> int:
    """card(M intersected with G) by direct enumeration."""
    return sum(1 for s, jump in graph if s > 0.0 and jump != 0.0 and rect.contains(s, jump))


def count_via_stopping_times(path: Any, rect: Rectangle) -> int:
    """j_X(G) = sum over m of 1_G(T_m, Delta X_{T_m}) along the stopping-time enumeration."""
    from scripts.path_sim import stopping_times

    f = _fn(path)
    seq = stopping_times(path)
    jumps = dict(jump_graph(f))
    return sum(1 for t in seq.times if rect.contains(t, jumps[t]))


@dataclass(frozen=True)
class AdditivityReport:
    counts: Tuple[int, ...]
    total: int
    union_count: int

    @property
    def ok(self) -> bool:
        return self.total == self.union_count

    def to_dict(self) -> Dict[str, Any]:
        return {"counts": list(self.counts), "total": self.total, "union_count": self.union_count, "ok": self.ok}


def jump_measure_additivity_check(path: Any, rects: Sequence[Rectangle]) -> AdditivityReport:
    for i, a in enumerate(rects):
        for j in range(i + 1, len(rects)):
            if not a.is_disjoint(rects[j]):
                raise OverlappingRectangles(f"rectangles {i} and {j} intersect", first=i, second=j)
    counts = tuple(jump_counting_measure(path, r) for r in rects)
    f = _fn(path)
    seen = set()
    for r in rects:
        seen.update(p for p in _candidates(f, r) if r.contains(*p))
    return AdditivityReport(counts, sum(counts), len(seen))
