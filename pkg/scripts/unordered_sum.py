"""Unordered sums of nonnegative weights and the measure mu_h they induce.

Explicit families are summed exactly (math.fsum is correctly rounded, so the
result does not depend on the order of the list). Generated families are
summed with certificates: partial sums plus a tail bound, a remainder bracket
when the whole index set is summed, or a divergence certificate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from scripts.errors import (
    InvalidIndexSet,
    InvalidWeights,
    InvariantViolation,
    MismatchedDomains,
    MissingTailBound,
    NegativeCoefficient,
    NonpositiveTolerance,
    NotSummable,
    OverlappingCells,
    ResolutionLimit,
    UnboundedWindowWithoutCertificate,
    UncertifiedSum,
)
from scripts.index_sets import ALL, ExplicitSet, IndexSetExpr
from scripts.sequences import IndexMap, OrdinalIndex, WeightRule, layer_index
from scripts.settings import get_settings
from scripts.utils.logger import get_logger, log

LOG = get_logger("unordered_sum")


# ============================================================================
# RESULTS
# ============================================================================

@dataclass(frozen=True)
class SumResult:
    finite: bool
    value: float = math.inf
    error: float = 0.0

    @classmethod
    def of(cls, value: float, error: float = 0.0) -> "SumResult":
        return cls(True, max(0.0, value), max(0.0, error))

    @classmethod
    def infinite(cls) -> "SumResult":
        return cls(False)

    def __add__(self, other: "SumResult") -> "SumResult":
        if not (self.finite and other.finite):
            return INFINITE
        return SumResult.of(self.value + other.value, self.error + other.error)

    def scaled(self, c: float) -> "SumResult":
        if c == 0.0:
            return ZERO
        if not self.finite:
            return INFINITE
        return SumResult.of(c * self.value, c * self.error)

    def agrees_with(self, other: "SumResult", slack: float = 0.0) -> bool:
        if self.finite != other.finite:
            return False
        if not self.finite:
            return True
        return abs(self.value - other.value) <= self.error + other.error + slack

    def to_dict(self) -> Dict[str, Any]:
        if not self.finite:
            return {"status": "infinite"}
        return {"status": "finite", "value": self.value, "error": self.error}


ZERO = SumResult.of(0.0)
INFINITE = SumResult.infinite()


# ============================================================================
# FAMILIES
# ============================================================================

@dataclass(frozen=True)
class ExplicitFamily:
    """Finite list of (index, weight); the ordinal of an entry is its 1-based position."""

    entries: Tuple[Tuple[Hashable, float], ...] = ()

    def __post_init__(self):
        entries = tuple((s, float(w)) for s, w in self.entries)
        seen = set()
        for s, w in entries:
            if not (w >= 0.0 and math.isfinite(w)):
                raise InvalidWeights(f"weight of {s!r} must be finite and nonnegative, got {w}")
            if s in seen:
                raise InvalidWeights(f"index {s!r} appears twice")
            seen.add(s)
        object.__setattr__(self, "entries", entries)

    @property
    def index_set(self) -> frozenset:
        return frozenset(s for s, _ in self.entries)

    def weight_of(self, s: Hashable) -> float:
        for t, w in self.entries:
            if t == s:
                return w
        return 0.0

    def members(self, A: IndexSetExpr) -> List[Tuple[Hashable, float]]:
        return [(s, w) for k, (s, w) in enumerate(self.entries, start=1) if A.contains(s, k)]

    def to_dict(self) -> Dict[str, Any]:
        return {"explicit": [[s, w] for s, w in self.entries]}


@dataclass(frozen=True)
class WeightPart:
    coef: float
    rule: WeightRule
    mask: IndexSetExpr = ALL


@dataclass(frozen=True)
class GeneratedFamily:
    """h(s_k) = sum over parts of coef * rule(k) * 1[term k in mask]."""

    indices: IndexMap
    parts: Tuple[WeightPart, ...]

    @classmethod
    def of(cls, rule: WeightRule, indices: Optional[IndexMap] = None) -> "GeneratedFamily":
        return cls(indices or OrdinalIndex(), (WeightPart(1.0, rule),))

    def term(self, k: int, A: IndexSetExpr = ALL) -> float:
        s = self.indices.at(k)
        if not A.contains(s, k):
            return 0.0
        return math.fsum(p.coef * p.rule.weight(k) for p in self.parts if p.mask.contains(s, k))

    def cutoff(self, eps: float) -> Optional[int]:
        live = [p for p in self.parts if p.coef > 0.0]
        found = [0]
        for p in live:
            n = p.rule.cutoff(eps / (p.coef * len(live)))
            if n is None:
                return None
            found.append(n)
        return max(found)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "generated": {
                "indices": self.indices.to_dict(),
                "parts": [
                    {"coef": p.coef, "rule": p.rule.to_dict(), "mask": p.mask.to_dict()} for p in self.parts
                ],
            }
        }


WeightFamily = Union[ExplicitFamily, GeneratedFamily]


def counting_family(indices: Iterable[Hashable]) -> ExplicitFamily:
    """h = 1 everywhere: mu_h is the counting measure."""
    return ExplicitFamily(tuple((s, 1.0) for s in indices))


def dirac_family(s0: Hashable, indices: Iterable[Hashable] = (), mass: float = 1.0) -> ExplicitFamily:
    """h = mass * indicator of {s0}: mu_h is a (scaled) Dirac measure."""
    entries = [(s, 0.0) for s in indices if s != s0]
    entries.append((s0, float(mass)))
    return ExplicitFamily(tuple(entries))


# ============================================================================
# SUMMATION ENGINE
# ============================================================================

def _check_tol(tol: Optional[float]) -> float:
    tol = get_settings().tolerance if tol is None else tol
    if not tol > 0.0:
        raise NonpositiveTolerance(f"tol must be positive, got {tol}")
    return tol


@dataclass(frozen=True)
class _Piece:
    part: WeightPart
    members: IndexSetExpr
    k_lo: int
    k_hi: Optional[int]


def _pieces(fam: GeneratedFamily, A: IndexSetExpr) -> List[_Piece]:
    out = []
    for part in fam.parts:
        if part.coef == 0.0:
            continue
        members = A if part.mask.is_all else (part.mask if A.is_all else A & part.mask)
        k_lo, k_hi = members.hull(fam.indices)
        if part.rule.length is not None:
            k_hi = part.rule.length if k_hi is None else min(k_hi, part.rule.length)
        k_lo = max(1, k_lo)
        if k_hi is not None and k_hi < k_lo:
            continue
        out.append(_Piece(part, members, k_lo, k_hi))
    return out


def _radius(pieces: Sequence[_Piece], n: int) -> Tuple[float, float]:
    """(estimate, radius) for the part of the sum beyond ordinal n."""
    estimate, radius = 0.0, 0.0
    for piece in pieces:
        if piece.k_hi is not None and n >= piece.k_hi:
            continue
        c, rule = piece.part.coef, piece.part.rule
        if piece.members.is_all:
            e, r = rule.remainder(n)
        else:
            e, r = 0.0, rule.tail(n)
        estimate += c * e
        radius += c * r
    return estimate, radius


def _partial(fam: GeneratedFamily, A: IndexSetExpr, k_lo: int, n: int) -> float:
    return math.fsum(fam.term(k, A) for k in range(k_lo, n + 1))


def _check_resolution(fam: GeneratedFamily, A: IndexSetExpr, n: int) -> None:
    limit = fam.indices.resolution_limit
    needs = A.uses_locations or any(p.mask.uses_locations for p in fam.parts)
    if limit is not None and needs and n > limit:
        raise ResolutionLimit(f"membership of term {n} depends on an index float64 cannot resolve", limit=limit)


def _generated_sum(fam: GeneratedFamily, A: IndexSetExpr, tol: float) -> SumResult:
    settings = get_settings()
    pieces = _pieces(fam, A)
    if not pieces:
        return ZERO

    for piece in pieces:
        if piece.part.rule.divergent and piece.members.density(fam.indices)[0] > 0.0:
            log("unordered_sum", "INFO", "divergence_certified", rule=piece.part.rule.to_dict())
            return INFINITE

    k_lo = min(p.k_lo for p in pieces)
    if all(p.k_hi is not None for p in pieces):
        k_hi = max(p.k_hi for p in pieces)
        if k_hi - k_lo < settings.max_terms:
            _check_resolution(fam, A, k_hi)
            return SumResult.of(_partial(fam, A, k_lo, k_hi))

    lo, n = k_lo - 1, k_lo + 15
    estimate, radius = _radius(pieces, n)
    while radius > tol and n < settings.max_terms:
        lo, n = n, min(2 * n, settings.max_terms)
        estimate, radius = _radius(pieces, n)

    if not math.isfinite(radius):
        # no certificate either way: watch the partial sums
        total = 0.0
        for k in range(k_lo, settings.max_terms + 1):
            total += fam.term(k, A)
            if total > settings.divergence_threshold:
                log("unordered_sum", "INFO", "divergence_by_threshold", terms=k)
                return INFINITE
        raise UncertifiedSum(
            f"no tail bound and partial sums stay below {settings.divergence_threshold} after {settings.max_terms} terms",
            partial=total,
        )

    if radius > tol:
        LOG.warning(
            "tolerance not reached",
            extra={"extra_fields": {"tol": tol, "error": radius, "terms": n}},
        )
    else:
        while n - lo > 1:
            mid = (lo + n) // 2
            e_mid, r_mid = _radius(pieces, mid)
            if r_mid <= tol:
                n, estimate, radius = mid, e_mid, r_mid
            else:
                lo = mid

    _check_resolution(fam, A, n)
    value = _partial(fam, A, k_lo, n) + estimate
    if value > settings.divergence_threshold:
        return INFINITE
    return SumResult.of(value, radius)


def unordered_sum(fam: WeightFamily, A: IndexSetExpr = ALL, tol: Optional[float] = None) -> SumResult:
    """Sum of h over A; the empty sum is 0."""
    tol = _check_tol(tol)
    if isinstance(fam, ExplicitFamily):
        return SumResult.of(math.fsum(w for _, w in fam.members(A)))
    return _generated_sum(fam, A, tol)


@dataclass(frozen=True)
class UnorderedMeasure:
    """A -> sum of h over A, on every subset of the index set."""

    family: WeightFamily
    tol: Optional[float] = None

    def apply(self, A: IndexSetExpr, tol: Optional[float] = None) -> SumResult:
        return unordered_sum(self.family, A, self.tol if tol is None else tol)

    __call__ = apply


def mu(fam: WeightFamily, tol: Optional[float] = None) -> UnorderedMeasure:
    return UnorderedMeasure(fam, tol)


# ============================================================================
# CALCULUS
# ============================================================================

def restrict(fam: WeightFamily, B: IndexSetExpr) -> WeightFamily:
    """Weights h * 1_B on the same index set."""
    if B.is_all:
        return fam
    if isinstance(fam, ExplicitFamily):
        return ExplicitFamily(
            tuple((s, w if B.contains(s, k) else 0.0) for k, (s, w) in enumerate(fam.entries, start=1))
        )
    parts = tuple(
        WeightPart(p.coef, p.rule, B if p.mask.is_all else p.mask & B) for p in fam.parts
    )
    return GeneratedFamily(fam.indices, parts)


def linear_combine(alpha: float, f: WeightFamily, beta: float, g: WeightFamily) -> WeightFamily:
    for name, c in (("alpha", alpha), ("beta", beta)):
        if not (c >= 0.0 and math.isfinite(c)):
            raise NegativeCoefficient(f"{name} must be a finite nonnegative number, got {c}")
    if isinstance(f, ExplicitFamily) and isinstance(g, ExplicitFamily):
        if f.index_set != g.index_set:
            raise MismatchedDomains("explicit families must share their index set")
        g_weights = dict(g.entries)
        return ExplicitFamily(tuple((s, alpha * w + beta * g_weights[s]) for s, w in f.entries))
    if isinstance(f, GeneratedFamily) and isinstance(g, GeneratedFamily):
        if f.indices != g.indices:
            raise MismatchedDomains(f"index maps differ: {f.indices.to_dict()} vs {g.indices.to_dict()}")
        parts = tuple(WeightPart(alpha * p.coef, p.rule, p.mask) for p in f.parts) + tuple(
            WeightPart(beta * p.coef, p.rule, p.mask) for p in g.parts
        )
        return GeneratedFamily(f.indices, parts)
    raise MismatchedDomains("cannot combine an explicit family with a generated one")


def _materialized(fam: WeightFamily) -> Iterator[Tuple[Any, Optional[int]]]:
    if isinstance(fam, ExplicitFamily):
        for k, (s, _) in enumerate(fam.entries, start=1):
            yield s, k
        return
    for k in range(1, get_settings().scan_terms + 1):
        yield fam.indices.at(k), k


def check_disjoint(fam: WeightFamily, cells: Sequence[IndexSetExpr]) -> None:
    """Raise OverlappingCells when a materialized index falls in two cells."""
    for s, k in _materialized(fam):
        owners = [i for i, cell in enumerate(cells) if cell.contains(s, k)]
        if len(owners) > 1:
            raise OverlappingCells(f"index {s!r} lies in cells {owners}", index=s, cells=owners)


def partition_sum(fam: WeightFamily, cells: Sequence[IndexSetExpr], tol: Optional[float] = None) -> SumResult:
    """Sum over each cell, then sum the cell totals."""
    tol = _check_tol(tol)
    check_disjoint(fam, cells)
    total = ZERO
    for cell in cells:
        total = total + unordered_sum(fam, cell, tol)
        if not total.finite:
            return INFINITE
    return total


def sum_by_enumeration(fam: ExplicitFamily, order: Sequence[Hashable], tol: Optional[float] = None) -> SumResult:
    """Sum along a bijection onto the positive support; every bijection gives the same value."""
    _check_tol(tol)
    if not isinstance(fam, ExplicitFamily):
        raise InvalidWeights("enumeration sums need an explicit family")
    support = {s for s, w in fam.entries if w > 0.0}
    if len(order) != len(set(order)) or set(order) != support:
        raise InvalidIndexSet("order must list every index of positive weight exactly once")
    weights = dict(fam.entries)
    partial, running = [], 0.0
    for s in order:
        running += weights[s]
        partial.append(running)
    if any(b < a for a, b in zip(partial, partial[1:])):
        raise InvariantViolation("partial sums of nonnegative weights decreased")
    return SumResult.of(math.fsum(weights[s] for s in order))


# ============================================================================
# DOUBLE SERIES
# ============================================================================

@dataclass(frozen=True)
class DoubleRule:
    """(m, n) -> a_mn >= 0 for m, n >= 1.

    A product rule carries its row and column factors and gets its tail bound
    from them; otherwise ``tail(M, N)`` must bound the sum outside [1..M]x[1..N].
    """

    term: Callable[[int, int], float]
    tail: Optional[Callable[[int, int], float]] = None
    rows: Optional[WeightRule] = None
    cols: Optional[WeightRule] = None

    @classmethod
    def product(cls, rows: WeightRule, cols: WeightRule) -> "DoubleRule":
        return cls(lambda m, n: rows.weight(m) * cols.weight(n), None, rows, cols)

    def tail_bound(self, m: int, n: int) -> float:
        if self.rows is not None and self.cols is not None:
            sb = math.fsum(self.rows.weight(i) for i in range(1, m + 1))
            sc = math.fsum(self.cols.weight(j) for j in range(1, n + 1))
            tb, tc = self.rows.tail(m), self.cols.tail(n)
            if not (math.isfinite(tb) and math.isfinite(tc)):
                return math.inf
            # (sb + tb)(sc + tc) - sb*sc, expanded to avoid cancellation
            return tb * sc + sb * tc + tb * tc
        if self.tail is None:
            raise MissingTailBound("double series needs a product form or a tail bound")
        return self.tail(m, n)


@dataclass(frozen=True)
class DoubleSeriesResult:
    row_major: SumResult
    column_major: SumResult
    rows: int
    cols: int

    @property
    def consistent(self) -> bool:
        slack = 4.0 * math.ulp(max(1.0, self.row_major.value)) if self.row_major.finite else 0.0
        return self.row_major.agrees_with(self.column_major, slack)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "row_major": self.row_major.to_dict(),
            "column_major": self.column_major.to_dict(),
            "rows": self.rows,
            "cols": self.cols,
            "consistent": self.consistent,
        }


def double_series_sum(rule: DoubleRule, tol: Optional[float] = None) -> DoubleSeriesResult:
    tol = _check_tol(tol)
    settings = get_settings()
    size = 16
    bound = rule.tail_bound(size, size)
    while bound > tol and (2 * size) ** 2 <= settings.max_terms:
        size *= 2
        bound = rule.tail_bound(size, size)
    if not math.isfinite(bound):
        raise UncertifiedSum("double series tail is not finite", size=size)
    if bound > tol:
        LOG.warning("tolerance not reached", extra={"extra_fields": {"tol": tol, "error": bound, "size": size}})
    grid = [[rule.term(m, n) for n in range(1, size + 1)] for m in range(1, size + 1)]
    by_rows = math.fsum(math.fsum(row) for row in grid)
    by_cols = math.fsum(math.fsum(grid[m][n] for m in range(size)) for n in range(size))
    return DoubleSeriesResult(SumResult.of(by_rows, bound), SumResult.of(by_cols, bound), size, size)


# ============================================================================
# SUPPORT AND FINITENESS
# ============================================================================

@dataclass(frozen=True)
class SupportResult:
    members: Tuple[Any, ...]
    bound: int
    total: SumResult

    def to_dict(self) -> Dict[str, Any]:
        return {"members": list(self.members), "count": len(self.members), "bound": self.bound,
                "total": self.total.to_dict()}


def _weights_above(fam: WeightFamily, eps: float, *, strict: bool) -> List[Tuple[Any, float]]:
    keep = (lambda w: w > eps) if strict else (lambda w: w >= eps)
    if isinstance(fam, ExplicitFamily):
        return [(s, w) for s, w in fam.entries if keep(w)]
    n = fam.cutoff(eps)
    if n is None:
        raise UnboundedWindowWithoutCertificate(f"no level cutoff for weights at {eps}")
    terms = ((fam.indices.at(k), fam.term(k)) for k in range(1, n + 1))
    return [(s, w) for s, w in terms if keep(w)]


def support_at_least(fam: WeightFamily, n: int, tol: Optional[float] = None) -> SupportResult:
    """P_n = {s : h(s) > 1/n}; a summable family has at most floor(n * total) of them."""
    if n < 1:
        raise InvalidWeights(f"n must be a positive integer, got {n}")
    total = unordered_sum(fam, ALL, tol)
    if not total.finite:
        raise NotSummable("the family has infinite total weight")
    members = tuple(s for s, _ in _weights_above(fam, 1.0 / n, strict=True))
    bound = math.floor(n * (total.value + total.error))
    if len(members) > bound:
        raise InvariantViolation(f"{len(members)} weights exceed 1/{n} but the total allows {bound}")
    return SupportResult(members, bound, total)


@dataclass(frozen=True)
class PositiveSupport:
    """{h > 0}; for generated families the level-n piece P_n (level set)."""

    members: Tuple[Any, ...]
    level: Optional[int]
    total: SumResult
    support_total: SumResult


def positive_support(fam: WeightFamily, tol: Optional[float] = None, level: Optional[int] = None) -> PositiveSupport:
    total = unordered_sum(fam, ALL, tol)
    if isinstance(fam, ExplicitFamily):
        members = tuple(s for s, w in fam.entries if w > 0.0)
        return PositiveSupport(members, None, total, unordered_sum(fam, ExplicitSet(frozenset(members)), tol))
    if not total.finite:
        raise NotSummable("the positive support of a non-summable generated family is not enumerable here")
    level = level or get_settings().default_depth
    members = tuple(s for s, _ in _weights_above(fam, 1.0 / level, strict=True))
    return PositiveSupport(members, level, total, total)


@dataclass(frozen=True)
class FiniteMeasureReport:
    finite: bool
    total: SumResult
    certified: bool = True
    cells: Dict[int, Tuple[Tuple[Any, float], ...]] = field(default_factory=dict)
    cell_sums: Dict[int, float] = field(default_factory=dict)
    tail_bound: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "finite": self.finite,
            "certified": self.certified,
            "total": self.total.to_dict(),
            "cells": {str(k): [[s, w] for s, w in v] for k, v in sorted(self.cells.items())},
            "cell_sums": {str(k): v for k, v in sorted(self.cell_sums.items())},
            "tail_bound": self.tail_bound,
        }


def is_finite_measure(fam: WeightFamily, tol: Optional[float] = None, depth: Optional[int] = None) -> FiniteMeasureReport:
    """True with a witness partition into weight levels (each finite, summable
    cell totals) when the total is finite."""
    try:
        total = unordered_sum(fam, ALL, tol)
    except UncertifiedSum:
        return FiniteMeasureReport(False, INFINITE, certified=False)
    if not total.finite:
        return FiniteMeasureReport(False, total)

    depth = depth or get_settings().default_depth
    if isinstance(fam, ExplicitFamily):
        rows, tail = [(s, w) for s, w in fam.entries if w > 0.0], 0.0
    else:
        rows = _weights_above(fam, 1.0 / depth, strict=False)
        n = fam.cutoff(1.0 / depth) or 0
        tail = math.fsum(p.coef * p.rule.tail(n) for p in fam.parts if p.coef > 0.0)
        # masked parts of a divergent rule have no rule tail; bound by what the cells leave over
        residual = max(0.0, total.value + total.error - math.fsum(w for _, w in rows))
        tail = min(tail, residual)
    cells: Dict[int, List[Tuple[Any, float]]] = {}
    for s, w in rows:
        k = layer_index(w)
        if k is not None:
            cells.setdefault(k, []).append((s, w))
    frozen = {k: tuple(v) for k, v in cells.items()}
    sums = {k: math.fsum(w for _, w in v) for k, v in frozen.items()}
    return FiniteMeasureReport(True, total, True, frozen, sums, tail)
