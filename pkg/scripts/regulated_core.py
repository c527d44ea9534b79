"""Regulated functions: continuous base plus a summable jump train.

Values, one-sided limits, jumps, epsilon-level jump sets, layered partitions,
reflection and the f(t+) / f(t-) companions all live here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from scripts.errors import (
    BoundaryPoint,
    InvalidInterval,
    InvalidTrain,
    NoLeftNeighborhood,
    NonpositiveEpsilon,
    NonpositiveTolerance,
    NoRightNeighborhood,
    OutOfDomain,
    SaltosError,
    UnboundedWindowWithoutCertificate,
    UncertifiedSum,
)
from scripts.expressions import ContinuousBase
from scripts.intervals import IntervalKind, IntervalSpec
from scripts.sequences import layer_index
from scripts.settings import get_settings
from scripts.trains import ExplicitTrain, GeneratedTrain, JumpAtom, JumpTrain
from scripts.utils.logger import get_logger

LOG = get_logger("regulated_core")

JumpPoint = Tuple[float, float]  # (loc, jump)


class Orientation(str, Enum):
    """Where the value at t is anchored.

    LEFT:  f(t) = base(t) + sum_{loc<t} (lambda+rho) + lambda_t
    RIGHT: f(t) = base(t) - sum_{loc>t} (lambda+rho) - rho_t
    """

    LEFT = "left"
    RIGHT = "right"

    def flipped(self) -> "Orientation":
        return Orientation.RIGHT if self is Orientation.LEFT else Orientation.LEFT


@dataclass(frozen=True)
class RegulatedFn:
    domain: IntervalSpec
    base: ContinuousBase
    train: JumpTrain = field(default_factory=ExplicitTrain)
    orientation: Orientation = Orientation.LEFT

    @classmethod
    def build(cls, domain: IntervalSpec, base: ContinuousBase, train: JumpTrain,
              orientation: Orientation = Orientation.LEFT) -> "RegulatedFn":
        """Checked constructor; the bare one accepts anything so ``validate`` can inspect it."""
        if domain.kind is IntervalKind.WINDOW:
            raise InvalidInterval("a function domain must be a host interval, not a window")
        base.check_continuous(domain)
        if isinstance(train, ExplicitTrain):
            for atom in train.atoms:
                if not domain.is_interior(atom.loc):
                    raise InvalidTrain(f"atom at {atom.loc} is not interior to {domain}", loc=atom.loc)
        return cls(domain, base, train, orientation)

    @property
    def interior(self) -> IntervalSpec:
        return self.domain.interior()


# ============================================================================
# JUMP SUMS
# ============================================================================

def _certified_cutoff(train: GeneratedTrain, window: IntervalSpec, tol: float, k_lo: int) -> Tuple[int, float]:
    """Smallest N (found by doubling then bisection) with tau(N, window) <= tol."""
    settings = get_settings()
    lo, n = k_lo - 1, k_lo + 15
    while True:
        bound = train.mass_tail(n, window)
        if bound <= tol:
            break
        if n > settings.max_terms:
            raise UncertifiedSum(
                f"tail of rule {train.rule!r} stays above tol={tol} after {n} terms",
                terms=n,
                tail=bound,
            )
        lo, n = n, n * 2
    while n - lo > 1:
        mid = (lo + n) // 2
        mid_bound = train.mass_tail(mid, window)
        if mid_bound <= tol:
            n, bound = mid, mid_bound
        else:
            lo = mid
    return n, bound


def window_jump_sum(train: JumpTrain, window: IntervalSpec, tol: Optional[float] = None) -> Tuple[float, float]:
    """(sum of lambda+rho over atoms in window, error bound)."""
    if tol is not None and not tol > 0.0:
        raise NonpositiveTolerance(f"tol must be positive, got {tol}")
    if window.is_empty:
        return 0.0, 0.0
    if isinstance(train, ExplicitTrain):
        return train.jump_sum(window), 0.0
    settings = get_settings()
    tol = settings.tolerance if tol is None else tol
    k_lo, k_hi = train.k_range(window)
    k_lo = max(1, k_lo)
    if k_hi is not None and k_hi < k_lo:
        return 0.0, 0.0
    if k_hi is not None and k_hi - k_lo < settings.max_terms:
        n, error = k_hi, 0.0
    else:
        n, error = _certified_cutoff(train, window, tol, k_lo)
    train.check_resolvable(n)
    total = math.fsum(a.jump for _, a in train.iter_window(window, upto=n))
    return total, error


def atom_at(train: JumpTrain, t: float) -> Optional[JumpAtom]:
    if isinstance(train, ExplicitTrain):
        return train.atom_at(t)
    k = train.locations.ordinal_of(t)
    if k is None or k < 1:
        return None
    atom = train.atom(k)
    return None if atom.is_degenerate or atom.loc != t else atom


def _gaps_at(f: RegulatedFn, t: float) -> Tuple[float, float]:
    if not f.domain.is_interior(t):
        return 0.0, 0.0
    atom = atom_at(f.train, t)
    return (atom.left_gap, atom.right_gap) if atom else (0.0, 0.0)


def _before(f: RegulatedFn, t: float, *, inclusive: bool) -> IntervalSpec:
    return IntervalSpec.window(f.domain.lower, t, open_left=True, open_right=not inclusive)


def _after(f: RegulatedFn, t: float, *, inclusive: bool) -> IntervalSpec:
    return IntervalSpec.window(t, f.domain.upper, open_left=not inclusive, open_right=True)


def _require_member(f: RegulatedFn, t: float) -> None:
    if not f.domain.contains(t):
        raise OutOfDomain(f"t={t} is outside {f.domain}", t=t)


# ============================================================================
# VALUES AND LIMITS
# ============================================================================

def eval_at(f: RegulatedFn, t: float, tol: Optional[float] = None) -> float:
    _require_member(f, t)
    left_gap, right_gap = _gaps_at(f, t)
    if f.orientation is Orientation.LEFT:
        total, _ = window_jump_sum(f.train, _before(f, t, inclusive=False), tol)
        return f.base(t) + total + left_gap
    total, _ = window_jump_sum(f.train, _after(f, t, inclusive=False), tol)
    return f.base(t) - total - right_gap


def left_limit(f: RegulatedFn, t: float, tol: Optional[float] = None) -> float:
    _require_member(f, t)
    if not f.domain.has_left_neighborhood(t):
        raise NoLeftNeighborhood(f"no points of {f.domain} to the left of t={t}", t=t)
    if f.orientation is Orientation.LEFT:
        total, _ = window_jump_sum(f.train, _before(f, t, inclusive=False), tol)
        return f.base(t) + total
    total, _ = window_jump_sum(f.train, _after(f, t, inclusive=True), tol)
    return f.base(t) - total


def right_limit(f: RegulatedFn, t: float, tol: Optional[float] = None) -> float:
    _require_member(f, t)
    if not f.domain.has_right_neighborhood(t):
        raise NoRightNeighborhood(f"no points of {f.domain} to the right of t={t}", t=t)
    if f.orientation is Orientation.LEFT:
        total, _ = window_jump_sum(f.train, _before(f, t, inclusive=True), tol)
        return f.base(t) + total
    total, _ = window_jump_sum(f.train, _after(f, t, inclusive=False), tol)
    return f.base(t) - total


def jump_at(f: RegulatedFn, t: float) -> float:
    """Delta f(t) = f(t+) - f(t-), read directly off the atom at t."""
    _require_member(f, t)
    if not f.domain.is_interior(t):
        raise BoundaryPoint(f"t={t} is an endpoint of {f.domain}", t=t)
    left_gap, right_gap = _gaps_at(f, t)
    return left_gap + right_gap


def jump_process(f: RegulatedFn, t: float) -> float:
    """jump_at on the whole domain, with 0 at the endpoints."""
    _require_member(f, t)
    if not f.domain.is_interior(t):
        return 0.0
    return jump_at(f, t)


# ============================================================================
# EPSILON-LEVEL JUMP SETS
# ============================================================================

def _scan_window(f: RegulatedFn, window: Optional[IntervalSpec]) -> IntervalSpec:
    if window is None:
        return f.interior
    if not window.within(f.domain):
        raise OutOfDomain(f"window {window} is not inside {f.domain}")
    return window.clip(f.domain.lower, f.domain.upper, open_left=True, open_right=True)


def jumps_at_least(f: RegulatedFn, eps: float, window: Optional[IntervalSpec] = None) -> List[JumpPoint]:
    if not eps > 0.0:
        raise NonpositiveEpsilon(f"eps must be positive, got {eps}")
    scan = _scan_window(f, window)
    if scan.is_empty:
        return []
    if isinstance(f.train, ExplicitTrain):
        return [(a.loc, a.jump) for a in f.train.in_window(scan) if abs(a.jump) >= eps]
    n = f.train.level_cutoff(eps, scan)
    if n is None:
        raise UnboundedWindowWithoutCertificate(
            f"rule {f.train.rule!r} has no level cutoff for eps={eps} on {scan}", eps=eps
        )
    f.train.check_resolvable(n)
    found = [(a.loc, a.jump) for _, a in f.train.iter_window(scan, upto=n) if abs(a.jump) >= eps]
    return sorted(found)


@dataclass(frozen=True)
class LayeredPartition:
    """Finite cells D_k indexed by k >= 1; empty cells are not stored."""

    window: IntervalSpec
    depth: int
    cells: Dict[int, Tuple[JumpPoint, ...]] = field(default_factory=dict)
    tail_bound: float = 0.0
    complete: bool = True
    labels: Dict[int, Tuple[int, int]] = field(default_factory=dict)

    def layer(self, k: int) -> Tuple[JumpPoint, ...]:
        return self.cells.get(k, ())

    @property
    def layers(self) -> List[Tuple[JumpPoint, ...]]:
        return [self.layer(k) for k in range(1, self.depth + 1)]

    def union(self, upto: Optional[int] = None) -> List[JumpPoint]:
        limit = self.depth if upto is None else upto
        out = [p for k, cell in self.cells.items() if k <= limit for p in cell]
        return sorted(out)

    def is_disjoint(self) -> bool:
        seen = set()
        for cell in self.cells.values():
            for loc, _ in cell:
                if loc in seen:
                    return False
                seen.add(loc)
        return True

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "window": self.window.to_dict(),
            "depth": self.depth,
            "layers": {str(k): [list(p) for p in cell] for k, cell in sorted(self.cells.items())},
            "tail_bound": self.tail_bound,
            "complete": self.complete,
        }
        if self.labels:
            payload["labels"] = {str(k): list(v) for k, v in sorted(self.labels.items())}
        return payload


def layered_partition(f: RegulatedFn, window: Optional[IntervalSpec] = None,
                      depth: Optional[int] = None) -> LayeredPartition:
    """Layer 1 holds |jump| >= 1, layer m+1 holds 1/(m+1) <= |jump| < 1/m."""
    scan = _scan_window(f, window)
    if isinstance(f.train, ExplicitTrain) and depth is None:
        points = [(a.loc, a.jump) for a in f.train.in_window(scan)]
        cells: Dict[int, List[JumpPoint]] = {}
        for loc, jump in points:
            if jump != 0.0:
                cells.setdefault(layer_index(jump), []).append((loc, jump))
        deepest = max(cells, default=1)
        return LayeredPartition(scan, deepest, {k: tuple(v) for k, v in cells.items()}, 0.0, True)

    depth = depth or get_settings().default_depth
    if depth < 1:
        raise NonpositiveEpsilon(f"depth must be at least 1, got {depth}")
    cells = {}
    for loc, jump in jumps_at_least(f, 1.0 / depth, scan):
        cells.setdefault(layer_index(jump), []).append((loc, jump))

    if isinstance(f.train, ExplicitTrain):
        rest = [abs(a.jump) for a in f.train.in_window(scan) if 0.0 < abs(a.jump) < 1.0 / depth]
        tail, complete = math.fsum(rest), not rest
    else:
        n = f.train.level_cutoff(1.0 / depth, scan)
        tail = f.train.mass_tail(n or 0, scan)
        complete = tail == 0.0
    LOG.debug("layered partition", extra={"extra_fields": {"depth": depth, "tail": tail}})
    return LayeredPartition(scan, depth, {k: tuple(v) for k, v in cells.items()}, tail, complete)


def _antidiagonal(k: int) -> Tuple[int, int]:
    """k = 1, 2, 3, ... -> (1,1), (1,2), (2,1), (1,3), (2,2), (3,1), ..."""
    d = 1
    while k > d:
        k -= d
        d += 1
    return k, d + 1 - k


def strip_partition(f: RegulatedFn, window: Optional[IntervalSpec] = None,
                    depth: Optional[int] = None) -> LayeredPartition:
    """Half-line partition: unit strips (n-1, n) bucketed by magnitude, cells
    A(m, n) relabelled along anti-diagonals into B_k, plus the jump sitting at
    the integer k: D_k = B_k united with ({k} intersected with J(f))."""
    scan = _scan_window(f, window)
    if scan.lower < 0.0:
        raise InvalidInterval(f"strip partition lives on the nonnegative half-line, got {scan}")
    depth = depth or get_settings().default_depth
    cells: Dict[int, Tuple[JumpPoint, ...]] = {}
    labels: Dict[int, Tuple[int, int]] = {}
    strip_cache: Dict[Tuple[int, int], Tuple[JumpPoint, ...]] = {}
    for k in range(1, depth + 1):
        m, n = _antidiagonal(k)
        labels[k] = (m, n)
        strip = scan.clip(float(n - 1), float(n), open_left=True, open_right=True)
        cell: List[JumpPoint] = []
        if not strip.is_empty:
            key = (m, n)
            if key not in strip_cache:
                strip_cache[key] = tuple(
                    p for p in jumps_at_least(f, 1.0 / m, strip) if layer_index(p[1]) == m
                )
            cell.extend(strip_cache[key])
        if scan.contains(float(k)):
            atom = atom_at(f.train, float(k))
            if atom is not None and atom.jump != 0.0:
                cell.append((float(k), atom.jump))
        if cell:
            cells[k] = tuple(sorted(cell))
    return LayeredPartition(scan, depth, cells, math.inf, False, labels)


# ============================================================================
# TRANSFORMS
# ============================================================================

def reflect(f: RegulatedFn) -> RegulatedFn:
    """s -> f(-s) on -I. Atoms go (loc, lambda, rho) -> (-loc, -rho, -lambda)."""
    return RegulatedFn(f.domain.reflect(), f.base.reflect(), f.train.reflected(), f.orientation.flipped())


def derive_plus(f: RegulatedFn) -> RegulatedFn:
    """t -> f(t+): every atom keeps its whole jump as left gap."""
    return replace(f, train=f.train.mapped("plus"))


def derive_minus(f: RegulatedFn) -> RegulatedFn:
    """t -> f(t-): every atom keeps its whole jump as right gap."""
    return replace(f, train=f.train.mapped("minus"))


# ============================================================================
# VALIDATION
# ============================================================================

@dataclass
class ValidationReport:
    checks: List[Dict[str, Any]] = field(default_factory=list)
    cadlag: Optional[bool] = None
    caglad: Optional[bool] = None
    removable: List[float] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append({"check": name, "ok": bool(ok), "detail": detail})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "checks": list(self.checks),
            "cadlag": self.cadlag,
            "caglad": self.caglad,
            "removable": list(self.removable),
        }


def _check_window(domain: IntervalSpec) -> IntervalSpec:
    if domain.is_bounded:
        return domain.interior()
    if math.isfinite(domain.lower):
        return IntervalSpec.window(domain.lower, domain.lower + 1.0, open_left=True)
    if math.isfinite(domain.upper):
        return IntervalSpec.window(domain.upper - 1.0, domain.upper, open_right=True)
    return IntervalSpec.window(-1.0, 1.0)


def _check_explicit(f: RegulatedFn, train: ExplicitTrain, report: ValidationReport) -> None:
    atoms = train.atoms
    bad_order = [b.loc for a, b in zip(atoms, atoms[1:]) if not a.loc < b.loc]
    report.add("ordering", not bad_order, f"locations not strictly increasing at {bad_order}" if bad_order else "")
    degenerate = [a.loc for a in atoms if a.is_degenerate]
    report.add("non_degenerate", not degenerate, f"zero atoms at {degenerate}" if degenerate else "")
    finite = [a.loc for a in atoms if not all(map(math.isfinite, (a.loc, a.left_gap, a.right_gap)))]
    report.add("finite", not finite, f"non-finite atoms at {finite}" if finite else "")
    outside = [a.loc for a in atoms if not f.domain.is_interior(a.loc)]
    report.add("interior", not outside, f"atoms outside the interior at {outside}" if outside else "")
    report.cadlag = all(a.right_gap == 0.0 for a in atoms)
    report.caglad = all(a.left_gap == 0.0 for a in atoms)
    report.removable = [a.loc for a in atoms if a.jump == 0.0 and not a.is_degenerate]


def _check_generated(f: RegulatedFn, train: GeneratedTrain, report: ValidationReport) -> None:
    settings = get_settings()
    window = _check_window(f.domain)
    tails = [train.mass_tail(n, window) for n in range(settings.scan_terms + 1)]
    infinite = [n for n, v in enumerate(tails) if not math.isfinite(v)]
    report.add(
        "certificate_finite",
        not infinite,
        f"tau(N) is infinite on compact window {window} for N={infinite[:5]}" if infinite else "",
    )
    rising = [n for n in range(1, len(tails)) if tails[n] > tails[n - 1]]
    report.add("certificate_monotone", not rising, f"tau increases at N={rising[:5]}" if rising else "")
    missing = [eps for eps in settings.check_eps if train.level_cutoff(eps, window) is None]
    report.add("level_cutoff", not missing, f"no N(eps) for eps={missing}" if missing else "")
    report.cadlag = train.cadlag
    report.caglad = train.caglad


def validate(f: RegulatedFn) -> ValidationReport:
    """Inspect a function without raising; every failed check is listed."""
    report = ValidationReport()
    try:
        f.base.check_continuous(f.domain)
        report.add("base_continuous", True)
    except SaltosError as exc:
        report.add("base_continuous", False, exc.message)
    try:
        if isinstance(f.train, ExplicitTrain):
            _check_explicit(f, f.train, report)
        else:
            _check_generated(f, f.train, report)
    except SaltosError as exc:
        report.add("train", False, exc.message)
    except (ArithmeticError, ValueError) as exc:
        report.add("train", False, f"{type(exc).__name__}: {exc}")
    return report
