"""Jump atoms and jump trains (explicit lists or generated rules with certificates)."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from scripts.errors import InvalidTrain, ResolutionLimit
from scripts.intervals import IntervalSpec
from scripts.sequences import (
    AffineIndex,
    ConstantWeights,
    DyadicIndex,
    GeometricWeights,
    IndexMap,
    NegatedIndex,
    PowerWeights,
    WeightRule,
)


@dataclass(frozen=True)
class JumpAtom:
    loc: float
    left_gap: float   # f(loc) - f(loc-)
    right_gap: float  # f(loc+) - f(loc)

    @property
    def jump(self) -> float:
        return self.left_gap + self.right_gap

    @property
    def mass(self) -> float:
        return abs(self.left_gap) + abs(self.right_gap)

    @property
    def is_degenerate(self) -> bool:
        return self.left_gap == 0.0 and self.right_gap == 0.0

    def reflected(self) -> "JumpAtom":
        return JumpAtom(0.0 - self.loc, 0.0 - self.right_gap, 0.0 - self.left_gap)

    def as_plus(self) -> "JumpAtom":
        return JumpAtom(self.loc, self.jump, 0.0)

    def as_minus(self) -> "JumpAtom":
        return JumpAtom(self.loc, 0.0, self.jump)

    def to_dict(self) -> Dict[str, float]:
        return {"loc": self.loc, "left_gap": self.left_gap, "right_gap": self.right_gap}


# ============================================================================
# EXPLICIT
# ============================================================================

@dataclass(frozen=True)
class ExplicitTrain:
    """Finite list of atoms. ``build`` enforces the invariants; the bare
    constructor does not, so ``validate`` can report on raw input."""

    atoms: Tuple[JumpAtom, ...] = ()
    _locs: Tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "_locs", tuple(a.loc for a in self.atoms))

    @classmethod
    def build(cls, atoms: Iterable[JumpAtom]) -> "ExplicitTrain":
        kept = sorted((a for a in atoms if not a.is_degenerate), key=lambda a: a.loc)
        for a in kept:
            if not (math.isfinite(a.loc) and math.isfinite(a.left_gap) and math.isfinite(a.right_gap)):
                raise InvalidTrain(f"atom {a} has non-finite fields")
        for prev, cur in zip(kept, kept[1:]):
            if prev.loc == cur.loc:
                raise InvalidTrain(f"two atoms at loc={cur.loc}")
        return cls(tuple(kept))

    @property
    def is_generated(self) -> bool:
        return False

    def __len__(self) -> int:
        return len(self.atoms)

    def atom_at(self, t: float) -> Optional[JumpAtom]:
        i = bisect.bisect_left(self._locs, t)
        if i < len(self.atoms) and self.atoms[i].loc == t:
            return self.atoms[i]
        return None

    def in_window(self, window: IntervalSpec) -> List[JumpAtom]:
        lo = bisect.bisect_left(self._locs, window.lower)
        hi = bisect.bisect_right(self._locs, window.upper)
        return [a for a in self.atoms[lo:hi] if window.contains(a.loc)]

    def jump_sum(self, window: IntervalSpec) -> float:
        return math.fsum(a.jump for a in self.in_window(window))

    def reflected(self) -> "ExplicitTrain":
        return ExplicitTrain(tuple(a.reflected() for a in reversed(self.atoms)))

    def mapped(self, mode: str) -> "ExplicitTrain":
        fn = JumpAtom.as_plus if mode == "plus" else JumpAtom.as_minus
        # removable discontinuities (jump 0) disappear
        return ExplicitTrain(tuple(b for b in map(fn, self.atoms) if not b.is_degenerate))

    def to_dict(self) -> Dict[str, Any]:
        return {"explicit": [a.to_dict() for a in self.atoms]}


# ============================================================================
# GENERATED
# ============================================================================

@dataclass(frozen=True)
class GeneratedTrain:
    """Atom k sits at locations.at(k) with magnitude m_k = magnitudes.weight(k).

    The jump sigma_k * m_k is split into left gap ``split * J`` and right gap
    ``J - left``; sigma_k alternates when ``alternating`` and flips when
    ``negate``. Because |lambda| + |rho| = m_k, the magnitude rule's tails are
    the train's absolute-gap certificates.
    """

    magnitudes: WeightRule
    locations: IndexMap
    split: float = 0.0
    alternating: bool = False
    negate: bool = False
    rule: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not 0.0 <= self.split <= 1.0:
            raise InvalidTrain(f"split fraction must lie in [0, 1], got {self.split}")

    @property
    def is_generated(self) -> bool:
        return True

    @property
    def resolution_limit(self) -> Optional[int]:
        return self.locations.resolution_limit

    def atom(self, k: int) -> JumpAtom:
        size = self.magnitudes.weight(k)
        if self.alternating and k % 2 == 0:
            size = -size
        if self.negate:
            size = -size
        left = self.split * size
        return JumpAtom(self.locations.at(k), left, size - left)

    def k_range(self, window: IntervalSpec) -> Tuple[int, Optional[int]]:
        return self.locations.k_range(window)

    def mass_tail(self, n: int, window: IntervalSpec, power: float = 1.0) -> float:
        """tau(n, window): bound on sum over k > n with loc_k in window of (|lambda|+|rho|)**power."""
        k_lo, k_hi = self.k_range(window)
        start = max(n, k_lo - 1)
        if k_hi is not None:
            if start >= k_hi:
                return 0.0
            if k_hi - start <= 4096:
                return math.fsum(self.magnitudes.weight(k) ** power for k in range(start + 1, k_hi + 1))
        return self.magnitudes.tail(start, power)

    def level_cutoff(self, eps: float, window: IntervalSpec) -> Optional[int]:
        """N(eps, window): every atom beyond N inside the window has mass < eps."""
        k_lo, k_hi = self.k_range(window)
        n = self.magnitudes.cutoff(eps)
        if k_hi is not None:
            n = k_hi if n is None else min(n, k_hi)
        if n is None:
            return None
        return max(n, 0) if n >= k_lo else 0

    def check_resolvable(self, k: int) -> None:
        limit = self.resolution_limit
        if limit is not None and k > limit:
            raise ResolutionLimit(
                f"atom {k} of rule {self.rule!r} is not separable in float64 (limit {limit})",
                limit=limit,
            )

    def iter_window(self, window: IntervalSpec, upto: Optional[int] = None) -> Iterator[Tuple[int, JumpAtom]]:
        k_lo, k_hi = self.k_range(window)
        last = k_hi if upto is None else (upto if k_hi is None else min(upto, k_hi))
        if last is None:
            raise InvalidTrain("iter_window needs a finite upper ordinal")
        for k in range(max(1, k_lo), last + 1):
            a = self.atom(k)
            if not a.is_degenerate and window.contains(a.loc):
                yield k, a

    @property
    def cadlag(self) -> bool:
        return self.split == 1.0

    @property
    def caglad(self) -> bool:
        return self.split == 0.0

    def reflected(self) -> "GeneratedTrain":
        locs = self.locations.inner if isinstance(self.locations, NegatedIndex) else NegatedIndex(self.locations)
        return replace(self, locations=locs, split=1.0 - self.split, negate=not self.negate)

    def mapped(self, mode: str) -> "GeneratedTrain":
        return replace(self, split=1.0 if mode == "plus" else 0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "generated": {
                "rule": self.rule,
                "params": dict(self.params),
                "magnitudes": self.magnitudes.to_dict(),
                "locations": self.locations.to_dict(),
                "split": self.split,
                "alternating": self.alternating,
                "negate": self.negate,
            }
        }


JumpTrain = Union[ExplicitTrain, GeneratedTrain]


def explicit_from_rows(rows: Sequence[Dict[str, Any]], *, strict: bool = True) -> ExplicitTrain:
    atoms = []
    for row in rows:
        try:
            atoms.append(JumpAtom(float(row["loc"]), float(row.get("left_gap", 0.0)), float(row.get("right_gap", 0.0))))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidTrain(f"bad atom row {row!r}: {exc}") from exc
    if strict:
        return ExplicitTrain.build(atoms)
    return ExplicitTrain(tuple(atoms))


# ============================================================================
# BUILT-IN RULES
# ============================================================================

def geometric_train(ratio: float = 0.5, scale: float = 1.0, origin: float = 0.0, span: float = 1.0,
                    split: float = 0.0, alternating: bool = False) -> GeneratedTrain:
    """Magnitudes scale*ratio**k at origin + span*(1 - ratio**k), accumulating at origin + span."""
    params = {"ratio": ratio, "scale": scale, "origin": origin, "span": span}
    return GeneratedTrain(
        GeometricWeights(ratio, scale), DyadicIndex(origin, span, ratio),
        split=split, alternating=alternating, rule="geometric", params=params,
    )


def power_train(p: float, scale: float = 1.0, origin: float = 0.0, step: float = 1.0,
                split: float = 0.0, alternating: bool = False) -> GeneratedTrain:
    """Magnitudes scale*k**(-p) on the lattice origin + step*k."""
    params = {"p": p, "scale": scale, "origin": origin, "step": step}
    return GeneratedTrain(
        PowerWeights(p, scale), AffineIndex(origin, step),
        split=split, alternating=alternating, rule="power", params=params,
    )


def lattice_train(value: float = 1.0, origin: float = 0.0, step: float = 1.0,
                  split: float = 0.0, alternating: bool = False) -> GeneratedTrain:
    """Equal jumps on a lattice; no global level cutoff, compact windows only."""
    params = {"value": value, "origin": origin, "step": step}
    return GeneratedTrain(
        ConstantWeights(value), AffineIndex(origin, step),
        split=split, alternating=alternating, rule="lattice", params=params,
    )
