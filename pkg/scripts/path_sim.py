"""Seeded regulated sample paths and the stopping-time enumeration of their jumps."""
from __future__ import annotations

import csv
import heapq
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from scripts.errors import InvalidModel, InvariantViolation
from scripts.expressions import ContinuousBase
from scripts.intervals import IntervalSpec
from scripts.jump_measure import Rectangle, jump_counting_measure
from scripts.regulated_core import RegulatedFn, derive_minus, derive_plus, layered_partition
from scripts.settings import get_settings
from scripts.trains import ExplicitTrain, JumpAtom
from scripts.utils.logger import get_logger, log

LOG = get_logger("path_sim")

STREAM_TIMES, STREAM_SIZES, STREAM_SPLITS = 0, 1, 2
MODEL_KINDS = ("compound_poisson", "split_jump")


# ============================================================================
# MODELS
# ============================================================================

@dataclass(frozen=True)
class JumpDist:
    """uniform(a, b), normal(mean, sd) or two_point(x1, p, x2)."""

    kind: str
    params: Tuple[float, ...]

    def __post_init__(self):
        n = {"uniform": 2, "normal": 2, "two_point": 3}.get(self.kind)
        if n is None:
            raise InvalidModel(f"unknown jump distribution {self.kind!r}")
        if len(self.params) != n or not all(math.isfinite(x) for x in self.params):
            raise InvalidModel(f"{self.kind} takes {n} finite parameters, got {list(self.params)}")
        if self.kind == "uniform" and not self.params[0] < self.params[1]:
            raise InvalidModel("uniform jump sizes need a < b")
        if self.kind == "normal" and not self.params[1] > 0.0:
            raise InvalidModel("normal jump sizes need sd > 0")
        if self.kind == "two_point" and not 0.0 <= self.params[1] <= 1.0:
            raise InvalidModel(f"two_point probability must lie in [0, 1], got {self.params[1]}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "uniform":
            a, b = self.params
            return rng.uniform(a, b, size=n)
        if self.kind == "normal":
            mean, sd = self.params
            return rng.normal(mean, sd, size=n)
        x1, p, x2 = self.params
        return np.where(rng.random(size=n) < p, x1, x2)

    def to_dict(self) -> Dict[str, Any]:
        names = {"uniform": ("a", "b"), "normal": ("mean", "sd"), "two_point": ("x1", "p", "x2")}[self.kind]
        return {self.kind: dict(zip(names, self.params))}


@dataclass(frozen=True)
class SplitRule:
    """Fraction u of each jump taken as left gap: uniform, beta(a, b) or fixed(u)."""

    kind: str = "uniform"
    params: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "uniform":
            ok = not self.params
        elif self.kind == "beta":
            ok = len(self.params) == 2 and all(x > 0.0 for x in self.params)
        elif self.kind == "fixed":
            ok = len(self.params) == 1 and 0.0 <= self.params[0] <= 1.0
        else:
            raise InvalidModel(f"unknown split rule {self.kind!r}")
        if not ok:
            raise InvalidModel(f"bad parameters for split rule {self.kind}: {list(self.params)}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.random(size=n)
        if self.kind == "beta":
            return rng.beta(*self.params, size=n)
        return np.full(n, self.params[0])

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "beta":
            return {"beta": {"a": self.params[0], "b": self.params[1]}}
        if self.kind == "fixed":
            return {"fixed": self.params[0]}
        return {"uniform": {}}


@dataclass(frozen=True)
class PathModel:
    kind: str
    rate: float
    jump_dist: JumpDist
    horizon: float
    seed: int
    drift: ContinuousBase = field(default_factory=ContinuousBase.zero)
    split: SplitRule = field(default_factory=SplitRule)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidModel(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if not (self.rate > 0.0 and math.isfinite(self.rate)):
            raise InvalidModel(f"rate must be positive, got {self.rate}")
        if not (self.horizon > 0.0 and math.isfinite(self.horizon)):
            raise InvalidModel(f"horizon must be positive, got {self.horizon}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise InvalidModel(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    @property
    def domain(self) -> IntervalSpec:
        return IntervalSpec.compact(0.0, self.horizon)

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "kind": self.kind,
            "rate": self.rate,
            "jump_dist": self.jump_dist.to_dict(),
            "drift": self.drift.text,
            "horizon": self.horizon,
            "seed": self.seed,
        }
        if self.kind == "split_jump":
            payload["split"] = self.split.to_dict()
        return payload


@dataclass(frozen=True)
class SamplePath:
    fn: RegulatedFn
    seed: int
    model: PathModel

    @property
    def atoms(self) -> Tuple[JumpAtom, ...]:
        return self.fn.train.atoms


# ============================================================================
# SIMULATION
# ============================================================================

def _stream(seed: int, stream: int) -> np.random.Generator:
    # streams are keyed by (seed, stream id) so draw order in one never shifts another
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def _interior(times: np.ndarray, horizon: float) -> np.ndarray:
    return times[(times > 0.0) & (times < horizon)]


def _arrival_times(rng: np.random.Generator, rate: float, horizon: float) -> np.ndarray:
    """Poisson(rate * horizon) distinct sorted times in (0, horizon); collisions are redrawn."""
    n = int(rng.poisson(rate * horizon))
    times = np.unique(_interior(horizon - rng.uniform(0.0, horizon, size=n), horizon))
    while times.size < n:
        extra = horizon - rng.uniform(0.0, horizon, size=n - times.size)
        times = np.unique(np.concatenate([times, _interior(extra, horizon)]))
    return times


def _split(jump: float, u: float) -> Tuple[float, float]:
    """(lambda, rho) with lambda + rho == jump exactly in floating point.

    lambda is snapped to a multiple of ulp(jump), so jump - lambda is exact.
    """
    q = math.ulp(jump)
    lam = round(u * jump / q) * q
    return lam, jump - lam


def simulate(model: PathModel) -> SamplePath:
    """One trajectory on [0, horizon]; bit-identical for identical (model, seed)."""
    times = _arrival_times(_stream(model.seed, STREAM_TIMES), model.rate, model.horizon)
    sizes = model.jump_dist.sample(_stream(model.seed, STREAM_SIZES), times.size)
    if model.kind == "split_jump":
        fractions = model.split.sample(_stream(model.seed, STREAM_SPLITS), times.size)
        atoms = [JumpAtom(float(t), *_split(float(j), float(u))) for t, j, u in zip(times, sizes, fractions)]
    else:
        atoms = [JumpAtom(float(t), float(j), 0.0) for t, j in zip(times, sizes)]
    fn = RegulatedFn.build(model.domain, model.drift, ExplicitTrain.build(atoms))
    LOG.debug("simulated path", extra={"extra_fields": {"seed": model.seed, "kind": model.kind, "atoms": len(atoms)}})
    return SamplePath(fn, model.seed, model)


def left_limit_path(path: SamplePath) -> RegulatedFn:
    """t -> X(t-), left-continuous."""
    return derive_minus(path.fn)


def right_limit_path(path: SamplePath) -> RegulatedFn:
    """t -> X(t+), right-continuous."""
    return derive_plus(path.fn)


# ============================================================================
# STOPPING TIMES
# ============================================================================

@dataclass(frozen=True)
class StoppingTimeSequence:
    times: Tuple[float, ...]
    depth: int
    layers: Dict[int, Tuple[float, ...]]

    def __len__(self) -> int:
        return len(self.times)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "times": list(self.times),
            "depth": self.depth,
            "layers": {str(k): list(v) for k, v in sorted(self.layers.items())},
        }


def _successive_minima(cell: List[float]) -> List[float]:
    """S1 = min D, S(n+1) = min(D after S(n)) until D is exhausted."""
    out: List[float] = []
    last = -math.inf
    while True:
        later = [s for s in cell if s > last]
        if not later:
            return out
        last = min(later)
        out.append(last)


def stopping_times(path: Any) -> StoppingTimeSequence:
    """Jump times as one strictly increasing sequence, built layer by layer."""
    fn = getattr(path, "fn", path)
    partition = layered_partition(fn)
    layers = {k: tuple(_successive_minima([s for s, _ in cell])) for k, cell in partition.cells.items()}
    times = tuple(heapq.merge(*(layers[k] for k in sorted(layers))))
    if any(b <= a for a, b in zip(times, times[1:])):
        raise InvariantViolation("layers of a partition share a jump time", depth=partition.depth)
    return StoppingTimeSequence(times, partition.depth, layers)


# ============================================================================
# CENSUS
# ============================================================================

@dataclass(frozen=True)
class CensusResult:
    seeds: Tuple[int, ...]
    counts: Tuple[int, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.counts)) if self.counts else 0.0

    @property
    def variance(self) -> float:
        return float(np.var(self.counts, ddof=1)) if len(self.counts) > 1 else 0.0

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / len(self.counts)) if self.counts else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": len(self.counts),
            "mean": self.mean,
            "variance": self.variance,
            "std_error": self.std_error,
            "seeds": list(self.seeds),
            "counts": list(self.counts),
        }


def _count_one(job: Tuple[PathModel, int, Rectangle]) -> int:
    model, seed, rect = job
    return jump_counting_measure(simulate(replace(model, seed=seed)), rect)


def empirical_jump_census(model: PathModel, n_seeds: int, rect: Rectangle,
                          workers: Optional[int] = None) -> CensusResult:
    """j_X(rect) over the seeds model.seed, model.seed + 1, ..."""
    if n_seeds < 1:
        raise InvalidModel(f"census needs at least one seed, got {n_seeds}")
    if model.seed + n_seeds - 1 >= 2 ** 64:
        raise InvalidModel(f"seeds {model.seed}..{model.seed + n_seeds - 1} run past the unsigned 64-bit range")
    seeds = tuple(model.seed + i for i in range(n_seeds))
    jobs = [(model, s, rect) for s in seeds]
    workers = workers or get_settings().census_workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = tuple(pool.map(_count_one, jobs, chunksize=max(1, n_seeds // (4 * workers))))
    else:
        counts = tuple(_count_one(job) for job in jobs)
    result = CensusResult(seeds, counts)
    log("path_sim", "INFO", "census_done", n=n_seeds, mean=result.mean, std_error=result.std_error)
    return result


def census_to_csv(result: CensusResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["seed", "count"])
    writer.writerows(zip(result.seeds, result.counts))
    return buf.getvalue()
