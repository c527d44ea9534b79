"""JSON schemas of every input document (functions, families, rectangles,
models, sample paths) and their serialized forms.

Generated rules take their defaults from ``scripts/rules.json``; user
parameters are merged over them.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

from scripts.errors import InputOutputError, SaltosError, SchemaError
from scripts.expressions import ContinuousBase
from scripts.index_sets import IndexInterval, IndexSetExpr, Union, index_set_from_dict
from scripts.intervals import IntervalSpec
from scripts.jump_measure import Rectangle, complement_ball
from scripts.path_sim import JumpDist, PathModel, SamplePath, SplitRule
from scripts.regulated_core import Orientation, RegulatedFn
from scripts.sequences import (
    ConstantWeights,
    GeometricWeights,
    PowerWeights,
    TableWeights,
    WeightRule,
    index_map_from_dict,
)
from scripts.settings import load_rules
from scripts.trains import (
    ExplicitTrain,
    GeneratedTrain,
    JumpTrain,
    explicit_from_rows,
    geometric_train,
    lattice_train,
    power_train,
)
from scripts.unordered_sum import ExplicitFamily, GeneratedFamily, WeightFamily, WeightPart
from scripts.utils.normalization import normalize_structure


# ============================================================================
# FILES
# ============================================================================

def load_json(path: str | Path) -> Any:
    p = Path(path)
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputOutputError(f"cannot read {p}: {exc.strerror or exc}", path=str(p)) from exc
    except json.JSONDecodeError as exc:
        raise InputOutputError(f"{p} is not valid JSON: {exc.msg} (line {exc.lineno})", path=str(p)) from exc


def dumps(payload: Any) -> str:
    """Deterministic JSON text (sorted keys, no NaN/Infinity)."""
    return json.dumps(normalize_structure(payload), ensure_ascii=False, sort_keys=True, allow_nan=False)


def write_text(path: str | Path, text: str) -> None:
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputOutputError(f"cannot write {p}: {exc.strerror or exc}", path=str(p)) from exc


def _object(doc: Any, what: str) -> Dict[str, Any]:
    if not isinstance(doc, dict):
        raise SchemaError(f"{what} must be a JSON object, got {type(doc).__name__}")
    return doc


def _num(value: Any, what: str) -> float:
    if value in ("inf", "+inf"):
        return math.inf
    if value == "-inf":
        return -math.inf
    if isinstance(value, bool):
        raise SchemaError(f"{what} must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{what} must be a number, got {value!r}") from exc


# ============================================================================
# INTERVALS AND FUNCTIONS
# ============================================================================

def interval_from_dict(doc: Any) -> IntervalSpec:
    doc = _object(doc, "domain")
    kind = doc.get("kind")
    if kind == "compact":
        return IntervalSpec.compact(_num(doc.get("a"), "a"), _num(doc.get("b"), "b"))
    if kind == "right_ray":
        return IntervalSpec.right_ray(_num(doc.get("a"), "a"))
    if kind == "left_ray":
        return IntervalSpec.left_ray(_num(doc.get("a"), "a"))
    if kind == "line":
        return IntervalSpec.line()
    if kind == "nonneg":
        return IntervalSpec.nonneg()
    if kind == "window":
        lo, hi = doc.get("interval", [None, None])
        return window(_num(lo, "lower"), _num(hi, "upper"), bool(doc.get("open_left")), bool(doc.get("open_right")))
    raise SchemaError(f"unknown interval kind {kind!r}")


def window(lower: float, upper: float, open_left: bool = False, open_right: bool = False) -> IntervalSpec:
    return IntervalSpec.window(lower, upper, open_left=open_left, open_right=open_right)


def base_from_json(value: Any) -> ContinuousBase:
    if value is None:
        return ContinuousBase.zero()
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return ContinuousBase.constant(value)
    if isinstance(value, str):
        return ContinuousBase(value)
    raise SchemaError(f"base must be an expression string, got {value!r}")


def _rule_params(table: str, rule: str, params: Dict[str, Any]) -> Dict[str, Any]:
    catalog = load_rules().get(table, {})
    if rule not in catalog:
        raise SchemaError(f"unknown {table[:-1]} rule {rule!r}; known: {sorted(catalog)}")
    merged = dict(catalog[rule])
    unknown = sorted(set(params) - set(merged))
    if unknown:
        raise SchemaError(f"unknown parameters {unknown} for rule {rule!r}")
    merged.update(params)
    return merged


def weight_rule_from_dict(doc: Any) -> WeightRule:
    doc = dict(_object(doc, "weight rule"))
    rule = doc.pop("rule", None)
    doc.pop("indices", None)
    if rule == "power":
        rule = "power_p"
    p = _rule_params("weights", rule, doc)
    try:
        if rule == "geometric":
            return GeometricWeights(float(p["ratio"]), float(p["scale"]))
        if rule == "power_p":
            return PowerWeights(float(p["p"]), float(p["scale"]))
        if rule == "harmonic":
            return PowerWeights(1.0, float(p["scale"]))
        if rule == "constant":
            return ConstantWeights(float(p["value"]))
        return TableWeights(tuple(float(v) for v in p["values"]))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad parameters for rule {rule!r}: {exc}") from exc


def train_from_dict(doc: Any, *, strict: bool = True) -> JumpTrain:
    if doc is None:
        return ExplicitTrain()
    doc = _object(doc, "train")
    if "explicit" in doc:
        rows = doc["explicit"]
        if not isinstance(rows, list):
            raise SchemaError("'explicit' must be a list of atoms")
        return explicit_from_rows(rows, strict=strict)
    if "generated" not in doc:
        raise SchemaError("train must have an 'explicit' or a 'generated' key")
    gen = _object(doc["generated"], "generated train")
    flags = {
        "split": float(gen.get("split", 0.0)),
        "alternating": bool(gen.get("alternating", False)),
    }
    if "magnitudes" in gen:
        # serialized form, as written by GeneratedTrain.to_dict
        return GeneratedTrain(
            weight_rule_from_dict(gen["magnitudes"]),
            index_map_from_dict(gen.get("locations")),
            negate=bool(gen.get("negate", False)),
            rule=str(gen.get("rule", "custom")),
            params=dict(gen.get("params") or {}),
            **flags,
        )
    rule = gen.get("rule")
    params = dict(gen.get("params") or {})
    params.update({k: v for k, v in flags.items() if k not in params and k in gen})
    p = _rule_params("trains", rule, params)
    builders = {"geometric": geometric_train, "power": power_train, "lattice": lattice_train}
    try:
        train = builders[rule](**p)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad parameters for train rule {rule!r}: {exc}") from exc
    return train


def function_from_dict(doc: Any, *, strict: bool = True) -> RegulatedFn:
    """Parse a function document; ``strict=False`` skips the checks so ``validate`` can report them."""
    doc = _object(doc, "function")
    if "domain" not in doc:
        raise SchemaError("function document needs a 'domain'")
    domain = interval_from_dict(doc["domain"])
    base = base_from_json(doc.get("base"))
    train = train_from_dict(doc.get("train"), strict=strict)
    try:
        orientation = Orientation(doc.get("orientation", "left"))
    except ValueError as exc:
        raise SchemaError(f"orientation must be 'left' or 'right', got {doc.get('orientation')!r}") from exc
    if strict:
        return RegulatedFn.build(domain, base, train, orientation)
    return RegulatedFn(domain, base, train, orientation)


def function_to_dict(f: RegulatedFn) -> Dict[str, Any]:
    payload = {"domain": f.domain.to_dict(), "base": f.base.text, "train": f.train.to_dict()}
    if f.orientation is not Orientation.LEFT:
        payload["orientation"] = f.orientation.value
    return payload


# ============================================================================
# WEIGHT FAMILIES
# ============================================================================

def _index_value(value: Any) -> Any:
    return tuple(value) if isinstance(value, list) else value


def family_from_dict(doc: Any) -> WeightFamily:
    doc = _object(doc, "weight family")
    if "explicit" in doc:
        rows = doc["explicit"]
        if not isinstance(rows, list) or not all(isinstance(r, list) and len(r) == 2 for r in rows):
            raise SchemaError("'explicit' must be a list of [index, weight] pairs")
        return ExplicitFamily(tuple((_index_value(s), _num(w, "weight")) for s, w in rows))
    if "generated" not in doc:
        raise SchemaError("weight family must have an 'explicit' or a 'generated' key")
    gen = _object(doc["generated"], "generated family")
    indices = index_map_from_dict(gen.get("indices"))
    if "parts" in gen:
        parts = tuple(
            WeightPart(
                _num(part.get("coef", 1.0), "coef"),
                weight_rule_from_dict(part["rule"]),
                index_set_from_dict(part.get("mask", {"all": True})),
            )
            for part in gen["parts"]
        )
        return GeneratedFamily(indices, parts)
    return GeneratedFamily.of(weight_rule_from_dict(gen), indices)


# ============================================================================
# RECTANGLES
# ============================================================================

def size_set_from_dict(doc: Any) -> IndexSetExpr:
    doc = _object(doc, "size set")
    if "complement_ball" in doc:
        eps = _num(doc["complement_ball"], "complement_ball")
        if eps < 0.0:
            raise SchemaError(f"complement_ball radius must be >= 0, got {eps}")
        return complement_ball(eps)
    if "intervals" in doc:
        spans = doc["intervals"]
        if not isinstance(spans, list) or not all(isinstance(s, list) and len(s) == 2 for s in spans):
            raise SchemaError("'intervals' must be a list of [a, b] pairs")
        parts = []
        for a, b in spans:
            lo, hi = _num(a, "a"), _num(b, "b")
            if lo > hi:
                raise SchemaError(f"size interval [{lo}, {hi}] is reversed")
            parts.append(IndexInterval(lo, hi, open_left=math.isinf(lo), open_right=math.isinf(hi)))
        return Union(tuple(parts))
    return index_set_from_dict(doc)


def rectangle_from_dict(doc: Any) -> Rectangle:
    doc = _object(doc, "rectangle")
    if "time" not in doc or "size" not in doc:
        raise SchemaError("rectangle needs 'time' and 'size'")
    return Rectangle(index_set_from_dict(doc["time"]), size_set_from_dict(doc["size"]))


def rectangles_from_json(doc: Any) -> List[Rectangle]:
    if isinstance(doc, dict) and "rects" in doc:
        doc = doc["rects"]
    if isinstance(doc, dict):
        return [rectangle_from_dict(doc)]
    if not isinstance(doc, list):
        raise SchemaError("expected a rectangle or a list of rectangles")
    return [rectangle_from_dict(r) for r in doc]


# ============================================================================
# MODELS AND PATHS
# ============================================================================

def _single(doc: Any, what: str):
    if isinstance(doc, str):
        return doc, {}
    doc = _object(doc, what)
    if len(doc) != 1:
        raise SchemaError(f"{what} must have exactly one key, got {sorted(doc)}")
    return next(iter(doc.items()))


def jump_dist_from_dict(doc: Any) -> JumpDist:
    kind, params = _single(doc, "jump_dist")
    names = {"uniform": ("a", "b"), "normal": ("mean", "sd"), "two_point": ("x1", "p", "x2")}.get(kind)
    if names is None:
        raise SchemaError(f"unknown jump distribution {kind!r}")
    params = _object(params, kind)
    missing = [n for n in names if n not in params]
    if missing:
        raise SchemaError(f"{kind} is missing {missing}")
    return JumpDist(kind, tuple(_num(params[n], n) for n in names))


def split_rule_from_dict(doc: Any) -> SplitRule:
    if doc is None:
        return SplitRule()
    kind, params = _single(doc, "split")
    if kind == "uniform":
        return SplitRule()
    if kind == "beta":
        params = _object(params, "beta")
        return SplitRule("beta", (_num(params.get("a"), "a"), _num(params.get("b"), "b")))
    if kind == "fixed":
        return SplitRule("fixed", (_num(params, "fixed"),))
    raise SchemaError(f"unknown split rule {kind!r}")


def model_from_dict(doc: Any, seed: Optional[int] = None) -> PathModel:
    doc = _object(doc, "model")
    for key in ("kind", "rate", "jump_dist", "horizon"):
        if key not in doc:
            raise SchemaError(f"model is missing {key!r}")
    raw_seed = seed if seed is not None else doc.get("seed")
    if raw_seed is None:
        raise SchemaError("model needs a seed (in the document or via --seed)")
    if isinstance(raw_seed, bool) or not isinstance(raw_seed, int):
        raise SchemaError(f"seed must be an integer, got {raw_seed!r}")
    return PathModel(
        kind=str(doc["kind"]),
        rate=_num(doc["rate"], "rate"),
        jump_dist=jump_dist_from_dict(doc["jump_dist"]),
        horizon=_num(doc["horizon"], "horizon"),
        seed=raw_seed,
        drift=base_from_json(doc.get("drift")),
        split=split_rule_from_dict(doc.get("split")),
    )


def path_to_dict(path: SamplePath) -> Dict[str, Any]:
    return {"seed": path.seed, "model": path.model.to_dict(), "fn": function_to_dict(path.fn)}


def path_from_json(doc: Any) -> Any:
    """A saved sample path (``fn`` plus model) or a bare function document."""
    doc = _object(doc, "path")
    if "fn" not in doc:
        return function_from_dict(doc)
    fn = function_from_dict(doc["fn"])
    if "model" not in doc:
        return fn
    model = model_from_dict(doc["model"], seed=doc.get("seed"))
    return SamplePath(fn, model.seed, model)


def error_document(exc: SaltosError) -> str:
    return dumps(exc.to_dict())
