"""Continuous base functions written in a small closed-form grammar.

Grammar: decimal literals, the variable ``t``, ``+ - * /``, the functions
``sin cos exp pow`` and parentheses. Text is tokenized against that grammar
first, then handed to sympy for parsing, continuity checks and lambdify.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Tuple

import sympy
from sympy.calculus.singularities import singularities
from sympy.calculus.util import continuous_domain
from sympy.parsing.sympy_parser import parse_expr

from scripts.errors import InvalidExpression, OutOfDomain
from scripts.intervals import IntervalSpec
from scripts.utils.logger import get_logger

LOG = get_logger("expressions")

_T = sympy.Symbol("t", real=True)
_FUNCTIONS = {"sin": sympy.sin, "cos": sympy.cos, "exp": sympy.exp, "pow": sympy.Pow}
_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/(),]))"
)


def tokenize(text: str) -> List[Tuple[str, str]]:
    tokens: List[Tuple[str, str]] = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        match = _TOKEN_RE.match(stripped, pos)
        if not match:
            raise InvalidExpression(f"unexpected character at offset {pos}: {stripped[pos:pos + 10]!r}")
        kind = match.lastgroup
        value = match.group(kind)
        if kind == "name" and value != "t" and value not in _FUNCTIONS:
            raise InvalidExpression(f"unknown name {value!r}; allowed: t, sin, cos, exp, pow")
        tokens.append((kind, value))
        pos = match.end()
    if not tokens:
        raise InvalidExpression("empty expression")
    for (k1, v1), (k2, v2) in zip(tokens, tokens[1:]):
        # '**' is not part of the grammar; pow(a, b) is
        if v1 == "*" and v2 == "*":
            raise InvalidExpression("use pow(a, b) instead of '**'")
        if k1 == "name" and v1 in _FUNCTIONS and v2 != "(":
            raise InvalidExpression(f"function {v1!r} must be called")
    return tokens


@lru_cache(maxsize=256)
def _compile(source: str) -> Tuple[sympy.Expr, Callable[[float], float]]:
    tokenize(source)
    try:
        expr = parse_expr(source, local_dict={"t": _T, **_FUNCTIONS}, evaluate=True)
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as exc:
        raise InvalidExpression(f"cannot parse {source!r}: {exc}") from exc
    if not isinstance(expr, sympy.Expr) or expr.free_symbols - {_T}:
        raise InvalidExpression(f"{source!r} is not an expression in t")
    return expr, sympy.lambdify(_T, expr, modules="math")


@lru_cache(maxsize=512)
def _continuous_on(source: str, lower: float, upper: float) -> bool:
    """Decided continuity on [lower, upper]; anything sympy cannot settle counts as discontinuous."""
    expr, _ = _compile(source)
    if expr.is_polynomial(_T):
        return True
    lo = sympy.Float(lower) if math.isfinite(lower) else -sympy.oo
    hi = sympy.Float(upper) if math.isfinite(upper) else sympy.oo
    target = sympy.Interval(lo, hi)
    try:
        region = continuous_domain(expr, _T, sympy.S.Reals)
        verdict = target.is_subset(region)
        if verdict is None:
            verdict = sympy.Complement(target, region).is_empty
        if verdict is None and singularities(expr, _T, target).is_empty is False:
            verdict = False
    except Exception as exc:
        LOG.warning("continuity check failed", extra={"extra_fields": {"expr": source, "error": str(exc)}})
        return False
    if verdict is None:
        LOG.warning("continuity undecided", extra={"extra_fields": {"expr": source}})
        return False
    return bool(verdict)


@dataclass(frozen=True)
class ContinuousBase:
    """A grammar expression in ``t``; ``mirrored`` evaluates it at -t instead."""

    source: str
    mirrored: bool = False
    _fn: Callable[[float], float] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _, fn = _compile(self.source)
        object.__setattr__(self, "_fn", fn)

    @classmethod
    def constant(cls, value: float) -> "ContinuousBase":
        return cls(repr(float(value)))

    @classmethod
    def zero(cls) -> "ContinuousBase":
        return cls("0")

    @property
    def expr(self) -> sympy.Expr:
        expr = _compile(self.source)[0]
        return expr.subs(_T, -_T) if self.mirrored else expr

    @property
    def is_constant(self) -> bool:
        return _T not in self.expr.free_symbols

    @property
    def text(self) -> str:
        """Grammar text of the function actually evaluated."""
        if not self.mirrored:
            return self.source
        pieces = []
        for kind, value in tokenize(self.source):
            pieces.append("(0-t)" if kind == "name" and value == "t" else value)
        return " ".join(pieces)

    def __call__(self, t: float) -> float:
        x = 0.0 - float(t) if self.mirrored else float(t)
        try:
            value = float(self._fn(x))
        except (ValueError, OverflowError, ZeroDivisionError, TypeError) as exc:
            raise OutOfDomain(f"base {self.text!r} undefined at t={t}: {exc}") from exc
        if not math.isfinite(value):
            raise OutOfDomain(f"base {self.text!r} is not finite at t={t}")
        return value

    def check_continuous(self, domain: IntervalSpec) -> None:
        region = domain.reflect() if self.mirrored else domain
        if not _continuous_on(self.source, region.lower, region.upper):
            raise InvalidExpression(f"base {self.text!r} is not continuous on {domain}")

    def reflect(self) -> "ContinuousBase":
        """s -> base(-s); applying it twice gives back the same object."""
        return ContinuousBase(self.source, not self.mirrored)

    def __reduce__(self):
        # compiled lambdas do not pickle; worker processes recompile from the source
        return ContinuousBase, (self.source, self.mirrored)

    def __str__(self) -> str:
        return self.text
