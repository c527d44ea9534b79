"""Intervalos hospedeiros, janelas e a gramática das funções base."""
import math
import pickle

import pytest

from scripts.errors import InvalidExpression, InvalidInterval, OutOfDomain
from scripts.expressions import ContinuousBase, tokenize
from scripts.intervals import IntervalKind, IntervalSpec
from scripts.regulated_core import RegulatedFn
from scripts.trains import ExplicitTrain


def test_compact_needs_increasing_endpoints():
    with pytest.raises(InvalidInterval):
        IntervalSpec.compact(2.0, 2.0)
    with pytest.raises(InvalidInterval):
        IntervalSpec(IntervalKind.COMPACT, 0.0, 1.0, open_left=True)


def test_membership_and_neighborhoods():
    dom = IntervalSpec.compact(0.0, 2.0)
    assert dom.contains(0.0) and dom.contains(2.0)
    assert not dom.contains(2.5)
    assert not dom.has_left_neighborhood(0.0)
    assert dom.has_right_neighborhood(0.0)
    assert not dom.is_interior(2.0)

    ray = IntervalSpec.right_ray(1.0)
    assert not ray.contains(math.inf)
    assert ray.has_right_neighborhood(1e300)


def test_windows_carry_open_ends():
    w = IntervalSpec.window(0.0, 1.0, open_left=True)
    assert not w.contains(0.0) and w.contains(1.0)
    assert IntervalSpec.window(1.0, 1.0, open_left=True).is_empty
    assert not IntervalSpec.window(1.0, 1.0).is_empty
    assert w.within(IntervalSpec.compact(0.0, 1.0))
    assert not IntervalSpec.window(-1.0, 1.0).within(IntervalSpec.nonneg())


def test_reflect_swaps_rays_and_open_ends():
    assert IntervalSpec.right_ray(1.0).reflect() == IntervalSpec.left_ray(-1.0)
    assert IntervalSpec.nonneg().reflect() == IntervalSpec.left_ray(0.0)
    w = IntervalSpec.window(0.0, 1.0, open_left=True).reflect()
    assert (w.lower, w.upper, w.open_left, w.open_right) == (-1.0, 0.0, False, True)


def test_clip_keeps_the_tighter_end():
    w = IntervalSpec.window(-1.0, 3.0).clip(0.0, 2.0, open_left=True, open_right=True)
    assert (w.lower, w.upper, w.open_left, w.open_right) == (0.0, 2.0, True, True)
    assert IntervalSpec.window(0.0, 1.0).clip(2.0, 3.0).is_empty


def test_to_dict_writes_infinite_ends_as_strings():
    assert IntervalSpec.nonneg().to_dict() == {"kind": "nonneg"}
    assert IntervalSpec.window(0.0, math.inf, open_left=True).to_dict()["interval"] == [0.0, "inf"]


# ---------------------------------------------------------------------------
# base functions
# ---------------------------------------------------------------------------

def test_grammar_evaluates_closed_forms():
    base = ContinuousBase("sin(t) + pow(t, 2) - exp(0*t)")
    assert base(0.0) == pytest.approx(-1.0)
    assert base(2.0) == pytest.approx(math.sin(2.0) + 4.0 - 1.0)
    assert ContinuousBase.constant(3).is_constant


@pytest.mark.parametrize("text", ["t**2", "log(t)", "sin t", "", "t $ 1", "x + 1"])
def test_grammar_rejects_text_outside_it(text):
    with pytest.raises(InvalidExpression):
        ContinuousBase(text)


def test_tokenize_splits_numbers_names_and_operators():
    kinds = [k for k, _ in tokenize("2.5e-1*cos(t)")]
    assert kinds == ["num", "op", "name", "op", "name", "op"]


def test_continuity_is_checked_on_the_domain():
    ContinuousBase("1/t").check_continuous(IntervalSpec.compact(1.0, 2.0))
    with pytest.raises(InvalidExpression):
        ContinuousBase("1/t").check_continuous(IntervalSpec.compact(-1.0, 1.0))


@pytest.mark.parametrize(
    "text, lo, hi",
    [
        ("1/t", -1.0, 1.0),
        ("pow(t, -1)", -1.0, 1.0),
        ("1/(t - 0.5)", 0.0, 1.0),
        ("1/cos(t)", 0.0, 2.0),
        ("pow(t, 0.5)", -1.0, 1.0),
    ],
)
def test_discontinuous_bases_are_rejected(text, lo, hi):
    with pytest.raises(InvalidExpression):
        ContinuousBase(text).check_continuous(IntervalSpec.compact(lo, hi))


@pytest.mark.parametrize("text", ["sin(t) + pow(t, 2)", "exp(t) - cos(2*t)", "1/(t + 3)"])
def test_continuous_bases_pass(text):
    ContinuousBase(text).check_continuous(IntervalSpec.compact(-1.0, 1.0))


def test_building_with_a_pole_inside_fails():
    with pytest.raises(InvalidExpression):
        RegulatedFn.build(IntervalSpec.compact(-1.0, 1.0), ContinuousBase("1/t"), ExplicitTrain())


def test_undefined_value_is_out_of_domain():
    with pytest.raises(OutOfDomain):
        ContinuousBase("1/t")(0.0)


def test_reflected_base_reads_minus_t():
    base = ContinuousBase("t + 1")
    mirrored = base.reflect()
    assert mirrored(2.0) == base(-2.0)
    assert mirrored.text == "(0-t) + 1"
    assert mirrored.reflect() == base


def test_base_survives_pickling():
    base = ContinuousBase("cos(t)").reflect()
    clone = pickle.loads(pickle.dumps(base))
    assert clone == base
    assert clone(0.5) == base(0.5)
