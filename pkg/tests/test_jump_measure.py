"""Somas phi dos saltos, funções de saltos acumulados e a medida de contagem."""
import math

import numpy as np
import pytest

from scripts import codec
from scripts.errors import (
    BNotInL,
    InvalidWeights,
    NotSummable,
    OverlappingRectangles,
    SchemaError,
    SizeSetTouchesZero,
)
from scripts.index_sets import ALL, EMPTY, IndexInterval, Union
from scripts.intervals import IntervalSpec
from scripts.jump_measure import (
    PhiSpec,
    Rectangle,
    card_in,
    complement_ball,
    count_via_stopping_times,
    cumulative_jump_function,
    jump_counting_measure,
    jump_graph,
    jump_measure_additivity_check,
    phi_sum_by_layers,
    phi_sum_of_jumps,
)
from scripts.path_sim import simulate
from scripts.regulated_core import eval_at, jump_at, jumps_at_least, right_limit
from scripts.sequences import (
    AffineIndex,
    ConstantWeights,
    DyadicIndex,
    GeometricWeights,
    NegatedIndex,
    OrdinalIndex,
    PowerWeights,
)
from scripts.unordered_sum import ExplicitFamily, GeneratedFamily, unordered_sum

TOL = 1e-10


def _paths(samples, name, n):
    doc = codec.load_json(samples / name)
    return [simulate(codec.model_from_dict(doc, seed=s)) for s in range(n)]


# ---------------------------------------------------------------------------
# phi
# ---------------------------------------------------------------------------

def test_phi_parse():
    assert PhiSpec.parse("power:2") == PhiSpec("power", 2.0)
    assert PhiSpec.parse("power") == PhiSpec("power", 1.0)
    assert str(PhiSpec.parse("bounded")) == "bounded"
    assert PhiSpec.parse("expm")(0.0) == 0.0


@pytest.mark.parametrize("text", ["power:x", "cubic", "power:0", "power:-1"])
def test_phi_parse_rejects(text):
    with pytest.raises((SchemaError, InvalidWeights)):
        PhiSpec.parse(text)


@pytest.mark.parametrize("phi", ["power:0.5", "power:3", "bounded", "expm"])
def test_phi_inverse_undoes_phi(phi):
    spec = PhiSpec.parse(phi)
    for x in (1e-3, 0.25, 0.9):
        assert spec.inverse(spec(x)) == pytest.approx(x, rel=1e-9)


# ---------------------------------------------------------------------------
# phi-sums
# ---------------------------------------------------------------------------

def test_geometric_phi_sums(geo_fn):
    unit = IndexInterval(0.0, 1.0)
    assert phi_sum_of_jumps(geo_fn, PhiSpec("power", 1.0), unit).value == pytest.approx(1.0, abs=TOL)
    assert phi_sum_of_jumps(geo_fn, PhiSpec("power", 2.0), unit).value == pytest.approx(1 / 3, abs=TOL)


def test_bounded_phi_on_geometric_matches_partial_sums(geo_fn):
    got = phi_sum_of_jumps(geo_fn, PhiSpec("bounded"), IndexInterval(0.0, 1.0))
    oracle = math.fsum(2.0 ** -k / (1.0 + 2.0 ** -k) for k in range(1, 80))
    assert got.value == pytest.approx(oracle, abs=TOL)


def test_no_jumps_in_time_set(geo_fn, hand_path):
    assert phi_sum_of_jumps(geo_fn, PhiSpec("power", 1.0), IndexInterval(1.0, 2.0)).value == pytest.approx(0.0, abs=TOL)
    assert phi_sum_of_jumps(hand_path, PhiSpec("power", 1.0), IndexInterval(0.8, 1.2)).value == 0.0


def test_time_set_must_lie_in_the_interior(geo_fn, hand_path):
    with pytest.raises(BNotInL):
        phi_sum_of_jumps(geo_fn, PhiSpec("power", 1.0), IndexInterval(-1.0, 0.5))
    with pytest.raises(BNotInL):
        phi_sum_of_jumps(hand_path, PhiSpec("power", 1.0), ALL)


def test_hand_path_phi_sum(hand_path):
    total = phi_sum_of_jumps(hand_path, PhiSpec("power", 1.0), IndexInterval(0.0, 1.9))
    assert total.value == pytest.approx(1.65)
    assert total.error == 0.0


def test_layered_sum_matches_direct_sum(hand_path):
    phi = PhiSpec("power", 2.0)
    window = IntervalSpec.window(0.0, 2.0, open_left=True, open_right=True)
    direct = phi_sum_of_jumps(hand_path, phi, IndexInterval(0.0, 1.9))
    assert phi_sum_by_layers(hand_path, phi, window).agrees_with(direct, slack=1e-12)


def test_truncated_layers_report_their_tail(geo_fn):
    window = IntervalSpec.window(0.0, 2.0, open_left=True)
    result = phi_sum_by_layers(geo_fn, PhiSpec("power", 1.0), window, depth=8)
    assert result.value == pytest.approx(0.875)
    assert abs(result.value - 1.0) <= result.error + 1e-12


def test_layered_sum_on_random_paths(samples):
    phi = PhiSpec("expm")
    for path in _paths(samples, "split_model.json", 20):
        window = IntervalSpec.window(0.0, 2.0, open_left=True, open_right=True)
        direct = phi_sum_of_jumps(path.fn, phi, IndexInterval(0.0, 1.999999))
        assert phi_sum_by_layers(path.fn, phi, window).agrees_with(direct, slack=1e-12)


# ---------------------------------------------------------------------------
# cumulative jump functions
# ---------------------------------------------------------------------------

def test_cumulative_function_of_two_weights(samples):
    g = cumulative_jump_function(codec.family_from_dict(codec.load_json(samples / "weights.json")))
    assert eval_at(g, 0.4) == 0.0
    assert eval_at(g, 0.5) == pytest.approx(0.2)
    assert eval_at(g, 1.0) == pytest.approx(0.2)
    assert eval_at(g, 1.5) == pytest.approx(0.5)
    assert eval_at(g, 7.0) == pytest.approx(0.5)
    assert jump_at(g, 0.5) == 0.2


def test_cumulative_function_of_nothing_is_zero():
    g = cumulative_jump_function(ExplicitFamily(()))
    assert eval_at(g, 0.0) == eval_at(g, 3.0) == 0.0


def test_cumulative_function_of_geometric_weights(samples):
    g = cumulative_jump_function(codec.family_from_dict(codec.load_json(samples / "geo_weights.json")))
    assert g.train.cadlag
    assert eval_at(g, 1.0) == pytest.approx(1.0, abs=TOL)
    for k in range(1, 10):
        assert jump_at(g, 1.0 - 2.0 ** -k) == pytest.approx(2.0 ** -k)


def test_cumulative_jumps_reproduce_the_weights():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(0, 20))
        locs = np.unique(rng.uniform(0.01, 10.0, size=n))
        weights = rng.uniform(0.01, 1.0, size=locs.size)
        fam = ExplicitFamily(tuple(zip(locs.tolist(), weights.tolist())))
        g = cumulative_jump_function(fam)
        assert right_limit(g, 0.0) == 0.0
        for s, w in fam.entries:
            assert jump_at(g, s) == w


def test_cumulative_function_needs_summable_weights():
    with pytest.raises(NotSummable):
        cumulative_jump_function(GeneratedFamily.of(ConstantWeights(1.0), OrdinalIndex()))


def test_cumulative_function_needs_positive_support():
    with pytest.raises(InvalidWeights):
        cumulative_jump_function(ExplicitFamily(((0.0, 0.5),)))
    with pytest.raises(InvalidWeights):
        cumulative_jump_function(ExplicitFamily((("a", 0.5),)))


def test_cumulative_generated_function_needs_positive_locations():
    outside = (NegatedIndex(OrdinalIndex()), NegatedIndex(DyadicIndex(origin=-1.0, span=2.0)), AffineIndex(origin=-3.0))
    for indices in outside:
        with pytest.raises(InvalidWeights):
            cumulative_jump_function(GeneratedFamily.of(GeometricWeights(0.5), indices))
    # decreasing locations 1 + 2**-k stay positive
    g = cumulative_jump_function(GeneratedFamily.of(GeometricWeights(0.5), NegatedIndex(DyadicIndex(origin=-2.0))))
    assert eval_at(g, 0.5) == 0.0
    assert eval_at(g, 3.0) == pytest.approx(1.0, abs=TOL)


@pytest.mark.parametrize(
    "family, horizon",
    [
        (GeneratedFamily.of(GeometricWeights(0.5), DyadicIndex()), 2.0),
        (GeneratedFamily.of(PowerWeights(2.0)), 40.0),
    ],
)
def test_cumulative_generated_function_starts_at_zero_and_grows(family, horizon):
    g = cumulative_jump_function(family)
    assert eval_at(g, 0.0) == 0.0 and right_limit(g, 0.0) == 0.0
    values = [eval_at(g, float(t)) for t in np.linspace(0.0, horizon, 201)]
    assert all(a <= b + 1e-9 for a, b in zip(values, values[1:]))
    assert values[-1] <= unordered_sum(family, ALL, TOL).value + 1e-9


# ---------------------------------------------------------------------------
# counting measure
# ---------------------------------------------------------------------------

def test_counting_on_the_hand_path(hand_path, samples):
    rect = codec.rectangle_from_dict(codec.load_json(samples / "rect.json"))
    assert jump_counting_measure(hand_path, rect) == 1
    all_jumps = Rectangle(IndexInterval(0.0, 2.0), complement_ball(0.0))
    assert jump_counting_measure(hand_path, all_jumps) == 3
    assert jump_counting_measure(hand_path, Rectangle(EMPTY, complement_ball(0.0))) == 0


def test_counting_agrees_with_the_graph(hand_path):
    graph = jump_graph(hand_path)
    assert graph == ((0.3, 1.2), (0.7, -0.4), (1.4, 0.05))
    negative = Rectangle(IndexInterval(0.0, 2.0), IndexInterval(-math.inf, 0.0, open_left=True, open_right=True))
    assert jump_counting_measure(hand_path, negative) == card_in(graph, negative) == 1


def test_generated_train_needs_sizes_away_from_zero(geo_fn):
    with pytest.raises(SizeSetTouchesZero):
        jump_counting_measure(geo_fn, Rectangle(IndexInterval(0.0, 1.0), complement_ball(0.0)))
    rect = Rectangle(IndexInterval(0.0, 1.0), complement_ball(0.2))
    assert jump_counting_measure(geo_fn, rect) == 2


def test_split_in_time_adds_up(hand_path, samples):
    rects = codec.rectangles_from_json(codec.load_json(samples / "rects_split.json"))
    report = jump_measure_additivity_check(hand_path, rects)
    assert report.ok
    assert report.counts == (2, 1) and report.total == 3


def test_split_in_size_adds_up(hand_path):
    time = IndexInterval(0.0, 2.0)
    low = Rectangle(time, IndexInterval(-math.inf, -0.3, open_left=True))
    high = Rectangle(time, IndexInterval(0.3, math.inf, open_right=True, open_left=False))
    whole = Rectangle(time, Union((low.size_set, high.size_set)))
    report = jump_measure_additivity_check(hand_path, [low, high])
    assert report.ok
    assert report.total == jump_counting_measure(hand_path, whole) == 2


def test_overlapping_rectangles_are_rejected(hand_path):
    rect = Rectangle(IndexInterval(0.0, 1.0), complement_ball(0.0))
    with pytest.raises(OverlappingRectangles):
        jump_measure_additivity_check(hand_path, [rect, rect])


def test_random_disjoint_rectangles_add_up(samples):
    rng = np.random.default_rng(11)
    for path in _paths(samples, "model.json", 10):
        cuts = np.sort(rng.uniform(0.0, 3.0, size=9))
        edges = [0.0, *cuts.tolist(), 3.0]
        rects = [Rectangle(IndexInterval(a, b), complement_ball(0.25)) for a, b in zip(edges, edges[1:])]
        report = jump_measure_additivity_check(path, rects)
        assert report.ok
        assert report.total == jump_counting_measure(path, Rectangle(IndexInterval(0.0, 3.0), complement_ball(0.25)))


def test_counting_matches_jumps_at_least_and_stopping_times(samples):
    rng = np.random.default_rng(2024)
    for path in _paths(samples, "model.json", 100):
        for _ in range(10):
            t = float(rng.uniform(0.1, 2.9))
            eps = float(rng.uniform(0.01, 2.0))
            rect = Rectangle(IndexInterval(0.0, t), complement_ball(eps))
            expected = len(jumps_at_least(path.fn, eps, IntervalSpec.window(0.0, t, open_left=True)))
            assert jump_counting_measure(path, rect) == expected
            assert count_via_stopping_times(path, rect) == expected


def test_counting_grows_with_the_rectangle(samples):
    rng = np.random.default_rng(5)
    for path in _paths(samples, "model.json", 30):
        for _ in range(10):
            t_in, t_out = sorted(rng.uniform(0.1, 2.9, size=2).tolist())
            e_in, e_out = sorted(rng.uniform(0.0, 2.0, size=2).tolist(), reverse=True)
            inner = Rectangle(IndexInterval(0.0, t_in), complement_ball(e_in))
            outer = Rectangle(IndexInterval(0.0, t_out), complement_ball(e_out))
            assert jump_counting_measure(path, inner) <= jump_counting_measure(path, outer)


def test_counting_on_the_geometric_train_grows_as_the_ball_shrinks(geo_fn):
    time = IndexInterval(0.0, 1.0)
    counts = [jump_counting_measure(geo_fn, Rectangle(time, complement_ball(r))) for r in (0.6, 0.4, 0.2, 0.1, 0.01)]
    assert counts == sorted(counts)
    assert counts[0] == 0 and counts[-1] >= counts[2] == 2
