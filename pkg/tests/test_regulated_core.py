"""Valores, limites laterais, saltos, partições em camadas e reflexão."""
import math

import pytest
from hypothesis import given, settings, strategies as st

from scripts.errors import (
    BoundaryPoint,
    InvalidInterval,
    InvalidTrain,
    NoLeftNeighborhood,
    NonpositiveEpsilon,
    NonpositiveTolerance,
    OutOfDomain,
    ResolutionLimit,
    UnboundedWindowWithoutCertificate,
)
from scripts.expressions import ContinuousBase
from scripts.intervals import IntervalSpec
from scripts.regulated_core import (
    Orientation,
    RegulatedFn,
    derive_minus,
    derive_plus,
    eval_at,
    jump_at,
    jump_process,
    jumps_at_least,
    layered_partition,
    left_limit,
    reflect,
    right_limit,
    strip_partition,
    validate,
)
from scripts.sequences import DyadicIndex, PowerWeights, layer_index
from scripts.trains import ExplicitTrain, GeneratedTrain, JumpAtom, lattice_train

UNIT = IntervalSpec.compact(0.0, 1.0)


def _fn(atoms, domain=UNIT, base="0"):
    return RegulatedFn.build(domain, ContinuousBase(base), ExplicitTrain.build(atoms))


@st.composite
def explicit_fns(draw, max_atoms=12):
    locs = draw(st.lists(st.floats(0.001, 0.999), unique=True, max_size=max_atoms))
    tiny = st.sampled_from([5e-324, -5e-324, 1e-300, -1e-300, 1e-17])
    gaps = st.one_of(st.floats(-2.0, 2.0), tiny)
    atoms = [JumpAtom(loc, draw(gaps), draw(gaps)) for loc in locs]
    return _fn(atoms)


# ---------------------------------------------------------------------------
# values and limits
# ---------------------------------------------------------------------------

def test_unit_step_values(step_fn):
    assert eval_at(step_fn, 1.0) == 1.0
    assert eval_at(step_fn, 0.5) == 0.0
    assert left_limit(step_fn, 1.0) == 0.0
    assert right_limit(step_fn, 1.0) == 1.0
    assert jump_at(step_fn, 1.0) == 1.0
    assert jump_at(step_fn, 0.7) == 0.0


def test_constant_function_has_equal_limits():
    f = RegulatedFn.build(UNIT, ContinuousBase.constant(3.0), ExplicitTrain())
    assert eval_at(f, 0.4) == left_limit(f, 0.4) == right_limit(f, 0.4) == 3.0


def test_split_atom_limits():
    f = _fn([JumpAtom(0.5, 0.2, 0.3)])
    assert left_limit(f, 0.5) == 0.0
    assert eval_at(f, 0.5) == 0.2
    assert right_limit(f, 0.5) == 0.5
    assert jump_at(f, 0.5) == right_limit(f, 0.5) - left_limit(f, 0.5)


def test_base_adds_to_the_jumps():
    f = _fn([JumpAtom(0.5, 0.0, 1.0)], base="2*t")
    assert eval_at(f, 0.75) == pytest.approx(2.5)
    assert left_limit(f, 0.5) == pytest.approx(1.0)


def test_geometric_train_sums_to_one(geo_fn):
    assert eval_at(geo_fn, 1.0) == pytest.approx(1.0, abs=1e-11)
    assert left_limit(geo_fn, 1.0) == pytest.approx(1.0, abs=1e-11)
    assert right_limit(geo_fn, 1.0) == pytest.approx(1.0, abs=1e-11)
    # left-continuous: the value at an atom is the left limit
    assert eval_at(geo_fn, 0.5) == 0.0
    assert right_limit(geo_fn, 0.5) == 0.5
    assert eval_at(geo_fn, 5.0) == pytest.approx(1.0, abs=1e-11)


def test_domain_errors(step_fn):
    with pytest.raises(OutOfDomain):
        eval_at(step_fn, 3.0)
    with pytest.raises(NoLeftNeighborhood):
        left_limit(step_fn, 0.0)
    with pytest.raises(BoundaryPoint):
        jump_at(step_fn, 0.0)
    assert jump_process(step_fn, 0.0) == 0.0
    assert jump_process(step_fn, 1.0) == 1.0


def test_tolerance_must_be_positive(geo_fn):
    with pytest.raises(NonpositiveTolerance):
        eval_at(geo_fn, 1.0, tol=0.0)


def test_atoms_must_be_interior():
    with pytest.raises(InvalidTrain):
        _fn([JumpAtom(1.0, 0.0, 1.0)])
    with pytest.raises(InvalidTrain):
        ExplicitTrain.build([JumpAtom(0.5, 1.0, 0.0), JumpAtom(0.5, 0.0, 1.0)])


# ---------------------------------------------------------------------------
# epsilon-level jump sets
# ---------------------------------------------------------------------------

def test_jumps_at_least_on_the_step(step_fn):
    assert jumps_at_least(step_fn, 0.5) == [(1.0, 1.0)]
    assert jumps_at_least(step_fn, 1.5) == []
    with pytest.raises(NonpositiveEpsilon):
        jumps_at_least(step_fn, 0.0)
    with pytest.raises(OutOfDomain):
        jumps_at_least(step_fn, 0.5, IntervalSpec.window(1.0, 3.0))


@pytest.mark.parametrize("eps", [10.0 ** (-x) for x in [0.05 + 0.3 * i for i in range(50)]])
def test_geometric_jump_count_is_floor_log2(geo_fn, eps):
    found = jumps_at_least(geo_fn, eps, IntervalSpec.window(0.0, 1.0))
    assert len(found) == math.floor(math.log2(1.0 / eps))


def test_unresolvable_level_is_refused(geo_fn):
    with pytest.raises(ResolutionLimit):
        jumps_at_least(geo_fn, 1e-300)


def test_lattice_needs_a_bounded_window():
    f = RegulatedFn(IntervalSpec.right_ray(0.0), ContinuousBase.zero(), lattice_train(1.0))
    with pytest.raises(UnboundedWindowWithoutCertificate):
        jumps_at_least(f, 0.5)
    found = jumps_at_least(f, 0.5, IntervalSpec.window(0.0, 3.5))
    assert [loc for loc, _ in found] == [1.0, 2.0, 3.0]


@settings(max_examples=50, deadline=None)
@given(explicit_fns(), st.floats(0.01, 2.0), st.floats(0.01, 2.0))
def test_level_sets_shrink_as_eps_grows(f, a, b):
    small, large = sorted((a, b))
    assert set(jumps_at_least(f, large)) <= set(jumps_at_least(f, small))


@settings(max_examples=50, deadline=None)
@given(explicit_fns())
def test_level_sets_exhaust_the_jumps(f):
    nonzero = sorted((a.loc, a.jump) for a in f.train.atoms if a.jump != 0.0)
    if nonzero:
        assert jumps_at_least(f, min(abs(j) for _, j in nonzero)) == nonzero
    sizes = [len(jumps_at_least(f, 2.0 ** -k)) for k in range(64)]
    assert sizes == sorted(sizes)


def test_geometric_level_sets_increase_to_every_jump(geo_fn):
    window = IntervalSpec.window(0.0, 1.0)
    previous = []
    for k in range(1, 40):
        found = jumps_at_least(geo_fn, 2.0 ** -k, window)
        assert set(previous) <= set(found)
        assert found == [(1.0 - 2.0 ** -j, 2.0 ** -j) for j in range(1, k + 1)]
        previous = found


# ---------------------------------------------------------------------------
# layered partitions
# ---------------------------------------------------------------------------

def test_layers_bucket_by_magnitude():
    f = _fn([
        JumpAtom(0.2, 0.0, 1.5),
        JumpAtom(0.4, 0.0, -0.7),
        JumpAtom(0.6, 0.0, 0.3),
        JumpAtom(0.8, 0.0, 0.3),
    ])
    part = layered_partition(f)
    assert part.layer(1) == ((0.2, 1.5),)
    assert part.layer(2) == ((0.4, -0.7),)
    assert part.layer(3) == ()
    assert part.layer(4) == ((0.6, 0.3), (0.8, 0.3))
    assert part.complete and part.is_disjoint()


def test_no_atoms_means_empty_layers():
    part = layered_partition(_fn([]))
    assert part.cells == {}
    assert all(layer == () for layer in part.layers)


def test_geometric_layers_follow_the_bucket_rule(geo_fn):
    part = layered_partition(geo_fn, depth=4)
    assert part.layer(1) == ()
    assert part.layer(2) == ((0.5, 0.5),)
    # 1/4 sits exactly on the boundary of the fourth bucket
    assert layer_index(0.25) == 4
    assert part.layer(3) == ()
    assert part.layer(4) == ((0.75, 0.25),)
    assert part.tail_bound == pytest.approx(0.25)
    assert not part.complete


@pytest.mark.parametrize("size", [1 / 3, 1e-17, 1e-300, 2.2250738585072014e-308, 5e-324])
def test_layer_index_of_small_magnitudes(size):
    j = layer_index(size)
    assert size >= 1 / j
    assert j == 1 or size < 1 / (j - 1)
    assert layer_index(-size) == j


def test_layer_index_edges():
    assert layer_index(0.0) is None
    assert layer_index(1 / 3) == 3
    assert layer_index(1.0) == layer_index(7.5) == 1


def test_tiny_jumps_get_a_layer():
    f = _fn([JumpAtom(0.3, 0.0, 1e-300), JumpAtom(0.6, 5e-324, 0.0), JumpAtom(0.9, 0.0, 0.5)])
    part = layered_partition(f)
    assert part.complete and part.is_disjoint()
    assert part.layer(2) == ((0.9, 0.5),)
    assert part.layer(layer_index(1e-300)) == ((0.3, 1e-300),)
    assert part.depth == layer_index(5e-324)
    assert part.union() == jumps_at_least(f, 5e-324)


def _check_layers(f, part):
    assert part.is_disjoint()
    # tiny jumps push the depth far out; check the shallow levels and every occupied one
    levels = set(range(1, min(part.depth, 64) + 1)) | set(part.cells) | {part.depth}
    for m in sorted(levels):
        assert part.union(upto=m) == jumps_at_least(f, 1 / m, part.window)


@settings(max_examples=20, deadline=None)
@given(explicit_fns())
def test_layer_unions_equal_level_sets(f):
    _check_layers(f, layered_partition(f))


def test_geometric_layer_unions_equal_level_sets(geo_fn):
    _check_layers(geo_fn, layered_partition(geo_fn, depth=20))


@pytest.mark.parametrize("shallow, deep", [(1, 40), (4, 20), (8, 33)])
def test_generated_layers_do_not_depend_on_depth(geo_fn, shallow, deep):
    a = layered_partition(geo_fn, depth=shallow)
    b = layered_partition(geo_fn, depth=deep)
    for k in range(1, shallow + 1):
        assert a.layer(k) == b.layer(k)
    assert b.union(upto=shallow) == a.union()
    assert b.tail_bound <= a.tail_bound


def test_generated_layers_merge_the_same_in_any_order(geo_fn):
    part = layered_partition(geo_fn, depth=32)
    keys = sorted(part.cells)
    expected = jumps_at_least(geo_fn, 1.0 / 32, part.window)
    for order in (keys, keys[::-1], keys[1::2] + keys[::2]):
        assert sorted(p for k in order for p in part.layer(k)) == part.union() == expected


def test_strip_partition_relabels_along_antidiagonals():
    f = _fn(
        [JumpAtom(0.5, 0.0, 1.5), JumpAtom(1.0, 0.0, 0.3), JumpAtom(1.5, 0.0, 0.7)],
        domain=IntervalSpec.nonneg(),
    )
    part = strip_partition(f, depth=6)
    assert part.labels[1] == (1, 1)
    assert part.labels[3] == (2, 1)
    assert part.labels[5] == (2, 2)
    assert part.cells[1] == ((0.5, 1.5), (1.0, 0.3))
    assert part.cells[5] == ((1.5, 0.7),)
    assert part.is_disjoint()


def test_strip_partition_needs_the_half_line():
    f = RegulatedFn.build(IntervalSpec.line(), ContinuousBase.zero(), ExplicitTrain())
    with pytest.raises(InvalidInterval):
        strip_partition(f)


# ---------------------------------------------------------------------------
# reflection and one-sided companions
# ---------------------------------------------------------------------------

def test_reflect_moves_and_swaps_the_atom():
    f = _fn([JumpAtom(0.5, 0.2, 0.3)], domain=IntervalSpec.compact(0.0, 2.0))
    g = reflect(f)
    assert g.domain == IntervalSpec.compact(-2.0, 0.0)
    assert g.train.atoms == (JumpAtom(-0.5, -0.3, -0.2),)
    assert g.orientation is Orientation.RIGHT
    assert reflect(g) == f


def test_reflect_constant_has_no_jumps():
    f = RegulatedFn.build(UNIT, ContinuousBase.constant(3.0), ExplicitTrain())
    g = reflect(f)
    assert jumps_at_least(g, 1e-9) == []
    assert eval_at(g, -0.3) == 3.0


@settings(max_examples=20, deadline=None)
@given(explicit_fns(), st.floats(0.01, 2.0))
def test_reflection_negates_level_sets(f, eps):
    mirrored = jumps_at_least(reflect(f), eps)
    assert mirrored == sorted((-loc, -jump) for loc, jump in jumps_at_least(f, eps))


@settings(max_examples=20, deadline=None)
@given(explicit_fns(), st.floats(0.0, 1.0))
def test_reflection_preserves_values(f, t):
    assert eval_at(reflect(f), -t) == pytest.approx(eval_at(f, t), abs=1e-12)


def test_reflected_generated_train(geo_fn):
    g = reflect(geo_fn)
    assert g.domain == IntervalSpec.left_ray(0.0)
    assert eval_at(g, -1.0) == pytest.approx(1.0, abs=1e-11)
    assert jumps_at_least(g, 0.2) == [(-0.75, -0.25), (-0.5, -0.5)]


def test_derived_companions_take_one_sided_limits():
    f = _fn([JumpAtom(0.5, 0.2, 0.3), JumpAtom(0.7, 0.4, -0.4)])
    plus, minus = derive_plus(f), derive_minus(f)
    assert eval_at(plus, 0.5) == right_limit(f, 0.5) == 0.5
    assert eval_at(minus, 0.5) == left_limit(f, 0.5) == 0.0
    # the removable discontinuity at 0.7 disappears
    assert [a.loc for a in plus.train.atoms] == [0.5]
    for k in range(1, 12):
        delta = 10.0 ** (-k)
        assert abs(eval_at(plus, 0.5 + delta) - eval_at(plus, 0.5)) == 0.0
        assert abs(eval_at(minus, 0.5 - delta) - eval_at(minus, 0.5)) == 0.0


def test_derived_generated_train_is_left_or_right_continuous(geo_fn):
    assert derive_plus(geo_fn).train.cadlag
    assert derive_minus(geo_fn).train.caglad
    assert eval_at(derive_plus(geo_fn), 0.5) == 0.5


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _check(report, name):
    return next(c for c in report.checks if c["check"] == name)


def test_validate_well_formed_train(hand_path):
    report = validate(hand_path)
    assert report.ok
    assert report.cadlag and not report.caglad


def test_validate_reports_duplicate_locations():
    f = RegulatedFn(UNIT, ContinuousBase.zero(), ExplicitTrain((JumpAtom(0.5, 1.0, 0.0), JumpAtom(0.5, 0.0, 1.0))))
    report = validate(f)
    assert not report.ok
    assert not _check(report, "ordering")["ok"]


def test_validate_reports_infinite_certificate():
    train = GeneratedTrain(PowerWeights(1.0), DyadicIndex(), rule="harmonic")
    f = RegulatedFn(IntervalSpec.compact(0.0, 2.0), ContinuousBase.zero(), train)
    report = validate(f)
    assert not _check(report, "certificate_finite")["ok"]


def test_validate_lists_removable_points():
    f = RegulatedFn(UNIT, ContinuousBase.zero(), ExplicitTrain((JumpAtom(0.5, 0.3, -0.3),)))
    assert validate(f).removable == [0.5]
