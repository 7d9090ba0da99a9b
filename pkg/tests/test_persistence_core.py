import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pathzeta.discretization import bar_shift, empirical_positive_step
from pathzeta.errors import DegenerateSampleError, InvalidInputError, InvalidParameterError, ParseError
from pathzeta.persistence_core import (
    Bar,
    Barcode,
    barcode_to_csv,
    count_bars_geq,
    count_bars_geq_many,
    count_bars_updown,
    count_rectangle,
    count_upcrossings,
    holder_exponent_estimate,
    mellin_count_integral,
    parse_barcode_csv,
    pers_p,
    read_barcode_csv,
    superlevel_barcode,
    tree_measure,
    tree_measure_from_counts,
    write_barcode_csv,
)
from pathzeta.process_sim import SeedSpec, simulate_alpha_stable, simulate_brownian

EXAMPLE = [0.0, 1.0, 0.0, 2.0]


def naive_barcode(v):
    """Elder-rule merge with explicit component labels, quadratic time."""
    n = len(v)
    order = sorted(range(n), key=lambda i: (-v[i], i))
    label = [None] * n
    peak = {}  # label -> (value, rank)
    finite = []
    for rank, i in enumerate(order):
        nbrs = {label[j] for j in (i - 1, i + 1) if 0 <= j < n and label[j] is not None}
        if not nbrs:
            label[i] = i
            peak[i] = (v[i], rank)
            continue
        if len(nbrs) == 1:
            label[i] = nbrs.pop()
            continue
        a, b = sorted(nbrs, key=lambda c: (-peak[c][0], peak[c][1]))  # a is the elder
        if peak[b][0] > v[i]:
            finite.append((peak[b][0], v[i]))
        for j in range(n):
            if label[j] == b:
                label[j] = a
        label[i] = a
    return (max(v), min(v)), sorted(finite)


paths = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=40)
int_paths = st.lists(st.integers(-3, 3).map(float), min_size=1, max_size=40)


def test_example_barcode():
    bc = superlevel_barcode(EXAMPLE)
    assert list(bc) == [Bar(2.0, 0.0, True), Bar(1.0, 0.0, False)]


def test_constant_and_monotone():
    bc = superlevel_barcode([1.5, 1.5, 1.5])
    assert list(bc) == [Bar(1.5, 1.5, True)]
    assert bc.range == 0.0
    assert list(superlevel_barcode([0.0, 1.0, 2.0, 3.0])) == [Bar(3.0, 0.0, True)]


def test_empty_path_rejected():
    with pytest.raises(InvalidInputError):
        superlevel_barcode([])
    with pytest.raises(InvalidInputError):
        superlevel_barcode([0.0, math.nan])


@given(st.one_of(paths, int_paths))
def test_barcode_matches_naive_merge(v):
    bc = superlevel_barcode(v)
    inf, finite = naive_barcode(v)
    assert (bc.path_max, bc.path_min) == inf
    got = sorted(zip(bc.births[1:].tolist(), bc.deaths[1:].tolist()))
    assert got == finite


def test_ties_elder_is_earlier_index():
    # two equal peaks: the later one dies
    bc = superlevel_barcode([0.0, 2.0, 1.0, 2.0, 0.0])
    assert list(bc) == [Bar(2.0, 0.0, True), Bar(2.0, 1.0, False)]


def test_count_examples():
    bc = superlevel_barcode(EXAMPLE)
    assert count_bars_geq(bc, 0.5) == 2
    assert count_bars_geq(bc, 1.5) == 1
    assert count_bars_geq(bc, 2.5) == 0
    assert count_bars_updown(EXAMPLE, 0.5) == 2
    assert count_bars_updown([0.0, 1.0, 0.0, 1.0, 0.0], 0.9) == 2
    assert count_bars_updown([0.0, 1.0, 2.0, 3.0], 3.0) == 1
    for counter in (lambda x, e: count_rectangle(bc, x, e), lambda x, e: count_upcrossings(EXAMPLE, x, e)):
        assert counter(0.25, 0.5) == 2
        assert counter(1.25, 0.5) == 1
        assert counter(2.5, 0.5) == 0


@pytest.mark.parametrize("eps", [0.0, -1.0, math.nan])
def test_eps_must_be_positive(eps):
    bc = superlevel_barcode(EXAMPLE)
    with pytest.raises(InvalidParameterError):
        count_bars_geq(bc, eps)
    with pytest.raises(InvalidParameterError):
        count_bars_updown(EXAMPLE, eps)
    with pytest.raises(InvalidParameterError):
        count_rectangle(bc, 0.0, eps)


@given(st.one_of(paths, int_paths), st.floats(1e-3, 25))
def test_global_oracle_equivalence(v, eps):
    assert count_bars_geq(superlevel_barcode(v), eps) == count_bars_updown(v, eps)


@given(st.one_of(paths, int_paths), st.floats(-12, 12), st.floats(1e-3, 25), st.booleans())
def test_local_oracle_equivalence(v, x, eps, inc):
    bc = superlevel_barcode(v)
    assert count_rectangle(bc, x, eps, inc) == count_upcrossings(v, x, eps, inc)


@given(paths, st.floats(1e-3, 25))
def test_count_above_range_is_zero(v, extra):
    bc = superlevel_barcode(v)
    assert count_bars_geq(bc, bc.range + extra) == 0


@given(paths)
def test_count_monotone_in_eps(v):
    bc = superlevel_barcode(v)
    grid = np.linspace(0.01, 21, 60)
    assert np.all(np.diff(count_bars_geq_many(bc, grid)) <= 0)


def test_pers_p_examples():
    bc = superlevel_barcode(EXAMPLE)
    assert pers_p(bc, 2) == 5.0
    assert pers_p(bc, 2, include_infinite=False) == 1.0
    assert pers_p(bc, 1) == tree_measure(bc, 0.0) == 3.0
    with pytest.raises(InvalidParameterError):
        pers_p(bc, 0.0)


def test_tree_measure_examples():
    bc = superlevel_barcode(EXAMPLE)
    assert tree_measure(bc, 0.5) == 2.0
    assert tree_measure(bc, 2.0) == 0.0
    assert tree_measure(bc, 7.0) == 0.0


@given(paths, st.sampled_from([0.5, 1.0, 2.0, 3.7]))
def test_mellin_duality(v, p):
    bc = superlevel_barcode(v)
    direct = pers_p(bc, p)
    assert mellin_count_integral(bc, p) == pytest.approx(direct, rel=1e-9, abs=1e-300)


@given(paths, st.floats(0, 25))
def test_tree_measure_is_integral_of_counts(v, eps):
    bc = superlevel_barcode(v)
    assert tree_measure_from_counts(bc, eps) == pytest.approx(tree_measure(bc, eps), rel=1e-12, abs=1e-12)


def crossing_integral(v, eps):
    """int N^{x,x+eps} dx: the count is constant between the points v_k and v_k - eps."""
    knots = np.unique(np.concatenate([v, np.asarray(v) - eps]))
    total = []
    for a, b in zip(knots[:-1], knots[1:]):
        total.append((b - a) * count_upcrossings(v, 0.5 * (a + b), eps))
    return math.fsum(total)


@given(st.lists(st.integers(-20, 20).map(lambda k: k / 4), min_size=1, max_size=30), st.integers(1, 30))
def test_tree_measure_is_integral_of_crossings(v, k):
    # dyadic values keep every knot exact
    eps = k / 8
    bc = superlevel_barcode(v)
    assert crossing_integral(v, eps) == tree_measure(bc, eps)


@given(paths)
def test_tree_measure_convex_decreasing(v):
    bc = superlevel_barcode(v)
    grid = np.linspace(0, 21, 43)
    vals = np.array([tree_measure(bc, e) for e in grid])
    assert np.all(np.diff(vals) <= 1e-12)
    assert np.all(np.diff(vals, 2) >= -1e-9)


@given(paths, st.floats(0.5, 2.0), st.floats(2.5, 5.0), st.floats(0, 1))
def test_lyapunov_interpolation(v, p0, p1, theta):
    bc = superlevel_barcode(v)
    assume(bc.range > 0)
    p = (1 - theta) * p0 + theta * p1
    holder = pers_p(bc, p0) ** (1 - theta) * pers_p(bc, p1) ** theta
    assert pers_p(bc, p) <= holder * (1 + 1e-12)
    factor = p / (p0 ** (1 - theta) * p1**theta)
    assert pers_p(bc, p) <= factor * holder * (1 + 1e-12)


@given(paths, st.integers(0, 2**32), st.floats(0.01, 0.5), st.floats(1, 6))
def test_stability_bracket(v, seed, delta, ratio):
    v = np.asarray(v)
    noise = np.random.default_rng(seed).uniform(-delta, delta, v.size)
    bc, bc2 = superlevel_barcode(v), superlevel_barcode(v + noise)
    d = float(np.max(np.abs(noise)))
    eps = max(ratio * 2 * d, 1e-6)
    lo = count_bars_geq(bc, eps + 2 * d)
    hi = count_bars_geq(bc, eps - 2 * d) if eps > 2 * d else bc.sorted_lengths.size
    assert lo <= count_bars_geq(bc2, eps) <= hi


def test_stability_bracket_needs_twice_the_perturbation():
    # lifting both minima by d shortens the only bar by 2d
    d = 0.1
    bc, bc2 = superlevel_barcode([0.0, 1.0, 0.0]), superlevel_barcode([d, 1.0 - d, d])
    eps = 1.0 - 1.5 * d
    assert count_bars_geq(bc, eps + d) == 1
    assert count_bars_geq(bc2, eps) == 0


def test_holder_brownian():
    p = simulate_brownian(1.0, 2**16, SeedSpec(12))
    grid = np.geomspace(0.02, 0.2, 8)
    shift = bar_shift(2.0, empirical_positive_step(p.values))
    assert holder_exponent_estimate(p, grid, shift) == pytest.approx(2.0, abs=0.15)


def test_holder_monotone_and_errors():
    assert holder_exponent_estimate(np.linspace(0, 1, 50), [0.1, 0.5]) == 1.0
    with pytest.raises(InvalidParameterError):
        holder_exponent_estimate(EXAMPLE, [0.1])
    with pytest.raises(DegenerateSampleError):
        holder_exponent_estimate(EXAMPLE, [0.1, 5.0])


def test_holder_stable():
    est = []
    for r in range(5):
        p = simulate_alpha_stable(1.5, 1.0, 2**16, SeedSpec(13, r))
        shift = bar_shift(1.5, empirical_positive_step(p.values))
        est.append(holder_exponent_estimate(p, np.geomspace(0.02, 0.2, 8), shift))
    assert float(np.median(est)) == pytest.approx(1.5, abs=0.2)


def test_barcode_csv_roundtrip(tmp_path):
    bc = superlevel_barcode(simulate_brownian(1.0, 100, 3))
    f = tmp_path / "b.csv"
    write_barcode_csv(bc, f)
    assert read_barcode_csv(f) == bc
    assert barcode_to_csv(superlevel_barcode(EXAMPLE)) == "birth,death,is_infinite\n2,0,true\n1,0,false\n"


@pytest.mark.parametrize(
    "text",
    [
        "",
        "birth,death\n1,0\n",
        "birth,death,is_infinite\n1,0,maybe\n",
        "birth,death,is_infinite\n0,1,true\n",
        "birth,death,is_infinite\n1,0,false\n",
        "birth,death,is_infinite\n1,0,true\n2,0,true\n",
    ],
)
def test_barcode_csv_errors(text):
    with pytest.raises(ParseError):
        parse_barcode_csv(text.splitlines(keepends=True))


def test_barcode_validation():
    with pytest.raises(InvalidInputError):
        Barcode([1.0, 3.0], [0.0, 0.0])
    with pytest.raises(InvalidInputError):
        Barcode([], [])
