import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathzeta.diagram_metrics import (
    DIAGONAL,
    Diagram,
    bottleneck,
    brute_force_bottleneck,
    brute_force_wasserstein,
    diagram_to_csv,
    distance,
    distance_matrix,
    distance_matrix_to_csv,
    parse_diagram_csv,
    pers_p_measure,
    read_diagram_csv,
    wasserstein_p,
    zeta_of_measure,
    zeta_of_measure_direct,
    zeta_of_measure_mellin,
)
from pathzeta.errors import InvalidInputError, InvalidParameterError, ParseError
from pathzeta.persistence_core import pers_p, superlevel_barcode

A1 = Diagram([[1.0, 0.0]])
A2 = Diagram([[2.0, 0.0]])
EMPTY = Diagram.empty()


@st.composite
def diagrams(draw, max_points=6):
    k = draw(st.integers(0, max_points))
    pts = []
    for _ in range(k):
        d = draw(st.floats(-2, 2))
        pts.append((d + draw(st.floats(1e-3, 3)), d))
    return Diagram(np.array(pts).reshape(-1, 2))


def test_wasserstein_examples():
    assert wasserstein_p(A1, EMPTY, 2)[0] == 0.5
    assert wasserstein_p(A2, A2, 2)[0] == 0.0
    d, plan = wasserstein_p(A2, A1, 1)
    assert d == 1.0
    assert plan.pairs == ((0, 0),)


def test_bottleneck_examples():
    assert bottleneck(A2, A1) == 1.0
    assert bottleneck(A1, EMPTY) == 0.5
    assert bottleneck(EMPTY, EMPTY) == 0.0


def test_transport_plan_covers_both_diagrams():
    a = Diagram([[3.0, 0.0], [1.0, 0.9]])
    b = Diagram([[2.9, 0.1]])
    _, plan = wasserstein_p(a, b, 2)
    assert sorted(plan.pairs) == [(0, 0), (1, DIAGONAL)]


def test_invalid_order():
    for p in (0.5, math.nan, -math.inf):
        with pytest.raises(InvalidParameterError):
            distance(A1, A2, p)
    with pytest.raises(InvalidParameterError):
        wasserstein_p(A1, A2, math.inf)


def test_diagram_validation():
    with pytest.raises(InvalidInputError):
        Diagram([[0.0, 1.0]])
    with pytest.raises(InvalidInputError):
        Diagram([[math.inf, 1.0]])


@given(diagrams(), diagrams(), st.sampled_from([1.0, 2.0, 3.5]))
def test_wasserstein_matches_enumeration(a, b, p):
    assert wasserstein_p(a, b, p)[0] == brute_force_wasserstein(a, b, p)


@given(diagrams(), diagrams())
def test_bottleneck_matches_enumeration(a, b):
    assert bottleneck(a, b) == brute_force_bottleneck(a, b)


@given(diagrams(), diagrams(), st.floats(1, 4))
def test_bottleneck_below_wasserstein(a, b, p):
    assert bottleneck(a, b) <= wasserstein_p(a, b, p)[0] * (1 + 1e-12)


@given(diagrams(), diagrams(), diagrams(), st.floats(1, 3))
def test_metric_axioms(a, b, c, p):
    dab = distance(a, b, p)
    assert dab == pytest.approx(distance(b, a, p), rel=1e-12, abs=1e-15)
    assert distance(a, a, p) == 0.0
    assert dab <= (distance(a, c, p) + distance(c, b, p)) * (1 + 1e-12) + 1e-15


@given(diagrams(8), diagrams(8), st.floats(1, 3), st.floats(0.1, 3), st.floats(0.05, 0.95), st.booleans())
def test_interpolation_inequality(a, b, p, dq, theta, q_inf):
    q = math.inf if q_inf else p + dq
    p_theta = 1.0 / (theta / p + (1.0 - theta) / q)
    rhs = 2 ** (1 - theta) * distance(a, b, p) ** theta * (pers_p_measure(a, q) + pers_p_measure(b, q)) ** (1 - theta)
    assert distance(a, b, p_theta) <= rhs * (1 + 1e-12) + 1e-15


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=40), st.integers(0, 2**32), st.floats(0, 0.3))
def test_stability(v, seed, delta):
    v = np.asarray(v)
    w = v + np.random.default_rng(seed).uniform(-delta, delta, v.size)
    da = Diagram.from_barcode(superlevel_barcode(v))
    db = Diagram.from_barcode(superlevel_barcode(w))
    assert bottleneck(da, db) <= float(np.max(np.abs(v - w)))


def test_pers_p_measure():
    a = Diagram([[2.0, 0.0], [1.0, 0.0]])
    assert pers_p_measure(a, 2) == pytest.approx(math.sqrt(1.25), rel=1e-15)
    assert pers_p_measure(EMPTY, 2) == 0.0
    assert pers_p_measure(a, math.inf) == 1.0


@given(diagrams(), st.floats(1, 4))
def test_pers_p_measure_is_distance_to_empty(a, p):
    assert pers_p_measure(a, p) == pytest.approx(wasserstein_p(a, EMPTY, p)[0], rel=1e-14, abs=1e-300)


def test_zeta_of_measure():
    a = Diagram([[2.0, 0.0], [1.0, 0.0]])
    assert zeta_of_measure(a, 2) == 5.0
    assert zeta_of_measure(a, 1) == pytest.approx(float(a.persistence.sum()))
    bc = superlevel_barcode([0.0, 1.3, 0.2, 2.0, -0.5, 0.4])
    assert zeta_of_measure(Diagram.from_barcode(bc), 2.5) == pytest.approx(pers_p(bc, 2.5), rel=1e-14)
    with pytest.raises(InvalidParameterError):
        zeta_of_measure(a, 0.0)


@given(diagrams(10), st.sampled_from([0.5, 1.0, 2.0, 3.7]))
def test_zeta_of_measure_mellin_duality(a, p):
    assert zeta_of_measure_mellin(a, p) == pytest.approx(zeta_of_measure_direct(a, p), rel=1e-9, abs=1e-300)


def test_csv_roundtrip_and_matrix(tmp_path):
    a = Diagram([[2.0, 0.0], [1.0, 0.25]])
    f = tmp_path / "a.csv"
    f.write_text(diagram_to_csv(a))
    assert np.array_equal(read_diagram_csv(f).points, a.points)
    m = distance_matrix([a, A1, EMPTY], 2)
    assert m.shape == (3, 3) and np.allclose(m, m.T) and np.all(np.diag(m) == 0)
    text = distance_matrix_to_csv(["a", "b", "c"], m)
    assert text.splitlines()[0] == "name,a,b,c"


def test_diagram_csv_accepts_barcode_files():
    d = parse_diagram_csv(["birth,death,is_infinite\n", "2,0,true\n", "1,1,false\n", "1,0,false\n"])
    assert d.points.tolist() == [[2.0, 0.0], [1.0, 0.0]]
    with pytest.raises(ParseError):
        parse_diagram_csv(["birth,death,is_infinite\n", "0,1,false\n"])
