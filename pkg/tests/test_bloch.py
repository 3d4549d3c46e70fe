import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lhscert.bloch import (
    POLYTOPE_NAMES, Polytope, bloch_to_state, bloch_vector, facet_functionals,
    functional_to_operator, inradius, load_polytope, make_polytope, operator_to_functional,
)

EXPECTED = {  # name: (vertices, functionals incl. both signs)
    "tetrahedron": (4, 8),
    "octahedron": (6, 22),
    "cube": (8, 40),
    "icosahedron": (12, 134),
}


def _canon(f):
    f = f / np.linalg.norm(f)
    i = np.argmax(np.abs(f) > 1e-7)
    f = f * np.sign(f[i])
    return tuple(np.round(f, 6) + 0.0)


def brute_force_planes(v):
    """Planes through every non-collinear vertex triple via cross products."""
    out = set()
    for a, b, c in itertools.combinations(v, 3):
        n = np.cross(b - a, c - a)
        if np.linalg.norm(n) < 1e-9:
            continue
        out.add(_canon(np.concatenate([[-n @ a], n])))
    return out


@pytest.mark.parametrize("name", list(EXPECTED))
def test_functionals_match_brute_force(name):
    p = make_polytope(name)
    f = facet_functionals(p)
    nv, nf = EXPECTED[name]
    assert len(p.vertices) == nv
    assert len(f) == nf
    assert {_canon(z) for z in f.functionals} == brute_force_planes(p.vertices)


@pytest.mark.parametrize("name", list(POLYTOPE_NAMES))
def test_every_functional_vanishes_on_three_vertices(name):
    p = make_polytope(name)
    vals = facet_functionals(p).values(p.vertices)
    assert np.all((np.abs(vals) < 1e-9).sum(axis=1) >= 3)


def test_icosidodecahedron_shape():
    p = make_polytope("icosidodecahedron")
    assert len(p.vertices) == 30
    assert inradius(p) == pytest.approx(0.850650808, abs=1e-8)
    assert len(facet_functionals(p)) == 2690


@pytest.mark.parametrize("name", list(POLYTOPE_NAMES))
def test_outer_polytope_contains_sphere(name):
    outer = make_polytope(name, "outer")
    assert inradius(outer) == pytest.approx(1, abs=1e-12)
    assert np.all(np.linalg.norm(outer.vertices, axis=1) >= 1 - 1e-12)


def test_polytope_validation(tmp_path):
    with pytest.raises(ValueError):
        Polytope("x", "inner", np.eye(3))
    with pytest.raises(ValueError):
        Polytope("x", "inner", np.array([[1, 0, 0]] * 4, dtype=float))
    with pytest.raises(ValueError):  # flat
        Polytope("x", "inner", np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], float))
    p = make_polytope("cube")
    path = tmp_path / "cube.json"
    path.write_text(p.to_json())
    q = load_polytope(path)
    assert np.array_equal(q.vertices, p.vertices)
    assert json.loads(path.read_text())["kind"] == "inner"


@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_functional_operator_round_trip(f):
    f = np.array(f)
    assert np.allclose(operator_to_functional(functional_to_operator(f)), f, atol=1e-12)


@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_bloch_round_trip(r):
    r = np.array(r)
    assert np.allclose(bloch_vector(bloch_to_state(r)), r, atol=1e-12)
