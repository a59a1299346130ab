import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from core.spaces import CircleSpace, EuclideanSpace, ProjectivePlane, canonicalize, distance, get_space, make_point
from errors import InvalidPointError, UsageError
from models import SpacePoint

coordinate = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


def test_circle_points_are_renormalized():
    p = make_point("circle", (3.0, 4.0))
    assert p.coords == pytest.approx((0.6, 0.8), abs=1e-15)


def test_zero_vector_is_not_a_circle_point():
    with pytest.raises(InvalidPointError):
        make_point("circle", (0.0, 0.0))


def test_zero_vector_is_not_a_projective_point():
    with pytest.raises(InvalidPointError) as info:
        make_point("projective2", (0.0, 0.0, 0.0))
    assert info.value.exit_code == 7


def test_projective_sign_rule():
    assert make_point("projective2", (0.0, -2.0, 0.0)).coords == (0.0, 1.0, 0.0)
    assert make_point("projective2", (-1.0, 0.0, 0.0)).coords == (1.0, 0.0, 0.0)
    p = make_point("projective2", (-1.0, 2.0, -2.0))
    assert p.coords[0] > 0
    assert p.coords == pytest.approx((1 / 3, -2 / 3, 2 / 3))


def test_projective_distance_identifies_antipodes():
    a = SpacePoint("projective2", (1.0, 0.0, 0.0))
    b = SpacePoint("projective2", (-1.0, 0.0, 0.0))
    assert distance(a, b) == 0.0


def test_projective_distance_of_orthogonal_lines():
    a = SpacePoint("projective2", (1.0, 0.0, 0.0))
    b = SpacePoint("projective2", (0.0, 1.0, 0.0))
    assert distance(a, b) == pytest.approx(math.pi / 2)


def test_projective_distance_is_the_line_angle():
    a = make_point("projective2", (1.0, 0.0, 0.0))
    b = make_point("projective2", (math.cos(0.3), math.sin(0.3), 0.0))
    c = make_point("projective2", (-math.cos(0.3), math.sin(0.3), 0.0))
    assert distance(a, b) == pytest.approx(0.3, abs=1e-12)
    assert distance(a, c) == pytest.approx(0.3, abs=1e-12)


def test_euclidean_and_chordal_distances():
    assert distance(SpacePoint("euclidean", (0.0, 0.0)), SpacePoint("euclidean", (3.0, 4.0))) == 5.0
    assert distance(make_point("circle", (1.0, 0.0)), make_point("circle", (-1.0, 0.0))) == pytest.approx(2.0)


def test_distance_across_spaces_is_refused():
    with pytest.raises(UsageError):
        distance(SpacePoint("euclidean", (0.0, 0.0)), SpacePoint("circle", (1.0, 0.0)))


def test_unknown_space_is_refused():
    with pytest.raises(UsageError):
        get_space("torus")


def test_canonicalize_checks_coordinate_length():
    with pytest.raises(UsageError):
        canonicalize(SpacePoint("projective2", (1.0, 0.0)))


@pytest.mark.parametrize("space", [EuclideanSpace(3), CircleSpace(), ProjectivePlane()], ids=repr)
def test_metric_axioms_on_random_triples(space, rng):
    raw = rng.standard_normal((3, 10_000, space.dim))
    x, y, z = (space.canonicalize_many(r) for r in raw)
    dxy, dyz, dxz = space.rowwise(x, y), space.rowwise(y, z), space.rowwise(x, z)
    assert np.all(dxy >= 0)
    assert np.all(space.rowwise(x, x) <= 1e-12)
    assert np.array_equal(dxy, space.rowwise(y, x))
    assert np.all(dxz <= dxy + dyz + 1e-9)


@pytest.mark.parametrize("space", [CircleSpace(), ProjectivePlane()], ids=repr)
def test_canonical_form_is_idempotent(space, rng):
    once = space.canonicalize_many(rng.standard_normal((1000, space.dim)) * 7.0)
    assert np.array_equal(space.canonicalize_many(once), once)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, 3, elements=coordinate))
def test_projective_row_path_matches_array_path(raw):
    assume(np.sqrt((raw * raw).sum()) > 1e-3)
    space = ProjectivePlane()
    assert space.canonicalize_row(raw.tolist()) == space.canonicalize_many(raw.reshape(1, 3))[0].tolist()


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, 2, elements=coordinate))
def test_circle_row_path_matches_array_path(raw):
    assume(np.sqrt((raw * raw).sum()) > 1e-3)
    space = CircleSpace()
    assert space.canonicalize_row(raw.tolist()) == space.canonicalize_many(raw.reshape(1, 2))[0].tolist()


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 3, elements=coordinate), st.floats(min_value=0.01, max_value=100.0))
def test_projective_points_ignore_scale(raw, scale):
    assume(np.sqrt((raw * raw).sum()) > 1e-2)
    space = ProjectivePlane()
    a = space.canonicalize_many(raw.reshape(1, 3))
    b = space.canonicalize_many(-scale * raw.reshape(1, 3))
    assert space.rowwise(a, b)[0] <= 1e-7
