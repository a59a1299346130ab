import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_set
from core.hausdorff import dilation_contains, directed, hausdorff_distance, is_within
from core.ifs import make_finite_set, rotation_matrix
from core.spaces import get_space
from errors import DomainError, UsageError
from models import FiniteSet, SpacePoint

SPACES = ("euclidean", "circle", "projective2")


def line(*values):
    return make_finite_set("euclidean", [[v] for v in values])


def test_two_single_points():
    assert hausdorff_distance(line(0.0), line(1.0)).value == 1.0


def test_directed_parts_are_asymmetric():
    B, C = line(0.0), line(0.0, 1.0)
    assert directed(B, C)[0] == 0.0
    assert directed(C, B)[0] == 1.0
    result = hausdorff_distance(B, C)
    assert (result.forward, result.backward, result.value) == (0.0, 1.0, 1.0)
    assert result.witness_c_to_b == ((1.0,), (0.0,))


def test_identical_sets_are_at_distance_zero(rng):
    S = random_set("projective2", 500, rng)
    assert hausdorff_distance(S, S).value == 0.0


def test_empty_sets_are_refused():
    empty = FiniteSet("euclidean", np.empty((0, 1)))
    with pytest.raises(DomainError):
        hausdorff_distance(empty, line(0.0))


def test_sets_on_different_spaces_are_refused(rng):
    with pytest.raises(UsageError):
        hausdorff_distance(random_set("circle", 3, rng), random_set("euclidean", 3, rng))


def test_unknown_mode_is_refused():
    with pytest.raises(UsageError):
        directed(line(0.0), line(1.0), mode="approximate")


def test_dilation_is_open():
    C = line(0.0)
    assert not dilation_contains(C, 1.0, SpacePoint("euclidean", (1.0,)))
    assert dilation_contains(C, 1.0, SpacePoint("euclidean", (0.999,)))
    with pytest.raises(DomainError):
        dilation_contains(C, 0.0, SpacePoint("euclidean", (0.0,)))


def test_is_within_is_strict():
    assert is_within(line(0.5), line(0.0, 1.0), 0.6)
    assert not is_within(line(0.5), line(0.0, 1.0), 0.5)


@pytest.mark.parametrize("space_tag", SPACES)
def test_witnesses_realize_the_directed_values(space_tag, rng):
    B, C = random_set(space_tag, 400, rng), random_set(space_tag, 300, rng)
    result = hausdorff_distance(B, C)
    space = get_space(space_tag, B.dim)
    b, c = (np.asarray(p) for p in result.witness_b_to_c)
    assert float(space.rowwise(b, c)) == pytest.approx(result.forward, abs=1e-12)
    c, b = (np.asarray(p) for p in result.witness_c_to_b)
    assert float(space.rowwise(c, b)) == pytest.approx(result.backward, abs=1e-12)


@pytest.mark.parametrize("mode", ["oracle", "accelerated"])
def test_tied_witnesses_are_lexicographically_smallest(mode):
    C = make_finite_set("euclidean", [[1.0, 0.0]])
    for rows in ([[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [2.0, 0.0]]):
        value, i, j = directed(make_finite_set("euclidean", rows), C, mode)
        assert value == 1.0
        assert rows[i] == [0.0, 0.0] and j == 0
    targets = [[1.0, 0.0], [-1.0, 0.0]]
    _, _, j = directed(make_finite_set("euclidean", [[0.0, 0.0]]), make_finite_set("euclidean", targets), mode)
    assert targets[j] == [-1.0, 0.0]


@pytest.mark.parametrize("mode", ["oracle", "accelerated"])
def test_witnesses_do_not_depend_on_point_order(mode):
    lattice = np.array([[i, j] for i in range(10) for j in range(10)], dtype=float)
    rng = np.random.default_rng(3)
    for _ in range(5):
        B = make_finite_set("euclidean", rng.permutation(lattice))
        C = make_finite_set("euclidean", rng.permutation(lattice + 0.5))
        result = hausdorff_distance(B, C, mode)
        assert result.value == pytest.approx(np.sqrt(0.5), abs=1e-12)
        assert result.witness_b_to_c == ((0.0, 0.0), (0.5, 0.5))
        assert result.witness_c_to_b == ((0.5, 0.5), (0.0, 0.0))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SPACES), st.integers(1, 400), st.integers(1, 400), st.integers(0, 2**32 - 1),
       st.floats(0.01, 10.0))
def test_accelerated_matches_oracle(space_tag, size_b, size_c, seed, scale):
    rng = np.random.default_rng(seed)
    B = random_set(space_tag, size_b, rng, scale=scale)
    C = random_set(space_tag, size_c, rng)
    fast = hausdorff_distance(B, C, "accelerated").value
    slow = hausdorff_distance(B, C, "oracle").value
    assert fast == pytest.approx(slow, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_accelerated_matches_oracle_on_clustered_sets(seed):
    rng = np.random.default_rng(seed)
    centers = rng.random((5, 2))
    B = make_finite_set("euclidean", centers[rng.integers(0, 5, 300)] + 1e-4 * rng.standard_normal((300, 2)))
    C = make_finite_set("euclidean", rng.random((200, 2)) * 3.0 + 2.0)
    assert hausdorff_distance(B, C).value == pytest.approx(hausdorff_distance(B, C, "oracle").value, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SPACES), st.integers(0, 2**32 - 1))
def test_hausdorff_metric_axioms(space_tag, seed):
    rng = np.random.default_rng(seed)
    A, B, C = (random_set(space_tag, int(rng.integers(1, 60)), rng) for _ in range(3))
    ab = hausdorff_distance(A, B).value
    assert ab == pytest.approx(hausdorff_distance(B, A).value, abs=1e-12)
    assert hausdorff_distance(A, A).value == 0.0
    assert hausdorff_distance(A, C).value <= ab + hausdorff_distance(B, C).value + 1e-9


@pytest.mark.slow
@pytest.mark.parametrize("space_tag", SPACES)
def test_accelerated_matches_oracle_at_scale(space_tag):
    rng = np.random.default_rng(7)
    for _ in range(67):
        size_b, size_c = (int(v) for v in rng.integers(1, 10_001, 2))
        B, C = random_set(space_tag, size_b, rng), random_set(space_tag, size_c, rng)
        fast = hausdorff_distance(B, C, "accelerated").value
        assert fast == pytest.approx(hausdorff_distance(B, C, "oracle").value, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-10.0, 10.0))
def test_circle_distance_is_rotation_invariant(seed, alpha):
    rng = np.random.default_rng(seed)
    B = random_set("circle", int(rng.integers(1, 200)), rng)
    C = random_set("circle", int(rng.integers(1, 200)), rng)
    turn = rotation_matrix(alpha).T
    turned = hausdorff_distance(make_finite_set("circle", B.points @ turn), make_finite_set("circle", C.points @ turn))
    assert turned.value == pytest.approx(hausdorff_distance(B, C).value, abs=1e-9)
