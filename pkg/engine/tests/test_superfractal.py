import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_set
from core.chaos import adversarial_policy, uniform_policy
from core.hausdorff import hausdorff_distance
from core.ifs import make_finite_set, singleton
from core.superfractal import (cap_inner, hh_distance, lifted_apply, lifted_chaos_orbit, lifted_deterministic,
                               lifted_seed_distance, lifted_system, lifted_tail, make_ensemble)
from errors import DomainError, UsageError
from models import IfsSpec, MapSpec, SetEnsemble
from utils.rng import derive_seeds
from utils.scene import load_scene

SCENES = Path(__file__).resolve().parent.parent / "scenes"


def line(*values, delta=0.0):
    return make_finite_set("euclidean", [[v] for v in values], delta)


def ensemble(*members):
    return SetEnsemble(members=list(members))


def test_lifted_interval_map(interval_ifs):
    image = lifted_apply(interval_ifs, line(0.0))
    assert image.points.ravel().tolist() == [0.0, 0.5]


def test_lifted_circle_map(circle_ifs):
    image = lifted_apply(circle_ifs, make_finite_set("circle", [[1.0, 0.0]]))
    assert len(image) == 2
    assert image.points[1] == pytest.approx([math.cos(1.0), math.sin(1.0)])


def test_lifted_identity_fixes_every_set(rng):
    F = IfsSpec("euclidean", (MapSpec("identity"),), dim=2)
    S = random_set("euclidean", 40, rng)
    assert np.array_equal(lifted_apply(F, S).points, S.points)


def test_lifted_map_checks_the_space(interval_ifs):
    with pytest.raises(UsageError):
        lifted_apply(interval_ifs, make_finite_set("circle", [[1.0, 0.0]]))


def test_hh_examples():
    assert hh_distance(ensemble(line(0.0)), ensemble(line(1.0))) == 1.0
    assert hh_distance(ensemble(line(0.0), line(1.0)), ensemble(line(0.0))) == 1.0
    A = ensemble(line(0.0, 0.5), line(0.25))
    assert hh_distance(A, A) == 0.0


def test_hh_of_singletons_is_the_hausdorff_distance(rng):
    a, b = random_set("projective2", 200, rng), random_set("projective2", 150, rng)
    assert hh_distance(ensemble(a), ensemble(b)) == hausdorff_distance(a, b).value


def test_hh_refuses_empty_and_mixed_ensembles():
    with pytest.raises(DomainError):
        hh_distance(SetEnsemble(members=[]), ensemble(line(0.0)))
    with pytest.raises(UsageError):
        hh_distance(ensemble(line(0.0)), ensemble(make_finite_set("circle", [[1.0, 0.0]])))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["euclidean", "circle"]), st.integers(0, 2**32 - 1))
def test_hh_metric_axioms(space_tag, seed):
    rng = np.random.default_rng(seed)

    def draw():
        return ensemble(*(random_set(space_tag, int(rng.integers(1, 20)), rng) for _ in range(rng.integers(1, 6))))

    A, B, C = draw(), draw(), draw()
    ab = hh_distance(A, B)
    assert ab == pytest.approx(hh_distance(B, A), abs=1e-12)
    assert hh_distance(A, A) == 0.0
    assert hh_distance(A, C) <= ab + hh_distance(B, C) + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_box_pruning_matches_exhaustive_search(seed):
    rng = np.random.default_rng(seed)
    A = [random_set("euclidean", int(rng.integers(1, 15)), rng) for _ in range(6)]
    B = [random_set("euclidean", int(rng.integers(1, 15)), rng) for _ in range(5)]
    d = np.array([[hausdorff_distance(a, b).value for b in B] for a in A])
    exhaustive = max(d.min(axis=1).max(), d.min(axis=0).max())
    assert hh_distance(SetEnsemble(A), SetEnsemble(B)) == pytest.approx(exhaustive, abs=1e-12)


def test_make_ensemble_drops_near_duplicates():
    E = make_ensemble([line(0.0), line(0.001), line(1.0)], delta2=0.01)
    assert [m.points.ravel().tolist() for m in E.members] == [[0.0], [1.0]]
    assert len(make_ensemble([line(0.0), line(0.0)], delta2=0.0)) == 2


def test_cap_inner_escalates_the_resolution():
    S = line(*np.linspace(0.0, 1.0, 101).tolist())
    capped = cap_inner(S, inner_cap=10)
    assert len(capped) <= 10
    assert capped.dedup_delta > S.dedup_delta
    assert cap_inner(S, inner_cap=200) is S


def test_identity_lifted_orbit_is_constant():
    F = IfsSpec("euclidean", (MapSpec("identity"),), dim=1)
    S0 = line(0.0, 0.5)
    orbit = lifted_chaos_orbit([F, F], S0, uniform_policy(2), 50, seed=1)
    assert len(orbit.sets) == 51
    assert all(np.array_equal(S.points, S0.points) for S in orbit.sets)


def test_lifted_orbit_stays_in_the_unit_interval(interval_ifs, thirds_ifs):
    orbit = lifted_chaos_orbit([interval_ifs, thirds_ifs], line(0.0, delta=0.005), uniform_policy(2), 300, seed=4)
    for S in orbit.sets:
        assert S.points.min() >= -1e-12
        assert S.points.max() <= 1.0 + 1e-12
    assert set(orbit.sigmas.tolist()) == {1, 2}
    assert orbit.escalations == 0


def test_lifted_orbit_refuses_the_adversary(interval_ifs, thirds_ifs):
    policy = adversarial_policy(0.25, line(0.0))
    with pytest.raises(UsageError):
        lifted_chaos_orbit([interval_ifs, thirds_ifs], line(0.0), policy, 10, seed=1)


def test_lifted_tail_bounds(interval_ifs):
    orbit = lifted_chaos_orbit([interval_ifs], line(0.0, delta=0.01), uniform_policy(1), 20, seed=1)
    assert len(lifted_tail(orbit, 20, 0.0)) == 1
    with pytest.raises(UsageError):
        lifted_tail(orbit, 21, 0.0)


def test_lifted_deterministic_levels(interval_ifs, thirds_ifs):
    level = lifted_deterministic([interval_ifs, thirds_ifs], line(0.0, delta=0.001), 1, 0.0)
    assert [m.points.ravel().tolist() for m in level.members] == [[0.0, 0.5], [0.0, pytest.approx(2 / 3)]]


def test_lifted_tail_approaches_the_reference(interval_ifs, thirds_ifs):
    S0 = line(0.0, delta=0.005)
    subs = [interval_ifs, thirds_ifs]
    reference = lifted_deterministic(subs, S0, 8, 0.01)
    for seed in (1, 2, 3):
        distance, escalations, _ = lifted_seed_distance(subs, S0, uniform_policy(2), 600, 100, 0.01, reference, seed)
        assert distance < 0.05
        assert escalations == 0


def test_lifted_system_names_one_map_per_sub_ifs(interval_ifs, thirds_ifs):
    system = lifted_system([interval_ifs, thirds_ifs])
    assert system.space_tag == "hyperspace"
    assert [m.to_dict() for m in system.maps] == [{"kind": "lifted", "ifs_id": 0}, {"kind": "lifted", "ifs_id": 1}]


def test_lifted_orbit_follows_the_selected_sub_ifs(interval_ifs, thirds_ifs):
    S0 = line(0.0, delta=0.001)
    orbit = lifted_chaos_orbit([interval_ifs, thirds_ifs], S0, uniform_policy(2), 6, seed=5)
    expected = S0
    for sigma, S in zip(orbit.sigmas.tolist(), orbit.sets[1:]):
        expected = lifted_apply([interval_ifs, thirds_ifs][sigma - 1], expected)
        assert np.array_equal(S.points, expected.points)


@pytest.mark.slow
def test_superfractal_scene_panel():
    scene = load_scene(SCENES / "superfractal.scene")
    b = scene.budgets
    S0 = singleton(scene.x0, b.dedup_delta)
    reference = lifted_deterministic(scene.sub_ifs, S0, b.lifted_depth, b.delta2, b.inner_cap)
    assert b.lifted_depth == 12
    distances = [lifted_seed_distance(scene.sub_ifs, S0, scene.policy, b.n, b.n - b.T, b.delta2, reference, s,
                                      b.inner_cap)[0]
                 for s in derive_seeds(b.seed, b.seeds)]
    assert sum(d < b.epsilon for d in distances) >= 19
