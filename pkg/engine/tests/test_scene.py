from pathlib import Path

import pytest

from config import IFS_OUT_DIR
from errors import SceneParseError, SceneValidationError, SceneVersionError
from utils.scene import load_scene

SCENES = Path(__file__).resolve().parent.parent / "scenes"

CIRCLE = """
VERSION=1
SPACE=circle
MAP_1=identity
MAP_2=rotation2 alpha=1.0
X0=1,0
REFERENCE=analytic:circle:100
"""


def problem_paths(info):
    return [path for path, _ in info.value.problems]


@pytest.mark.parametrize("path", sorted(SCENES.glob("*.scene")), ids=lambda p: p.stem)
def test_shipped_scenes_load(path):
    scene = load_scene(path)
    assert scene.version == 1
    assert scene.label == path.stem


def test_circle_scene_contents():
    scene = load_scene(SCENES / "circle.scene")
    assert scene.ifs.space_tag == "circle"
    assert scene.ifs.n_maps == 2
    assert scene.ifs.maps[1].alpha == 1.0
    assert scene.x0.coords == (1.0, 0.0)
    assert scene.policy.kind == "uniform_iid" and scene.policy.floor_p == 0.5
    assert scene.budgets.n == 1_000_000
    assert scene.budgets.K_ladder == (0, 1000, 100_000, 500_000)
    assert (scene.reference.kind, scene.reference.name, scene.reference.count) == ("analytic", "circle", 1000)


def test_superfractal_scene_declares_sub_systems():
    scene = load_scene(SCENES / "superfractal.scene")
    assert scene.is_superfractal
    assert scene.ifs is None
    assert [s.n_maps for s in scene.sub_ifs] == [2, 2]
    assert scene.sub_ifs[1].maps[1].offset == (0.6666666666666666,)


def test_markov_floor_defaults_to_the_smallest_entry(write_scene):
    scene = load_scene(write_scene("m", CIRCLE + "POLICY=markov\nMARKOV=0.8,0.2;0.3,0.7\n"))
    assert scene.policy.matrix == ((0.8, 0.2), (0.3, 0.7))
    assert scene.policy.floor_p == 0.2


def test_comments_and_defaults(write_scene):
    scene = load_scene(write_scene("c", CIRCLE + "EPSILON=0.05 # loose\n"))
    assert scene.budgets.epsilon == 0.05
    assert scene.budgets.T == 50_000
    assert scene.label == "c"


def test_tail_length_defaults_to_half_the_orbit(write_scene):
    scene = load_scene(write_scene("t", CIRCLE + "N=10000\n"))
    assert scene.budgets.T == 5000
    scene = load_scene(write_scene("t", CIRCLE + "N=7\n"))
    assert scene.budgets.T == 3


def test_explicit_tail_length_is_still_checked(write_scene):
    with pytest.raises(SceneValidationError) as info:
        load_scene(write_scene("t", CIRCLE + "N=100\nT=0\n"))
    assert problem_paths(info) == ["T"]


def test_out_defaults_to_the_environment(write_scene):
    scene = load_scene(write_scene("o", CIRCLE, with_out=False))
    assert scene.out_dir == IFS_OUT_DIR


def test_floor_above_one_over_n_is_invalid(write_scene):
    with pytest.raises(SceneValidationError) as info:
        load_scene(write_scene("f", CIRCLE + "FLOOR_P=0.6\n"))
    assert "FLOOR_P" in problem_paths(info)
    assert info.value.exit_code == 5


def test_adversary_needs_an_explicit_floor(write_scene):
    with pytest.raises(SceneValidationError) as info:
        load_scene(write_scene("a", CIRCLE + "POLICY=adversarial_floor\n"))
    assert set(problem_paths(info)) == {"FLOOR_P"}


def test_singular_projective_matrix_is_invalid(write_scene):
    body = """
        VERSION=1
        SPACE=projective2
        MAP_1=projective3x3 matrix=1,0,0,0,1,0,0,0,0
        X0=1,1,1
        REFERENCE=analytic:projective_line_x0
    """
    with pytest.raises(SceneValidationError) as info:
        load_scene(write_scene("p", body))
    assert problem_paths(info) == ["MAP_1.matrix"]


def test_every_problem_is_reported(write_scene):
    body = """
        VERSION=1
        SPACE=circle
        MAP_1=identity
        MAP_3=identity
        N=10
        T=20
    """
    with pytest.raises(SceneValidationError) as info:
        load_scene(write_scene("many", body))
    paths = problem_paths(info)
    for expected in ("MAP_*", "X0", "T"):
        assert expected in paths
    assert "X0:" in str(info.value)


def test_map_kind_must_suit_the_space(write_scene):
    with pytest.raises(SceneValidationError) as info:
        load_scene(write_scene("k", CIRCLE.replace("MAP_1=identity", "MAP_1=affine matrix=1,0,0,1")))
    assert "MAP_1" in problem_paths(info)


def test_missing_reference_file(write_scene):
    with pytest.raises(SceneValidationError) as info:
        load_scene(write_scene("r", CIRCLE.replace("analytic:circle:100", "file:nowhere")))
    assert "REFERENCE" in problem_paths(info)


def test_unknown_version(write_scene):
    with pytest.raises(SceneVersionError) as info:
        load_scene(write_scene("v", CIRCLE.replace("VERSION=1", "VERSION=2")))
    assert info.value.exit_code == 4


@pytest.mark.parametrize("body", [
    CIRCLE + "this line has no equals sign\n",
    CIRCLE + "N=lots\n",
    CIRCLE + "COLOUR=red\n",
    CIRCLE.replace("VERSION=1", ""),
    CIRCLE.replace("alpha=1.0", "alpha=one"),
], ids=["malformed", "bad-number", "unknown-key", "no-version", "bad-map-parameter"])
def test_parse_errors(write_scene, body):
    with pytest.raises(SceneParseError) as info:
        load_scene(write_scene("bad", body))
    assert info.value.exit_code == 3


def test_missing_scene_file(tmp_path):
    with pytest.raises(SceneParseError):
        load_scene(tmp_path / "absent.scene")


def test_failure_classes_have_distinct_exit_codes():
    codes = {SceneParseError.exit_code, SceneVersionError.exit_code, SceneValidationError.exit_code}
    assert codes == {3, 4, 5}
