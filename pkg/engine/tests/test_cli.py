import json

import pytest
from click.testing import CliRunner

from app import cli

HALVING = """
    VERSION=1
    SPACE=euclidean
    DIM=1
    MAP_1=affine matrix=0.5
    X0=1
    N=2000
    T=1000
    SEEDS=3
    SEED=1
    EPSILON=0.01
    REFERENCE=analytic:point:0
    TOL=1e-6
    DEDUP_DELTA=0
    MAX_ITER=100
    UPPER_K=30
    UPPER_K_MAX=40
    COVER_EPSILON=0.1
    NET_DELTA=0.02
    COVER_SAMPLES=20
    M_CAP=50
"""

CIRCLE = """
    VERSION=1
    SPACE=circle
    MAP_1=identity
    MAP_2=rotation2 alpha=1.0
    X0=1,0
    N=2000
    T=1000
    SEEDS=2
    UPPER_K=2
    UPPER_K_MAX=4
    REFERENCE=analytic:circle:100
"""

SUPERFRACTAL = """
    VERSION=1
    SPACE=euclidean
    DIM=1
    SUB1_MAP_1=affine matrix=0.5
    SUB1_MAP_2=affine matrix=0.5 offset=0.5
    SUB2_MAP_1=affine matrix=0.3333333333333333
    SUB2_MAP_2=affine matrix=0.3333333333333333 offset=0.6666666666666666
    X0=0
    N=200
    T=150
    SEEDS=2
    SEED=3
    EPSILON=0.3
    DEDUP_DELTA=0.01
    DELTA2=0.05
    LIFTED_DEPTH=4
"""


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args])


def test_run_writes_the_orbit(runner, write_scene, tmp_path):
    scene = write_scene("halving", HALVING)
    result = invoke(runner, "run", "--scene", scene, "--csv")
    assert result.exit_code == 0, result.output
    target = tmp_path / "out" / "halving"
    assert (target / "orbit.f64").stat().st_size == 2001 * 8
    assert (target / "orbit.sigma").stat().st_size == 2000 * 4
    sidecar = json.loads((target / "orbit.json").read_text())
    assert sidecar["seed"] == 1 and sidecar["policy"] == "uniform_iid"
    assert sidecar["policy_params"]["floor_p"] == 1.0
    assert sidecar["policy_params"]["id"] == "uniform_iid(p=1)"
    assert (target / "floor.json").exists()
    assert (target / "orbit.csv").read_text().startswith("k,sigma,x0\n0,0,1.0\n")


def test_run_is_byte_identical_across_reruns(runner, write_scene, tmp_path):
    scene = write_scene("circle", CIRCLE)
    for out in ("a", "b"):
        assert invoke(runner, "run", "--scene", scene, "--seed", 4, "--out", tmp_path / out).exit_code == 0
    for name in ("orbit.f64", "orbit.sigma", "orbit.json", "floor.json"):
        assert (tmp_path / "a" / "circle" / name).read_bytes() == (tmp_path / "b" / "circle" / name).read_bytes()


def test_det_then_verify_then_cover(runner, write_scene, tmp_path):
    scene = write_scene("halving", HALVING)
    result = invoke(runner, "det", "--scene", scene, "--trace")
    assert result.exit_code == 0, result.output
    assert "converged=true" in result.output
    target = tmp_path / "out" / "halving"
    summary = json.loads((target / "det.json").read_text())
    assert summary["distance_to_reference"] < 1e-6
    assert (target / "trace.csv").exists()

    result = invoke(runner, "verify", "--scene", scene)
    assert result.exit_code == 0, result.output
    report = json.loads((target / "report.json").read_text())["report"]
    assert report["seeds_passed"] == 3
    assert "verdict      PASS" in (target / "report.txt").read_text()

    result = invoke(runner, "cover", "--scene", scene)
    assert result.exit_code == 0, result.output
    assert "replayed=true" in result.output


def test_verify_against_the_deterministic_reference(runner, write_scene):
    scene = write_scene("halving", HALVING.replace("REFERENCE=analytic:point:0", "REFERENCE=deterministic"))
    result = invoke(runner, "verify", "--scene", scene)
    assert result.exit_code == 6
    assert "error=missing_artifact exit=6" in result.output

    assert invoke(runner, "det", "--scene", scene).exit_code == 0
    result = invoke(runner, "verify", "--scene", scene)
    assert result.exit_code == 0, result.output


def test_failed_panel_exits_one(runner, write_scene, tmp_path):
    scene = write_scene("circle", CIRCLE + "    EPSILON=1e-6\n")
    result = invoke(runner, "verify", "--scene", scene)
    assert result.exit_code == 1
    assert "pass rate below threshold" in result.output
    assert (tmp_path / "out" / "circle" / "report.json").exists()


def test_invalid_scene_exits_five(runner, write_scene):
    result = invoke(runner, "run", "--scene", write_scene("bad", CIRCLE + "    FLOOR_P=0.9\n"))
    assert result.exit_code == 5
    assert "error=scene_invalid exit=5" in result.output
    assert "FLOOR_P" in result.output


def test_missing_scene_exits_three(runner, tmp_path):
    result = invoke(runner, "det", "--scene", tmp_path / "absent.scene")
    assert result.exit_code == 3


def test_dist_of_a_dump_with_itself(runner, write_scene, tmp_path):
    scene = write_scene("circle", CIRCLE)
    assert invoke(runner, "run", "--scene", scene).exit_code == 0
    orbit = tmp_path / "out" / "circle" / "orbit.f64"
    result = invoke(runner, "dist", orbit, orbit)
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["value"] == 0.0
    assert payload["mode"] == "accelerated"


def test_dist_of_a_missing_dump(runner, tmp_path):
    result = invoke(runner, "dist", tmp_path / "a.f64", tmp_path / "b.f64")
    assert result.exit_code == 6


def test_render_writes_a_ppm(runner, write_scene, tmp_path):
    scene = write_scene("circle", CIRCLE)
    assert invoke(runner, "run", "--scene", scene).exit_code == 0
    target = tmp_path / "out" / "circle"
    result = invoke(runner, "render", "--scene", scene, "--points", target / "orbit.f64")
    assert result.exit_code == 0, result.output
    assert (target / "orbit.ppm").read_bytes().startswith(b"P6\n")
    stats = json.loads((target / "orbit.render.json").read_text())
    assert stats["points"] == 2001


def test_superfractal_panel(runner, write_scene, tmp_path):
    scene = write_scene("sf", SUPERFRACTAL)
    result = invoke(runner, "superfractal", "--scene", scene)
    assert result.exit_code == 0, result.output
    target = tmp_path / "out" / "sf"
    summary = json.loads((target / "superfractal.json").read_text())
    assert summary["seeds_total"] == 2
    assert summary["K"] == 50
    assert [m["ifs_id"] for m in summary["system"]["maps"]] == [0, 1]
    assert (target / "reference.ens").exists()

    result = invoke(runner, "dist", target / "reference.ens", target / "reference.ens")
    assert json.loads(result.output) == {"hh_distance": 0.0}


def test_point_commands_refuse_superfractal_scenes(runner, write_scene):
    result = invoke(runner, "run", "--scene", write_scene("sf", SUPERFRACTAL))
    assert result.exit_code == 2
    assert "error=usage" in result.output
