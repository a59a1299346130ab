"""
Orbit Commands
Runs the chaos game for a scene and dumps the orbit
"""

import click

from commands.common import base_seed, load_point_scene, provenance, resolve_reference, scene_dir, scene_policy
from core.chaos import empirical_floor, off_manifold, run_orbit
from decorators import handle_cli_errors
from models import FiniteSet
from utils.artifacts import write_csv, write_json, write_points
from utils.logger import log_command, setup_logger
from utils.rng import GENERATOR_NAME

logger = setup_logger(__name__)

# Orbits longer than this are not written as CSV
CSV_LIMIT = 100_000


@click.command("run")
@click.option("--scene", "scene_path", required=True, type=click.Path(), help="Scene file")
@click.option("--seed", type=int, default=None, help="Override the scene SEED")
@click.option("--out", default=None, help="Artifact root (default: scene OUT)")
@click.option("--csv", "as_csv", is_flag=True, help="Also write orbit.csv (small orbits only)")
@handle_cli_errors
@log_command(logger)
def run(scene_path, seed, out, as_csv):
    """
    Generate one random orbit.

    Writes orbit.f64/.json/.sigma and, when the orbit is long enough,
    floor.json with the empirical conditional selection rates.
    """
    scene = load_point_scene(scene_path)
    seed = base_seed(scene, seed)
    A_ref = resolve_reference(scene, out) if scene.policy.kind == "adversarial_floor" else None
    policy = scene_policy(scene, A_ref)
    orbit = run_orbit(scene.ifs, scene.x0, policy, scene.budgets.n, seed)

    target = scene_dir(scene, out)
    meta = dict(provenance(scene), seed=seed, policy=policy.kind, policy_params=policy.to_dict(),
                generator=GENERATOR_NAME, n=orbit.n, off_manifold=off_manifold(orbit))
    path = write_points(target / "orbit", FiniteSet(orbit.space_tag, orbit.points), meta, orbit.sigmas)

    if orbit.n >= 100 * orbit.n_maps:
        floor = empirical_floor(orbit, condition_window=1)
        write_json(target / "floor.json", floor.to_dict())
        click.echo(f"floor passed={str(floor.passed).lower()} min_rate={floor.min_rate:.6g}")
    if as_csv:
        if orbit.n > CSV_LIMIT:
            logger.warning(f"Orbit has {orbit.n} steps; CSV export is limited to {CSV_LIMIT}")
        else:
            dims = [f"x{i}" for i in range(orbit.points.shape[1])]
            rows = ([k, int(orbit.sigmas[k - 1]) if k else 0] + orbit.points[k].tolist() for k in range(orbit.n + 1))
            write_csv(target / "orbit.csv", ["k", "sigma"] + dims, rows)
    click.echo(f"orbit n={orbit.n} seed={seed} policy={policy.policy_id} path={path}")
