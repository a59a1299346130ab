"""
Superfractal Commands
Lifted chaos game on H(X) against a lifted deterministic reference
"""

import sys

import click

from commands.common import base_seed, provenance, scene_dir
from core.ifs import singleton
from core.superfractal import lifted_deterministic, lifted_seed_distance, lifted_system
from core.verify import run_ensemble
from decorators import handle_cli_errors
from errors import UsageError
from utils.artifacts import write_csv, write_ensemble, write_json
from utils.logger import log_command, log_run_event, setup_logger
from utils.rng import derive_seeds
from utils.scene import load_scene

logger = setup_logger(__name__)


@click.command("superfractal")
@click.option("--scene", "scene_path", required=True, type=click.Path(), help="Scene with SUB<j>_MAP_i keys")
@click.option("--seed", type=int, default=None, help="Override the scene SEED the panel is derived from")
@click.option("--out", default=None, help="Artifact root (default: scene OUT)")
@handle_cli_errors
@log_command(logger)
def superfractal(scene_path, seed, out):
    """
    Compare lifted orbit tails with the depth-LIFTED_DEPTH deterministic ensemble.

    A seed passes when the Hausdorff-Hausdorff distance of its tail
    S_(N-T)..S_N to the reference is below EPSILON. Exits 1 when the pass
    fraction misses THRESHOLD.
    """
    scene = load_scene(scene_path)
    if not scene.is_superfractal:
        raise UsageError(f"Scene {scene.label} declares no sub-IFSs")
    b = scene.budgets
    seed = base_seed(scene, seed)
    S0 = singleton(scene.x0, b.dedup_delta)
    reference = lifted_deterministic(scene.sub_ifs, S0, b.lifted_depth, b.delta2, b.inner_cap)

    K = b.n - b.T
    seeds = derive_seeds(seed, b.seeds)
    jobs = [(scene.sub_ifs, S0, scene.policy, b.n, K, b.delta2, reference, s, b.inner_cap) for s in seeds]
    results = run_ensemble(lifted_seed_distance, jobs)
    passed = sum(1 for d, _, _ in results if d < b.epsilon)
    meets = passed >= b.threshold * len(results) - 1e-12

    target = scene_dir(scene, out)
    write_ensemble(target / "reference", reference, dict(provenance(scene), depth=b.lifted_depth))
    write_csv(target / "superfractal.csv", ["seed", "hh_distance", "escalations", "max_inner_delta"],
              ([s, d, e, m] for s, (d, e, m) in zip(seeds, results)))
    write_json(target / "superfractal.json", dict(
        provenance(scene), system=lifted_system(scene.sub_ifs).to_dict(), base_seed=seed, epsilon=b.epsilon,
        n=b.n, K=K, delta2=b.delta2, depth=b.lifted_depth, reference_members=len(reference), seeds_passed=passed,
        seeds_total=len(results), threshold=b.threshold, meets_threshold=meets,
        distances=[d for d, _, _ in results],
    ))
    log_run_event(logger, "superfractal_done", passed=passed, total=len(results))
    click.echo(f"superfractal passed={passed}/{len(results)} members={len(reference)}")
    if not meets:
        click.echo(f"superfractal: pass rate below threshold for scene {scene.label}", err=True)
        sys.exit(1)
