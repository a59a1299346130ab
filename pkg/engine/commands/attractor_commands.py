"""
Attractor Commands
Deterministic Hutchinson iteration and upper-limit checks for a scene
"""

import click

from commands.common import load_point_scene, provenance, resolve_reference, scene_dir
from core.deterministic import (contraction_ratio, deterministic_attractor, self_map_gap,
                                upper_limit, upper_limit_stabilization)
from core.hausdorff import hausdorff_distance
from core.ifs import singleton
from decorators import handle_cli_errors
from errors import IfsError
from utils.artifacts import write_csv, write_json, write_points
from utils.logger import log_command, setup_logger

logger = setup_logger(__name__)


@click.command("det")
@click.option("--scene", "scene_path", required=True, type=click.Path(), help="Scene file")
@click.option("--out", default=None, help="Artifact root (default: scene OUT)")
@click.option("--trace", is_flag=True, help="Write trace.csv with (k, size, gap) per step")
@handle_cli_errors
@log_command(logger)
def det(scene_path, out, trace):
    """
    Iterate the Hutchinson map from {X0} until it stabilizes.

    Writes attractor.f64/.json and det.json with the invariance gap, the
    observed contraction ratios and the truncated upper-limit checks.
    """
    scene = load_point_scene(scene_path)
    b = scene.budgets
    B0 = singleton(scene.x0, b.dedup_delta)
    approx = deterministic_attractor(scene.ifs, B0, b.tol, b.max_iter, b.window, b.dedup_delta)
    A = approx.points

    target = scene_dir(scene, out)
    meta = dict(provenance(scene), tol=b.tol, iters_used=approx.iters_used,
                cauchy_gap=approx.cauchy_gap, converged=approx.converged)
    path = write_points(target / "attractor", A, meta)

    summary = dict(provenance(scene), attractor=approx.to_dict(),
                   self_map_gap=self_map_gap(scene.ifs, A),
                   contraction_ratio=contraction_ratio(scene.ifs, A, seed=b.seed))
    limit = upper_limit(scene.ifs, B0, b.upper_K, b.upper_k_max)
    summary["upper_limit"] = {
        "K": b.upper_K,
        "k_max": b.upper_k_max,
        "size": len(limit),
        "distance_to_attractor": hausdorff_distance(limit, A).value,
    }
    if b.upper_K < b.upper_k_max:
        steps = upper_limit_stabilization(scene.ifs, B0, [b.upper_K, b.upper_K + 1], b.upper_k_max)
        summary["upper_limit"]["stabilization"] = [[K, d] for K, d in steps]
    if scene.reference.kind != "deterministic":
        try:
            A_ref = resolve_reference(scene, out)
            summary["distance_to_reference"] = hausdorff_distance(A, A_ref).value
            summary["upper_limit"]["distance_to_reference"] = hausdorff_distance(limit, A_ref).value
        except IfsError as e:
            logger.warning(f"Reference comparison skipped: {e}")
    write_json(target / "det.json", summary)
    if trace:
        write_csv(target / "trace.csv", ["k", "size", "gap"], approx.trace)
    click.echo(f"attractor size={len(A)} iters={approx.iters_used} gap={approx.cauchy_gap:.6g} "
               f"converged={str(approx.converged).lower()} path={path}")
