"""
Verification Commands
Seed-panel convergence reports and cover certificates
"""

import sys

import click

from commands.common import base_seed, load_point_scene, provenance, resolve_reference, scene_dir, scene_policy
from core.verify import convergence_report, cover_bound, replay_certificate, upper_limit_equality
from decorators import handle_cli_errors
from utils.artifacts import write_csv, write_json, write_text_report
from utils.logger import log_command, setup_logger

logger = setup_logger(__name__)


@click.command("verify")
@click.option("--scene", "scene_path", required=True, type=click.Path(), help="Scene file")
@click.option("--seed", type=int, default=None, help="Override the scene SEED the panel is derived from")
@click.option("--out", default=None, help="Artifact root (default: scene OUT)")
@handle_cli_errors
@log_command(logger)
def verify(scene_path, seed, out):
    """
    Run SEEDS independent orbits and compare their tails with the reference.

    Exits 0 when the pass fraction meets THRESHOLD, 1 otherwise.
    """
    scene = load_point_scene(scene_path)
    b = scene.budgets
    seed = base_seed(scene, seed)
    A_ref = resolve_reference(scene, out)
    policy = scene_policy(scene, A_ref)
    report = convergence_report(scene.ifs, scene.x0, policy, b.epsilon, b.n, b.T, b.seeds, A_ref,
                                K_ladder=b.K_ladder, base_seed=seed, threshold=b.threshold,
                                scene_id=scene.label)
    report.upper_limit_equality = upper_limit_equality(scene.ifs, scene.x0, policy, b.n, b.upper_K,
                                                       b.upper_k_max, seed=seed, T=b.T,
                                                       dedup_delta=b.dedup_delta)

    target = scene_dir(scene, out)
    payload = dict(provenance(scene), report=report.to_dict(), base_seed=seed)
    write_json(target / "report.json", payload)
    write_csv(target / "curve.csv", ["K", "median_distance"], report.tail_distance_curve)
    write_csv(target / "seeds.csv", ["seed", "K", "distance", "containment", "covering"],
              ([o.seed, c.K, c.distance, c.containment, c.covering] for o in report.outcomes for c in o.curve))
    write_text_report(target / "report.txt", "report.txt.j2", report=report, scene=scene, base_seed=seed)

    click.echo(f"verify passed={report.seeds_passed}/{report.seeds_total} threshold={report.threshold:g} "
               f"K_found={report.K_found}")
    if not report.meets_threshold:
        click.echo(f"verify: pass rate below threshold for scene {scene.label}", err=True)
        sys.exit(1)


@click.command("cover")
@click.option("--scene", "scene_path", required=True, type=click.Path(), help="Scene file")
@click.option("--out", default=None, help="Artifact root (default: scene OUT)")
@handle_cli_errors
@log_command(logger)
def cover(scene_path, out):
    """
    Sample a cover certificate around the reference and replay it.

    Exits 1 when the certificate is incomplete or fails its replay.
    """
    scene = load_point_scene(scene_path)
    b = scene.budgets
    A_ref = resolve_reference(scene, out)
    cert = cover_bound(scene.ifs, A_ref, b.cover_epsilon, b.net_delta, b.m_cap,
                       samples=b.cover_samples, seed=b.seed)
    replayed = replay_certificate(scene.ifs, A_ref, cert)

    target = scene_dir(scene, out)
    write_json(target / "cover.json", dict(provenance(scene), certificate=cert.to_dict(), replayed=replayed))
    click.echo(f"cover M={cert.M} samples={len(cert.samples)} failures={len(cert.failures)} "
               f"replayed={str(replayed).lower()}")
    if not (cert.complete and replayed):
        sys.exit(1)
