"""
Render Commands
Rasterizes dumped point sets into PPM images
"""

from pathlib import Path

import click

from commands.common import scene_dir
from core.render import render_ppm
from decorators import handle_cli_errors
from utils.artifacts import read_points, write_json
from utils.logger import log_command, setup_logger
from utils.scene import load_scene

logger = setup_logger(__name__)


@click.command("render")
@click.option("--scene", "scene_path", required=True, type=click.Path(), help="Scene file (RENDER_* settings)")
@click.option("--points", "points_path", required=True, type=click.Path(), help="Point dump to draw")
@click.option("--out", default=None, help="Artifact root (default: scene OUT)")
@handle_cli_errors
@log_command(logger)
def render(scene_path, points_path, out):
    """Write <dump name>.ppm next to the scene's other artifacts."""
    scene = load_scene(scene_path)
    points = read_points(points_path)
    data, stats = render_ppm(points, scene.render)
    stem = Path(points_path).with_suffix("").name
    target = scene_dir(scene, out)
    image_path = target / f"{stem}.ppm"
    image_path.write_bytes(data)
    write_json(target / f"{stem}.render.json", dict(stats, render=scene.render.to_dict()))
    click.echo(f"render drawn={stats['drawn']} outside={stats['outside']} flagged={stats['flagged']} path={image_path}")
