"""
Distance Commands
Hausdorff distance between two dumped point sets or ensembles
"""

import json
from pathlib import Path

import click

from core.hausdorff import MODES, hausdorff_distance
from core.superfractal import hh_distance
from decorators import handle_cli_errors
from errors import UsageError
from utils.artifacts import read_ensemble, read_points
from utils.logger import log_command, setup_logger

logger = setup_logger(__name__)


def _is_ensemble(path: str) -> bool:
    p = Path(path)
    return p.suffix == ".ens" or (p.suffix == "" and p.with_suffix(".ens").exists())


@click.command("dist")
@click.argument("file_a", type=click.Path())
@click.argument("file_b", type=click.Path())
@click.option("--mode", type=click.Choice(MODES), default="accelerated", show_default=True)
@handle_cli_errors
@log_command(logger)
def dist(file_a, file_b, mode):
    """
    Print the Hausdorff distance between FILE_A and FILE_B as JSON.

    Point dumps (.f64) give the distance with both witness pairs; ensemble
    dumps (.ens) give the Hausdorff-Hausdorff distance.
    """
    if _is_ensemble(file_a) != _is_ensemble(file_b):
        raise UsageError("Cannot compare a point dump with an ensemble dump")
    if _is_ensemble(file_a):
        payload = {"hh_distance": hh_distance(read_ensemble(file_a), read_ensemble(file_b))}
    else:
        result = hausdorff_distance(read_points(file_a), read_points(file_b), mode)
        payload = dict(result.to_dict(), mode=mode)
    click.echo(json.dumps(payload, sort_keys=True))
