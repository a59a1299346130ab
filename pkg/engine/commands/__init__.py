"""
Commands Package
Exports all subcommands for the `ifs` command group
"""

from .orbit_commands import run
from .attractor_commands import det
from .verify_commands import verify, cover
from .distance_commands import dist
from .render_commands import render
from .superfractal_commands import superfractal

__all__ = [
    'run',
    'det',
    'verify',
    'cover',
    'dist',
    'render',
    'superfractal'
]
