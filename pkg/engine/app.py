'''
Command-line Application
Builds the `ifs` command group and registers every subcommand.

Run from the repository root:
    python engine/app.py <subcommand> --scene engine/scenes/<name>.scene
'''

import click

# Import configuration
from config import LOG_FILE, LOG_LEVEL

# Import utilities
from utils.logger import setup_logger

# Import subcommands
from commands import (
    run,
    det,
    verify,
    cover,
    dist,
    render,
    superfractal
)

# Set up logging
logger = setup_logger(__name__, log_file=LOG_FILE, level=LOG_LEVEL)


@click.group(name="ifs")
def cli():
    """Attractors of iterated function systems: chaos game, deterministic iteration and verification."""


# Register subcommands
cli.add_command(run)
cli.add_command(det)
cli.add_command(verify)
cli.add_command(cover)
cli.add_command(dist)
cli.add_command(render)
cli.add_command(superfractal)


# ============================================================================
# APPLICATION ENTRY POINT
# ============================================================================

if __name__ == "__main__":
    cli()
