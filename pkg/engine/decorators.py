"""
Decorators Module
Common decorators used across the command-line surface
"""

import sys
from functools import wraps

import click

from errors import IfsError
from utils.logger import log_run_event, setup_logger

logger = setup_logger(__name__)


def handle_cli_errors(f):
    """
    Decorator to turn engine errors into one-line failures with exit codes.

    Any IfsError escaping the command is printed to stderr as
    `error=<code> exit=<n> message="..."` and the process exits with the
    error's exit code.
    """
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except IfsError as e:
            log_run_event(logger, 'command_failed', command=f.__name__, code=e.code)
            click.echo(e.one_line(), err=True)
            sys.exit(e.exit_code)

    return decorated_function
