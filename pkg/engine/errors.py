"""
Exception hierarchy for the engine.

Every error carries a machine-readable code and the exit code the CLI
uses when the error escapes a subcommand.
"""

from typing import List, Tuple


class IfsError(Exception):
    """Base class for all engine errors."""

    code = "ifs_error"
    exit_code = 10

    def one_line(self) -> str:
        message = str(self).replace("\n", " ").replace('"', "'")
        return f'error={self.code} exit={self.exit_code} message="{message}"'


class UsageError(IfsError):
    """Arguments are individually valid but do not fit together."""

    code = "usage"
    exit_code = 2


class SceneParseError(IfsError):
    code = "scene_parse"
    exit_code = 3


class SceneVersionError(IfsError):
    code = "scene_version"
    exit_code = 4


class SceneValidationError(IfsError):
    """A scene parsed but broke one or more invariants."""

    code = "scene_invalid"
    exit_code = 5

    def __init__(self, problems: List[Tuple[str, str]]):
        self.problems = list(problems)
        super().__init__("; ".join(f"{path}: {reason}" for path, reason in self.problems))


class MissingArtifactError(IfsError):
    code = "missing_artifact"
    exit_code = 6


class DomainError(IfsError):
    """An operation was handed a value outside its domain (empty set, r <= 0, ...)."""

    code = "domain"
    exit_code = 7


class InvalidPointError(DomainError):
    code = "invalid_point"


class ArtifactFormatError(IfsError):
    code = "artifact_format"
    exit_code = 8
