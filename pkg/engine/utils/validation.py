"""
Input validation utilities.

This module provides functions for validating scene values: budgets,
selection-policy floors, Markov matrices, projective matrices and
space/map compatibility. Every validator returns (is_valid, message).
"""

from typing import Sequence, Tuple

import numpy as np

from config import DET_TOL, ROW_SUM_TOL, SCENE_VERSIONS

SPACE_TAGS = ("euclidean", "circle", "projective2", "hyperspace")

# Map kinds allowed on each ground space
MAP_KINDS_BY_SPACE = {
    "euclidean": ("identity", "affine", "rotation2"),
    "circle": ("identity", "rotation2"),
    "projective2": ("identity", "projective3x3"),
    "hyperspace": ("identity", "lifted"),
}


def validate_version(version: int) -> Tuple[bool, str]:
    """
    Validate the scene format version.

    Args:
        version: Parsed VERSION value

    Returns:
        A tuple of (is_valid, message)
    """
    if version not in SCENE_VERSIONS:
        known = ", ".join(str(v) for v in SCENE_VERSIONS)
        return False, f"Unknown scene version {version} (known: {known})"
    return True, "Version is valid"


def validate_positive(value: float, field_name: str = "Value") -> Tuple[bool, str]:
    if value is None:
        return False, f"{field_name} is required"
    if not np.isfinite(value) or value <= 0:
        return False, f"{field_name} must be positive"
    return True, f"{field_name} is valid"


def validate_nonneg_int(value: int, field_name: str = "Value") -> Tuple[bool, str]:
    if value is None:
        return False, f"{field_name} is required"
    if int(value) != value or value < 0:
        return False, f"{field_name} must be a non-negative integer"
    return True, f"{field_name} is valid"


def validate_space_tag(tag: str) -> Tuple[bool, str]:
    if tag not in SPACE_TAGS:
        return False, f"Unknown space '{tag}' (expected one of {', '.join(SPACE_TAGS)})"
    return True, "Space is valid"


def validate_map_kind_for_space(kind: str, space_tag: str) -> Tuple[bool, str]:
    """
    Validate that a map kind can act on a ground space.

    Requirements:
    - projective3x3 only on projective2
    - rotation2 only on circle or 2-dimensional euclidean space
    - lifted only on hyperspace

    Args:
        kind: Map kind
        space_tag: Space tag of the owning IFS

    Returns:
        A tuple of (is_valid, message)
    """
    allowed = MAP_KINDS_BY_SPACE.get(space_tag, ())
    if kind not in allowed:
        return False, f"Map kind '{kind}' is not allowed on space '{space_tag}'"
    return True, "Map kind is valid"


def validate_floor(p: float, n_maps: int) -> Tuple[bool, str]:
    """
    Validate a selection-policy probability floor.

    Requirements:
    - 0 < p <= 1/N where N is the number of maps

    Args:
        p: Conditional probability floor
        n_maps: Number of maps N in the IFS

    Returns:
        A tuple of (is_valid, message)
    """
    if n_maps < 1:
        return False, "IFS must have at least one map"
    if not 0.0 < p <= 1.0 / n_maps + 1e-15:
        return False, f"Floor p={p} must lie in (0, 1/N] with N={n_maps}"
    return True, "Floor is valid"


def validate_markov_matrix(matrix: Sequence[Sequence[float]], n_maps: int, floor_p: float) -> Tuple[bool, str]:
    """
    Validate a row-stochastic selection matrix.

    Requirements:
    - shape N x N
    - every entry >= floor_p
    - every row sums to 1 within 1e-12

    Args:
        matrix: Transition matrix rows
        n_maps: Number of maps N
        floor_p: Declared probability floor

    Returns:
        A tuple of (is_valid, message)
    """
    arr = np.asarray(matrix, dtype=float)
    if arr.shape != (n_maps, n_maps):
        return False, f"Markov matrix must be {n_maps}x{n_maps}, got {arr.shape}"
    if np.any(arr < floor_p):
        return False, f"Markov matrix entries must be >= floor p={floor_p}"
    if np.any(np.abs(arr.sum(axis=1) - 1.0) > ROW_SUM_TOL):
        return False, "Markov matrix rows must sum to 1"
    return True, "Markov matrix is valid"


def validate_projective_matrix(matrix: Sequence[Sequence[float]]) -> Tuple[bool, str]:
    """
    Validate a projective transformation matrix.

    Requirements:
    - shape 3 x 3
    - invertible: |det| > 1e-12

    Args:
        matrix: Matrix rows

    Returns:
        A tuple of (is_valid, message)
    """
    arr = np.asarray(matrix, dtype=float)
    if arr.shape != (3, 3):
        return False, f"Projective matrix must be 3x3, got {arr.shape}"
    if abs(np.linalg.det(arr)) <= DET_TOL:
        return False, "Projective matrix must be invertible (|det| > 1e-12)"
    return True, "Projective matrix is valid"
