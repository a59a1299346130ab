"""
Ground metric spaces.

Euclidean space R^n, the unit circle S^1 with the chordal metric, and the
real projective plane RP^2 with the angle-between-lines metric. Every
other module works on (k, dim) coordinate arrays and asks the space for
canonical forms and distances.

Each space also exposes an embedding into plain Euclidean coordinates in
which its metric is a monotone function of the Euclidean chord. The grid
code in core.grid searches in that embedding.
"""

import math
from typing import Optional

import numpy as np

from config import CIRCLE_TOL, NONZERO_TOL
from errors import InvalidPointError, UsageError
from models import SpacePoint


def _chord(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a - b
    return np.sqrt((diff * diff).sum(axis=-1))


def _squared_norms(arr: np.ndarray) -> np.ndarray:
    # Summed left to right so canonicalize_row reproduces it bit for bit
    total = arr[:, 0] * arr[:, 0]
    for i in range(1, arr.shape[1]):
        total = total + arr[:, i] * arr[:, i]
    return total


def _squared_norm_row(row) -> float:
    total = row[0] * row[0]
    for c in row[1:]:
        total = total + c * c
    return total


class Space:
    """Base class; subclasses fix tag, dim and the metric."""

    tag = "space"

    def __init__(self, dim: int):
        self.dim = int(dim)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"

    # -- canonical forms --------------------------------------------------

    def canonicalize_many(self, coords: np.ndarray) -> np.ndarray:
        return np.array(coords, dtype=float, copy=True).reshape(-1, self.dim)

    def canonicalize_row(self, row: list) -> list:
        """Pure-float twin of canonicalize_many for one row; results match bit for bit."""
        return list(row)

    def canonicalize(self, p: SpacePoint) -> SpacePoint:
        self.check_tag(p)
        row = self.canonicalize_many(p.as_array().reshape(1, -1))[0]
        return SpacePoint(self.tag, tuple(float(v) for v in row))

    # -- metric -----------------------------------------------------------

    def rowwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Distances between paired rows of two canonical arrays (broadcasting)."""
        return _chord(a, b)

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Full |a| x |b| distance matrix between canonical arrays."""
        return self.rowwise(a[:, None, :], b[None, :, :])

    def distance(self, a: SpacePoint, b: SpacePoint) -> float:
        self.check_tag(a)
        self.check_tag(b)
        ca = self.canonicalize_many(a.as_array().reshape(1, -1))
        cb = self.canonicalize_many(b.as_array().reshape(1, -1))
        return float(self.rowwise(ca, cb)[0])

    # -- embedding used by the spatial grid ---------------------------------

    def embed(self, coords: np.ndarray) -> np.ndarray:
        return coords

    def mirror(self, coords: np.ndarray) -> Optional[np.ndarray]:
        """Second representative of every point, if the space identifies antipodes."""
        return None

    def metric_from_chord(self, chord):
        return chord

    def chord_from_metric(self, r: float) -> float:
        return float(r)

    def check_tag(self, p: SpacePoint) -> None:
        if p.space_tag != self.tag:
            raise UsageError(f"Point on space '{p.space_tag}' used with space '{self.tag}'")
        if len(p.coords) != self.dim:
            raise UsageError(f"Point has {len(p.coords)} coordinates, space '{self.tag}' needs {self.dim}")


class EuclideanSpace(Space):
    """R^n with the l2 metric."""

    tag = "euclidean"


class CircleSpace(Space):
    """
    The unit circle in R^2 with the chordal (ambient Euclidean) metric.

    Points are renormalized to unit length whenever they are canonicalized.
    """

    tag = "circle"

    def __init__(self, dim: int = 2):
        super().__init__(2)

    def canonicalize_many(self, coords: np.ndarray) -> np.ndarray:
        arr = np.array(coords, dtype=float, copy=True).reshape(-1, 2)
        norms = np.sqrt(_squared_norms(arr))
        if np.any(norms <= NONZERO_TOL):
            raise InvalidPointError("Circle point has (near) zero norm and cannot be renormalized")
        off = np.abs(norms - 1.0) > CIRCLE_TOL
        if np.any(off):
            arr[off] = arr[off] / norms[off, None]
        return arr

    def canonicalize_row(self, row: list) -> list:
        norm = math.sqrt(_squared_norm_row(row))
        if norm <= NONZERO_TOL:
            raise InvalidPointError("Circle point has (near) zero norm and cannot be renormalized")
        if abs(norm - 1.0) > CIRCLE_TOL:
            return [c / norm for c in row]
        return list(row)


class ProjectivePlane(Space):
    """
    RP^2 with the round metric, the angle between lines through the origin.

    Canonical form: unit Euclidean norm, first coordinate with |c| > 1e-12
    positive. The angle is evaluated as 2*arcsin(min(|u-v|, |u+v|)/2) on unit
    representatives, which equals arccos(|<u,v>|) and stays accurate for
    nearly equal lines.
    """

    tag = "projective2"

    def __init__(self, dim: int = 3):
        super().__init__(3)

    def canonicalize_many(self, coords: np.ndarray) -> np.ndarray:
        arr = np.array(coords, dtype=float, copy=True).reshape(-1, 3)
        norms = np.sqrt(_squared_norms(arr))
        if np.any(norms <= NONZERO_TOL):
            raise InvalidPointError("Homogeneous coordinates must be nonzero")
        off = np.abs(norms - 1.0) > CIRCLE_TOL
        if np.any(off):
            arr[off] = arr[off] / norms[off, None]
        nonzero = np.abs(arr) > NONZERO_TOL
        first = np.argmax(nonzero, axis=1)
        signs = np.sign(arr[np.arange(arr.shape[0]), first])
        signs[signs == 0] = 1.0
        arr *= signs[:, None]
        return arr

    def canonicalize_row(self, row: list) -> list:
        norm = math.sqrt(_squared_norm_row(row))
        if norm <= NONZERO_TOL:
            raise InvalidPointError("Homogeneous coordinates must be nonzero")
        if abs(norm - 1.0) > CIRCLE_TOL:
            row = [c / norm for c in row]
        for c in row:
            if abs(c) > NONZERO_TOL:
                return [-v for v in row] if c < 0 else list(row)
        return list(row)

    def rowwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        chord = np.minimum(_chord(a, b), _chord(a, -b))
        return self.metric_from_chord(chord)

    def mirror(self, coords: np.ndarray) -> np.ndarray:
        return -coords

    def metric_from_chord(self, chord):
        half = np.clip(np.asarray(chord, dtype=float) / 2.0, 0.0, math.sqrt(0.5))
        return np.clip(2.0 * np.arcsin(half), 0.0, math.pi / 2)

    def chord_from_metric(self, r: float) -> float:
        return 2.0 * math.sin(min(float(r), math.pi / 2) / 2.0)


def get_space(tag: str, dim: int = 2) -> Space:
    """
    Look up the ground space for a tag.

    Args:
        tag: euclidean | circle | projective2
        dim: Coordinate length (only meaningful for euclidean)

    Returns:
        Space instance
    """
    if tag == "euclidean":
        return EuclideanSpace(dim)
    if tag == "circle":
        return CircleSpace()
    if tag == "projective2":
        return ProjectivePlane()
    if tag == "hyperspace":
        raise UsageError("Hyperspace points are handled by the superfractal module")
    raise UsageError(f"Unknown space '{tag}'")


def make_point(tag: str, coords) -> SpacePoint:
    """Build a canonical SpacePoint from raw coordinates."""
    coords = tuple(float(c) for c in coords)
    space = get_space(tag, len(coords))
    return space.canonicalize(SpacePoint(tag, coords))


def distance(a: SpacePoint, b: SpacePoint) -> float:
    """Metric distance between two points of the same space."""
    if a.space_tag != b.space_tag:
        raise UsageError(f"Cannot measure distance between '{a.space_tag}' and '{b.space_tag}' points")
    if len(a.coords) != len(b.coords):
        raise UsageError("Points have different coordinate lengths")
    return get_space(a.space_tag, len(a.coords)).distance(a, b)


def canonicalize(p: SpacePoint) -> SpacePoint:
    """Canonical representative of p (unit circle / unit projective form)."""
    return get_space(p.space_tag, len(p.coords)).canonicalize(p)
