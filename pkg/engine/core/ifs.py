"""
Iterated function systems on finite set approximations.

Applies individual maps, builds deduplicated FiniteSets and evaluates the
Hutchinson set map F(B) = union of f(B) together with its k-fold iterates.
"""

import hashlib
import json
import math
from typing import Iterable, Optional

import numpy as np

from core.grid import DedupIndex
from core.spaces import get_space
from errors import DomainError, UsageError
from models import FiniteSet, IfsSpec, MapSpec, SpacePoint
from utils.logger import setup_logger
from utils.validation import validate_map_kind_for_space, validate_projective_matrix

logger = setup_logger(__name__)


def rotation_matrix(alpha: float) -> np.ndarray:
    """Anticlockwise rotation of the plane through alpha radians."""
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]])


class CompiledMap:
    """
    A MapSpec with its operands prepared once.

    apply() works on (k, dim) arrays and apply_row() on one list of floats;
    both evaluate the same products in the same order, so an orbit computed
    row by row replays exactly through either path.
    """

    def __init__(self, spec: MapSpec, space):
        self.spec = spec
        self.space = space
        self.linear: Optional[np.ndarray] = None
        self.offset: Optional[np.ndarray] = None
        if spec.kind == "identity":
            pass
        elif spec.kind == "affine":
            self.linear = np.asarray(spec.matrix, dtype=float).reshape(space.dim, space.dim)
            if spec.offset is not None:
                self.offset = np.asarray(spec.offset, dtype=float).reshape(space.dim)
        elif spec.kind == "rotation2":
            if space.dim != 2:
                raise UsageError("rotation2 needs a 2-dimensional space")
            self.linear = rotation_matrix(spec.alpha)
        elif spec.kind == "projective3x3":
            is_valid, message = validate_projective_matrix(spec.matrix)
            if not is_valid:
                raise UsageError(message)
            self.linear = np.asarray(spec.matrix, dtype=float)
        elif spec.kind == "lifted":
            raise UsageError("Lifted maps act on sets; use the superfractal module")
        else:
            raise UsageError(f"Unknown map kind '{spec.kind}'")
        self._rows = self.linear.tolist() if self.linear is not None else None
        self._shift = self.offset.tolist() if self.offset is not None else None

    def apply(self, coords: np.ndarray) -> np.ndarray:
        """Canonical images of (k, dim) canonical rows."""
        if self.linear is None:
            return np.array(coords, dtype=float, copy=True)
        dim = self.space.dim
        out = np.empty((coords.shape[0], dim))
        for i in range(dim):
            acc = self.linear[i, 0] * coords[:, 0]
            for j in range(1, dim):
                acc = acc + self.linear[i, j] * coords[:, j]
            if self.offset is not None:
                acc = acc + self.offset[i]
            out[:, i] = acc
        return self.space.canonicalize_many(out)

    def apply_row(self, row: list) -> list:
        """Canonical image of one canonical row given as floats."""
        if self._rows is None:
            return list(row)
        out = []
        for i, coeffs in enumerate(self._rows):
            acc = coeffs[0] * row[0]
            for j in range(1, len(coeffs)):
                acc = acc + coeffs[j] * row[j]
            if self._shift is not None:
                acc = acc + self._shift[i]
            out.append(acc)
        return self.space.canonicalize_row(out)


class CompiledIfs:
    """Every map of an IfsSpec compiled against its ground space."""

    def __init__(self, F: IfsSpec):
        if F.n_maps < 1:
            raise UsageError("An IFS needs at least one map")
        self.spec = F
        self.space = get_space(F.space_tag, F.dim)
        for m in F.maps:
            is_valid, message = validate_map_kind_for_space(m.kind, F.space_tag)
            if not is_valid:
                raise UsageError(message)
        self.maps = [CompiledMap(m, self.space) for m in F.maps]

    def __len__(self) -> int:
        return len(self.maps)


def compile_ifs(F) -> CompiledIfs:
    return F if isinstance(F, CompiledIfs) else CompiledIfs(F)


def ifs_hash(F: IfsSpec) -> str:
    """sha256 of the canonical JSON form of an IFS."""
    payload = json.dumps(F.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ============================================================================
# FINITE SETS
# ============================================================================

def make_finite_set(space_tag: str, coords, dedup_delta: float = 0.0) -> FiniteSet:
    """
    Canonicalize and deduplicate raw coordinates into a FiniteSet.

    Args:
        space_tag: Ground space tag
        coords: (k, dim) array-like of coordinates
        dedup_delta: Spatial-hash resolution; 0 keeps every point

    Returns:
        FiniteSet whose points are pairwise at least dedup_delta/2 apart
    """
    arr = np.asarray(coords, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.shape[0] == 0:
        raise DomainError("A finite set approximating a compact set must be nonempty")
    if dedup_delta < 0:
        raise DomainError("dedup_delta must be non-negative")
    space = get_space(space_tag, arr.shape[1])
    canon = space.canonicalize_many(arr)
    index = DedupIndex(space, dedup_delta)
    return FiniteSet(space_tag, canon[index.add(canon)], float(dedup_delta))


def singleton(p: SpacePoint, dedup_delta: float = 0.0) -> FiniteSet:
    return make_finite_set(p.space_tag, [p.coords], dedup_delta)


def union(sets: Iterable[FiniteSet], dedup_delta: Optional[float] = None) -> FiniteSet:
    """Deduplicated union; earlier sets win ties."""
    sets = list(sets)
    if not sets:
        raise DomainError("Union of no sets is empty")
    tags = {s.space_tag for s in sets}
    if len(tags) != 1:
        raise UsageError(f"Cannot unite sets on different spaces: {sorted(tags)}")
    delta = sets[0].dedup_delta if dedup_delta is None else dedup_delta
    return make_finite_set(sets[0].space_tag, np.concatenate([s.points for s in sets]), delta)


def _check_ifs_and_set(cf: CompiledIfs, B: FiniteSet) -> None:
    if len(B) == 0:
        raise DomainError("Cannot apply the Hutchinson map to an empty set")
    if B.space_tag != cf.spec.space_tag:
        raise UsageError(f"Set on '{B.space_tag}' used with an IFS on '{cf.spec.space_tag}'")
    if B.dim != cf.space.dim:
        raise UsageError(f"Set has dimension {B.dim}, IFS expects {cf.space.dim}")


# ============================================================================
# MAP AND SET-MAP APPLICATION
# ============================================================================

def apply_map(m: MapSpec, p: SpacePoint, space_tag: Optional[str] = None) -> SpacePoint:
    """
    Apply one map to one point.

    Args:
        m: Map specification
        p: Point; its space must accept the map kind
        space_tag: Optional expected space (defaults to p's)

    Returns:
        Canonical image point
    """
    tag = space_tag or p.space_tag
    if tag != p.space_tag:
        raise UsageError(f"Point on '{p.space_tag}' used with a map on '{tag}'")
    is_valid, message = validate_map_kind_for_space(m.kind, tag)
    if not is_valid:
        raise UsageError(message)
    space = get_space(tag, len(p.coords))
    row = space.canonicalize_row([float(c) for c in p.coords])
    image = CompiledMap(m, space).apply_row(row)
    return SpacePoint(tag, tuple(float(v) for v in image))


def hutchinson_step(F, B: FiniteSet, dedup_delta: Optional[float] = None) -> FiniteSet:
    """
    One application of the Hutchinson set map F(B) = union over f of f(B).

    Images are offered to the dedup index map by map, point by point, so the
    surviving representatives do not depend on scheduling.

    Args:
        F: IfsSpec or CompiledIfs
        B: Nonempty FiniteSet on F's space
        dedup_delta: Override for B.dedup_delta

    Returns:
        Deduplicated FiniteSet of at most N*|B| points
    """
    cf = compile_ifs(F)
    _check_ifs_and_set(cf, B)
    delta = B.dedup_delta if dedup_delta is None else dedup_delta
    images = np.concatenate([m.apply(B.points) for m in cf.maps])
    index = DedupIndex(cf.space, delta)
    return FiniteSet(B.space_tag, images[index.add(images)], float(delta))


def iterate(F, B: FiniteSet, k: int) -> FiniteSet:
    """
    k-fold composition F^k(B), with F^0(B) = B and dedup at every step.
    """
    if k < 0:
        raise UsageError("Iteration count k must be non-negative")
    cf = compile_ifs(F)
    _check_ifs_and_set(cf, B)
    current = B
    for _ in range(k):
        current = hutchinson_step(cf, current)
    logger.debug(f"iterate k={k} size={len(current)}")
    return current
