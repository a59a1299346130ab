"""
Hausdorff metric kernel.

Dilation membership, one-sided containment and the symmetric Hausdorff
distance between FiniteSets. Two evaluation modes share one metric
formula per space:

- oracle: blocked brute-force max-min over all pairs
- accelerated: uniform-grid nearest-neighbor search with max-min early exit
"""

from typing import Tuple

import numpy as np

from config import IFS_ORACLE_CHUNK
from core.grid import UniformGrid, suggest_cell
from core.spaces import Space, get_space
from errors import DomainError, UsageError
from models import DistanceResult, FiniteSet, SpacePoint
from utils.logger import setup_logger

logger = setup_logger(__name__)

MODES = ("oracle", "accelerated")

# Below this many pairs the oracle is cheaper than building a grid
SMALL_PAIRS = 4096

# Distances this close count as tied when choosing witnesses
TIE_TOL = 1e-12


def _space_for(B: FiniteSet, C: FiniteSet) -> Space:
    if len(B) == 0 or len(C) == 0:
        raise DomainError("Hausdorff distance needs nonempty sets")
    if B.space_tag != C.space_tag:
        raise UsageError(f"Cannot compare sets on '{B.space_tag}' and '{C.space_tag}'")
    if B.dim != C.dim:
        raise UsageError(f"Cannot compare sets of dimension {B.dim} and {C.dim}")
    return get_space(B.space_tag, B.dim)


def _oracle_nearest(space: Space, queries: np.ndarray, targets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    rows = max(1, IFS_ORACLE_CHUNK // max(targets.shape[0], 1))
    best = np.empty(queries.shape[0])
    arg = np.empty(queries.shape[0], dtype=np.int64)
    for lo in range(0, queries.shape[0], rows):
        d = space.pairwise(queries[lo:lo + rows], targets)
        j = d.argmin(axis=1)
        best[lo:lo + rows] = d[np.arange(d.shape[0]), j]
        arg[lo:lo + rows] = j
    return best, arg


def _target_grid(space: Space, targets: np.ndarray) -> UniformGrid:
    emb = space.embed(targets)
    mirrored = space.mirror(emb)
    if mirrored is not None:
        emb = np.concatenate([emb, mirrored])
    return UniformGrid(emb, suggest_cell(emb))


class NearestIndex:
    """
    Nearest-target lookups against one fixed target set.

    Small batches go to the blocked oracle. The grid over the targets is
    built on the first large batch and reused for every later one.
    """

    def __init__(self, space: Space, targets: np.ndarray):
        self.space = space
        self.targets = targets
        self._grid = None

    @property
    def grid_built(self) -> bool:
        return self._grid is not None

    def query(self, queries: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Exact metric distance from every query row to its nearest target row.

        Returns:
            (distances, target indices)
        """
        if queries.shape[0] * self.targets.shape[0] <= SMALL_PAIRS:
            return _oracle_nearest(self.space, queries, self.targets)
        if self._grid is None:
            self._grid = _target_grid(self.space, self.targets)
        _, arg, _ = self._grid.nearest(self.space.embed(queries))
        arg = arg % self.targets.shape[0]
        return self.space.rowwise(queries, self.targets[arg]), arg


def nearest_distances(space: Space, queries: np.ndarray, targets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """One-off NearestIndex query."""
    return NearestIndex(space, targets).query(queries)


def _smallest_row(points: np.ndarray, idx: np.ndarray) -> int:
    """Index (from idx) of the lexicographically smallest row."""
    rows = points[idx]
    return int(idx[np.lexsort(rows.T[::-1])[0]])


def _tied_witness(space: Space, B: FiniteSet, C: FiniteSet, value: float, upper: np.ndarray,
                  exact: bool) -> Tuple[int, int]:
    """
    Witness pair among ties: the lexicographically smallest (b, c).

    `upper` bounds each row's nearest distance from above; when `exact` is
    False the rows that could still tie are re-evaluated against all of C.
    """
    tied = np.flatnonzero(upper >= value - TIE_TOL)
    if not exact:
        best, _ = _oracle_nearest(space, B.points[tied], C.points)
        tied = tied[best >= value - TIE_TOL]
    i = _smallest_row(B.points, tied)
    d = space.pairwise(B.points[i:i + 1], C.points)[0]
    j = _smallest_row(C.points, np.flatnonzero(d <= d.min() + TIE_TOL))
    return i, j


def directed(B: FiniteSet, C: FiniteSet, mode: str = "accelerated") -> Tuple[float, int, int]:
    """
    Directed Hausdorff distance max over b of min over c of d(b, c).

    Witnesses do not depend on the order of B or C: among pairs tied within
    1e-12 the lexicographically smallest (b, c) is returned.

    Args:
        B: Source set
        C: Target set
        mode: oracle | accelerated

    Returns:
        (value, index of the witness in B, index of its nearest point in C)
    """
    space = _space_for(B, C)
    if mode not in MODES:
        raise UsageError(f"Unknown Hausdorff mode '{mode}'")
    if mode == "oracle":
        best, _ = _oracle_nearest(space, B.points, C.points)
        value = float(best.max())
        i, j = _tied_witness(space, B, C, value, best, exact=True)
        return value, i, j
    grid = _target_grid(space, C.points)
    chords, arg, exact = grid.nearest(space.embed(B.points), prune=True)
    candidates = np.flatnonzero(exact)
    i = int(candidates[np.argmax(chords[candidates])])
    arg = arg % len(C)
    value = float(space.rowwise(B.points[i], C.points[arg[i]]))
    upper = space.rowwise(B.points, C.points[arg])
    i, j = _tied_witness(space, B, C, value, upper, exact=False)
    return value, i, j


def hausdorff_distance(B: FiniteSet, C: FiniteSet, mode: str = "accelerated") -> DistanceResult:
    """
    Symmetric Hausdorff distance between two finite sets.

    Args:
        B: Nonempty FiniteSet
        C: Nonempty FiniteSet on the same space
        mode: oracle (all pairs) or accelerated (grid with early exit)

    Returns:
        DistanceResult with the witness pair of each direction
    """
    forward, i_b, j_c = directed(B, C, mode)
    backward, i_c, j_b = directed(C, B, mode)
    result = DistanceResult(
        value=max(forward, backward),
        forward=forward,
        backward=backward,
        witness_b_to_c=(tuple(B.points[i_b].tolist()), tuple(C.points[j_c].tolist())),
        witness_c_to_b=(tuple(C.points[i_c].tolist()), tuple(B.points[j_b].tolist())),
    )
    logger.debug(f"hausdorff mode={mode} |B|={len(B)} |C|={len(C)} value={result.value:.6g}")
    return result


def dilation_contains(C: FiniteSet, r: float, x: SpacePoint) -> bool:
    """
    Membership in the open dilation C + r = {y : d(c, y) < r for some c in C}.
    """
    if len(C) == 0:
        raise DomainError("Dilation of an empty set")
    if not r > 0:
        raise DomainError("Dilation radius must be positive")
    if x.space_tag != C.space_tag:
        raise UsageError(f"Point on '{x.space_tag}' tested against a set on '{C.space_tag}'")
    space = get_space(C.space_tag, C.dim)
    row = space.canonicalize_many(x.as_array().reshape(1, -1))
    best, _ = nearest_distances(space, row, C.points)
    return bool(best[0] < r)


def is_within(B: FiniteSet, C: FiniteSet, r: float) -> bool:
    """True iff every point of B lies strictly within r of C, i.e. B is inside C + r."""
    if not r > 0:
        raise DomainError("Containment radius must be positive")
    value, _, _ = directed(B, C, "accelerated")
    return value < r
