"""
Uniform spatial grids.

UniformGrid answers vectorized nearest-neighbor queries for the
accelerated Hausdorff kernel. DedupIndex is the incremental spatial hash
used to keep finite sets free of near-duplicates. Both work in the
Euclidean embedding coordinates of a space (see core.spaces).
"""

import itertools
import math
from functools import lru_cache
from typing import Tuple

import numpy as np

from config import IFS_ORACLE_CHUNK

# Rings searched before falling back to a brute-force scan
MAX_RING = {1: 32, 2: 8, 3: 3}


@lru_cache(maxsize=None)
def ring_offsets(dim: int, r: int) -> np.ndarray:
    """Integer cell offsets whose Chebyshev norm is exactly r."""
    if r == 0:
        return np.zeros((1, dim), dtype=np.int64)
    span = range(-r, r + 1)
    offsets = [o for o in itertools.product(span, repeat=dim) if max(abs(c) for c in o) == r]
    return np.array(offsets, dtype=np.int64)


def chord(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a - b
    return np.sqrt((diff * diff).sum(axis=-1))


def suggest_cell(coords: np.ndarray, occupancy: float = 2.0) -> float:
    """
    Pick a cell side so that a uniformly filled bounding box holds about
    `occupancy` points per cell.
    """
    if coords.shape[0] == 0:
        return 1.0
    span = float((coords.max(axis=0) - coords.min(axis=0)).max())
    if span <= 0.0:
        return 1.0
    per_axis = max(1.0, (coords.shape[0] / occupancy) ** (1.0 / coords.shape[1]))
    return span / per_axis


class UniformGrid:
    """
    Points bucketed into cubic cells, stored as a sorted array of linear cell keys.

    Queries walk Chebyshev rings of cells outward and stop as soon as the best
    candidate is provably nearest.
    """

    def __init__(self, coords: np.ndarray, cell: float):
        self.coords = np.ascontiguousarray(coords, dtype=float)
        self.dim = self.coords.shape[1]
        span = float((self.coords.max(axis=0) - self.coords.min(axis=0)).max()) if len(self.coords) else 0.0
        max_axis = 2 ** (60 // max(self.dim, 1))
        self.cell = max(float(cell), span / max_axis, 1e-300)
        cells = np.floor(self.coords / self.cell).astype(np.int64)
        self.lo = cells.min(axis=0)
        self.extent = cells.max(axis=0) - self.lo + 1
        self.strides = np.cumprod(np.concatenate(([1], self.extent[:0:-1])))[::-1].astype(np.int64)
        keys = (cells - self.lo) @ self.strides
        self.order = np.argsort(keys, kind="stable")
        self.sorted_keys = keys[self.order]
        self.max_ring = MAX_RING.get(self.dim, 2)

    def __len__(self) -> int:
        return int(self.coords.shape[0])

    def nearest(self, queries: np.ndarray, prune: bool = False) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Nearest stored point (Euclidean chord) for every query row.

        With prune=True a query is abandoned once its running best drops below
        the largest nearest distance certified so far; its entry is then only
        an upper bound and `exact` is False. The maximum over exact entries
        equals the maximum over all queries.

        Args:
            queries: (m, dim) array
            prune: Enable max-min early exit

        Returns:
            (chord distances, stored indices, exact mask)
        """
        q = np.ascontiguousarray(queries, dtype=float)
        m = q.shape[0]
        best = np.full(m, np.inf)
        arg = np.full(m, -1, dtype=np.int64)
        exact = np.zeros(m, dtype=bool)
        qcells = np.floor(q / self.cell).astype(np.int64)
        active = np.arange(m)
        floor = -np.inf
        r = 0
        while active.size:
            if r > self.max_ring:
                self._scan(q, active, best, arg)
                exact[active] = True
                break
            for off in ring_offsets(self.dim, r):
                cells = qcells[active] + off - self.lo
                inside = np.all((cells >= 0) & (cells < self.extent), axis=1)
                if not inside.any():
                    continue
                idx = active[inside]
                keys = cells[inside] @ self.strides
                start = np.searchsorted(self.sorted_keys, keys, side="left")
                count = np.searchsorted(self.sorted_keys, keys, side="right") - start
                for j in range(int(count.max(initial=0))):
                    sel = count > j
                    qi = idx[sel]
                    ci = self.order[start[sel] + j]
                    d = chord(q[qi], self.coords[ci])
                    better = (d < best[qi]) | ((d == best[qi]) & (ci < arg[qi]))
                    best[qi[better]] = d[better]
                    arg[qi[better]] = ci[better]
            # anything not yet visited is at least r cells away
            done = best[active] <= r * self.cell
            exact[active[done]] = True
            keep = ~done
            if prune:
                if done.any():
                    floor = max(floor, float(best[active[done]].max()))
                keep &= ~(best[active] < floor)
            active = active[keep]
            r += 1
        return best, arg, exact

    def _scan(self, q: np.ndarray, idx: np.ndarray, best: np.ndarray, arg: np.ndarray) -> None:
        rows = max(1, IFS_ORACLE_CHUNK // max(len(self), 1))
        for lo in range(0, idx.size, rows):
            chunk = idx[lo:lo + rows]
            d = chord(q[chunk][:, None, :], self.coords[None, :, :])
            j = d.argmin(axis=1)
            best[chunk] = d[np.arange(chunk.size), j]
            arg[chunk] = j


class DedupIndex:
    """
    Incremental first-come deduplication.

    A point is kept unless an already kept point lies within delta/2 of it in
    the metric of the owning space. Buckets have side delta in embedding
    coordinates, so every conflicting point sits in one of the 3^d cells
    around the candidate. delta == 0 keeps everything.
    """

    def __init__(self, space, delta: float):
        self.space = space
        self.delta = float(delta)
        self.enabled = self.delta > 0.0
        self.radius_sq = space.chord_from_metric(self.delta / 2.0) ** 2
        self.inv = 1.0 / self.delta if self.enabled else 0.0
        self.mirrored = space.mirror(np.zeros((1, space.dim))) is not None
        self.offsets = list(itertools.product((-1, 0, 1), repeat=space.dim))
        self.buckets = {}
        self.kept = []

    def __len__(self) -> int:
        return len(self.kept)

    def add(self, coords: np.ndarray) -> np.ndarray:
        """
        Offer canonical rows in order.

        Args:
            coords: (k, dim) canonical coordinates

        Returns:
            Boolean mask of the rows that were kept
        """
        mask = np.ones(coords.shape[0], dtype=bool)
        if not self.enabled:
            return mask
        for i, row in enumerate(self.space.embed(coords).tolist()):
            if self._conflicts(row) or (self.mirrored and self._conflicts([-c for c in row])):
                mask[i] = False
                continue
            key = tuple(math.floor(c * self.inv) for c in row)
            self.buckets.setdefault(key, []).append(len(self.kept))
            self.kept.append(row)
        return mask

    def _conflicts(self, row) -> bool:
        base = [math.floor(c * self.inv) for c in row]
        for off in self.offsets:
            bucket = self.buckets.get(tuple(b + o for b, o in zip(base, off)))
            if not bucket:
                continue
            for j in bucket:
                total = 0.0
                for a, b in zip(row, self.kept[j]):
                    total += (a - b) * (a - b)
                if total < self.radius_sq:
                    return True
        return False
