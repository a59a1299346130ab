"""
The chaos game.

Random orbits x_k = f_{sigma_k}(x_{k-1}) whose map indices come from a
selection policy. The only promise a policy makes is the probability floor:
every conditional probability P(sigma_k = m | past) is at least floor_p.

Draw consumption is fixed so orbits replay exactly from their seed:

- uniform_iid: one uniform per step, index floor(u * N)
- markov: one uniform per step; the first step is uniform, later steps
  invert the CDF of the previous index's row
- adversarial_floor: two uniforms per step (coin, index). When
  coin < N * floor_p the index is floor(index * N); otherwise the adversary
  picks the map whose image lies farthest from the target set, lowest
  index on ties.
"""

import bisect
import itertools
from typing import Callable, List, Optional, Tuple

import numpy as np

from core.hausdorff import NearestIndex
from core.ifs import compile_ifs, make_finite_set
from errors import DomainError, UsageError
from models import FiniteSet, FloorReport, RandomOrbit, SelectionPolicy, SpacePoint
from utils.logger import log_run_event, setup_logger
from utils.rng import make_rng
from utils.validation import validate_floor, validate_markov_matrix

logger = setup_logger(__name__)

POLICY_KINDS = ("uniform_iid", "markov", "adversarial_floor")


# ============================================================================
# POLICIES
# ============================================================================

def uniform_policy(n_maps: int, floor_p: Optional[float] = None) -> SelectionPolicy:
    """IID uniform selection; the floor defaults to 1/N."""
    return SelectionPolicy("uniform_iid", 1.0 / n_maps if floor_p is None else float(floor_p))


def markov_policy(matrix, floor_p: Optional[float] = None) -> SelectionPolicy:
    """Selection driven by a row-stochastic matrix; the floor defaults to its smallest entry."""
    rows = tuple(tuple(float(v) for v in row) for row in matrix)
    if floor_p is None:
        floor_p = min(min(row) for row in rows)
    return SelectionPolicy("markov", float(floor_p), matrix=rows)


def adversarial_policy(floor_p: float, target: FiniteSet) -> SelectionPolicy:
    """Explore uniformly with probability N*p, otherwise try to escape `target`."""
    return SelectionPolicy("adversarial_floor", float(floor_p), target=target)


def validate_policy(policy: SelectionPolicy, n_maps: int, space_tag: Optional[str] = None) -> None:
    """
    Check a policy against an IFS with n_maps maps.

    Raises:
        UsageError: unknown kind, floor outside (0, 1/N], bad matrix or target
    """
    if policy.kind not in POLICY_KINDS:
        raise UsageError(f"Unknown selection policy '{policy.kind}'")
    is_valid, message = validate_floor(policy.floor_p, n_maps)
    if not is_valid:
        raise UsageError(message)
    if policy.kind == "markov":
        if policy.matrix is None:
            raise UsageError("Markov policy needs a matrix")
        is_valid, message = validate_markov_matrix(policy.matrix, n_maps, policy.floor_p)
        if not is_valid:
            raise UsageError(message)
    if policy.kind == "adversarial_floor":
        if policy.target is None or len(policy.target) == 0:
            raise UsageError("Adversarial policy needs a nonempty target set")
        if space_tag is not None and policy.target.space_tag != space_tag:
            raise UsageError(f"Adversary target lives on '{policy.target.space_tag}', IFS on '{space_tag}'")


class Selector:
    """
    Draws map indices (0-based) for one orbit from a seeded generator.

    All randomness for n steps is drawn up front in a fixed shape, so the
    sequence depends only on (seed, policy, n) and, for the adversary, on
    the orbit itself. Uniform and Markov selection are fixed in advance by
    schedule(); the adversary decides step by step through next_index().
    """

    def __init__(self, policy: SelectionPolicy, n_maps: int, n: int, seed: int, space=None):
        self.policy = policy
        self.n_maps = n_maps
        self.adaptive = policy.kind == "adversarial_floor"
        rng = make_rng(seed)
        if self.adaptive:
            draws = rng.random((n, 2))
            self.coins = draws[:, 0].tolist()
            self.uniform = _scale(draws[:, 1], n_maps)
            self.explore = n_maps * policy.floor_p
            self.index = NearestIndex(space, policy.target.points)
        else:
            self.u = rng.random(n)
            self.uniform = _scale(self.u, n_maps)

    def schedule(self) -> List[int]:
        """Every index of a non-adaptive policy."""
        if self.policy.kind == "uniform_iid":
            return self.uniform
        cdf = [list(itertools.accumulate(row)) for row in self.policy.matrix]
        last = self.n_maps - 1
        out = []
        m = -1
        for k, u in enumerate(self.u.tolist()):
            m = self.uniform[k] if m < 0 else min(bisect.bisect_right(cdf[m], u), last)
            out.append(m)
        return out

    def next_index(self, k: int, images: Callable[[], np.ndarray]) -> int:
        """Adversarial step k; images() yields every map's image of the current point."""
        if self.coins[k] < self.explore:
            return self.uniform[k]
        scores, _ = self.index.query(images())
        return int(np.argmax(scores))


def _scale(u: np.ndarray, n_maps: int) -> List[int]:
    return np.minimum((u * n_maps).astype(np.int64), n_maps - 1).tolist()


# ============================================================================
# ORBITS
# ============================================================================

def _start_row(space, x0: SpacePoint, space_tag: str) -> list:
    if x0.space_tag != space_tag:
        raise UsageError(f"Starting point on '{x0.space_tag}' used with an IFS on '{space_tag}'")
    if len(x0.coords) != space.dim:
        raise UsageError(f"Starting point has {len(x0.coords)} coordinates, space needs {space.dim}")
    return space.canonicalize_row([float(c) for c in x0.coords])


def run_orbit(F, x0: SpacePoint, policy: SelectionPolicy, n: int, seed: int) -> RandomOrbit:
    """
    Generate a random orbit of n steps.

    Args:
        F: IfsSpec or CompiledIfs
        x0: Starting point
        policy: Selection policy valid for F's map count
        n: Number of steps (n >= 1)
        seed: 64-bit generator seed

    Returns:
        RandomOrbit with n+1 points and n one-based sigmas
    """
    if n < 1:
        raise UsageError("Orbit length n must be at least 1")
    cf = compile_ifs(F)
    n_maps = len(cf)
    validate_policy(policy, n_maps, cf.spec.space_tag)
    space = cf.space
    row = _start_row(space, x0, cf.spec.space_tag)

    selector = Selector(policy, n_maps, n, seed, space)
    maps = [m.apply_row for m in cf.maps]
    points = np.empty((n + 1, space.dim))
    sigmas = np.empty(n, dtype=np.int64)
    points[0] = row
    if selector.adaptive:
        for k in range(n):
            current = row
            m = selector.next_index(k, lambda: np.array([f(current) for f in maps]))
            row = maps[m](row)
            points[k + 1] = row
            sigmas[k] = m + 1
    else:
        schedule = selector.schedule()
        for k, m in enumerate(schedule):
            row = maps[m](row)
            points[k + 1] = row
        sigmas[:] = np.asarray(schedule, dtype=np.int64) + 1

    orbit = RandomOrbit(space_tag=cf.spec.space_tag, x0=SpacePoint(cf.spec.space_tag, tuple(points[0].tolist())),
                        points=points, sigmas=sigmas, seed=int(seed), policy_id=policy.policy_id,
                        n_maps=n_maps, floor_p=policy.floor_p)
    log_run_event(logger, "orbit_done", ifs=cf.spec.label, n=n, policy=policy.policy_id, seed=int(seed))
    return orbit


def orbit_tail(o: RandomOrbit, K: int, T: Optional[int] = None, dedup_delta: float = 0.0) -> FiniteSet:
    """
    The tail {x_K, ..., x_n} as a FiniteSet, optionally truncated to T points.

    Args:
        o: Orbit
        K: First index kept (0 <= K <= n)
        T: Keep at most T points starting at x_K
        dedup_delta: Resolution of the resulting set

    Returns:
        Deduplicated FiniteSet
    """
    if K < 0:
        raise UsageError("Tail start K must be non-negative")
    if K > o.n:
        raise UsageError(f"Tail start K={K} exceeds orbit length n={o.n}")
    if T is not None and T < 1:
        raise UsageError("Tail length T must be at least 1")
    stop = o.n + 1 if T is None else min(o.n + 1, K + T)
    return make_finite_set(o.space_tag, o.points[K:stop], dedup_delta)


def replay_orbit(F, o: RandomOrbit) -> Tuple[bool, Optional[int]]:
    """
    Re-apply the recorded sigmas with the vectorized map path.

    Returns:
        (True, None) if every points[k] equals f_{sigma_k}(points[k-1]) bit for
        bit, else (False, first offending k)
    """
    cf = compile_ifs(F)
    if o.space_tag != cf.spec.space_tag or o.points.shape[1] != cf.space.dim:
        raise UsageError("Orbit and IFS live on different spaces")
    if o.sigmas.size and (o.sigmas.min() < 1 or o.sigmas.max() > len(cf)):
        raise UsageError("Orbit sigmas refer to maps the IFS does not have")
    before, after = o.points[:-1], o.points[1:]
    bad = np.zeros(o.n, dtype=bool)
    for j, m in enumerate(cf.maps):
        mask = o.sigmas == j + 1
        if mask.any():
            bad[mask] = np.any(m.apply(before[mask]) != after[mask], axis=1)
    if bad.any():
        return False, int(np.argmax(bad)) + 1
    return True, None


def off_manifold(o: RandomOrbit) -> float:
    """Largest | |x| - 1 | over the orbit for circle and projective points, 0 otherwise."""
    if o.space_tag not in ("circle", "projective2"):
        return 0.0
    norms = np.sqrt((o.points * o.points).sum(axis=1))
    return float(np.abs(norms - 1.0).max())


# ============================================================================
# FLOOR DIAGNOSTICS
# ============================================================================

def empirical_floor(o: RandomOrbit, condition_window: int = 1, min_samples: int = 100) -> FloorReport:
    """
    Empirical conditional selection rates given the last `condition_window` sigmas.

    Each history class with at least min_samples successors is tested against
    the floor: its smallest rate must be >= floor_p - 3 * stderr, where stderr
    is the binomial standard error at floor_p. Sparser classes are reported
    as untestable.

    Args:
        o: Orbit with n >= 100 * N
        condition_window: History length, 0, 1 or 2
        min_samples: Minimum successors for a class to be tested

    Returns:
        FloorReport
    """
    n_maps = o.n_maps
    if not 0 <= condition_window <= 2:
        raise UsageError("condition_window must be 0, 1 or 2")
    if o.n < 100 * n_maps:
        raise DomainError(f"Floor check needs at least {100 * n_maps} steps, orbit has {o.n}")
    w = condition_window
    s = o.sigmas.astype(np.int64) - 1
    nxt = s[w:]
    history = np.zeros(nxt.size, dtype=np.int64)
    for i in range(w):
        history = history * n_maps + s[i:s.size - w + i]
    table = np.bincount(history * n_maps + nxt, minlength=n_maps ** (w + 1)).reshape(n_maps ** w, n_maps)

    p = o.floor_p
    rates, counts, untestable = {}, {}, []
    min_rate = float("inf")
    passed = True
    for code in range(n_maps ** w):
        cls = _decode_history(code, n_maps, w)
        total = int(table[code].sum())
        counts[cls] = total
        if total < min_samples:
            untestable.append(cls)
            continue
        row = (table[code] / total).tolist()
        rates[cls] = row
        stderr = float(np.sqrt(p * (1.0 - p) / total))
        low = min(row)
        min_rate = min(min_rate, low)
        if low < p - 3.0 * stderr:
            passed = False

    if not rates:
        min_rate = float("nan")
    report = FloorReport(floor_p=p, window=w, rates=rates, counts=counts,
                         untestable=untestable, min_rate=min_rate, passed=passed)
    if not passed:
        logger.warning(f"Empirical floor below p={p:g} for policy {o.policy_id} (min rate {min_rate:.4f})")
    return report


def _decode_history(code: int, n_maps: int, w: int) -> Tuple[int, ...]:
    digits = []
    for _ in range(w):
        digits.append(code % n_maps + 1)
        code //= n_maps
    return tuple(reversed(digits))
