"""
Superfractals: IFSs whose points are compact sets.

Each lifted map is the Hutchinson set map of a sub-IFS acting on H(X).
Ensembles of sets (points of H(H(X))) are compared with the
Hausdorff-Hausdorff metric, where the ground distance between two member
sets is their Hausdorff distance.

Two resolutions are in play: every member FiniteSet is deduplicated at its
own inner delta, and ensembles keep no two members within delta2/2 of
each other.
"""

from typing import List, Sequence, Tuple

import numpy as np

from config import IFS_INNER_CAP
from core.chaos import Selector, validate_policy
from core.hausdorff import hausdorff_distance
from core.ifs import compile_ifs, hutchinson_step, make_finite_set
from errors import DomainError, UsageError
from models import FiniteSet, IfsSpec, LiftedOrbit, MapSpec, SelectionPolicy, SetEnsemble
from utils.logger import log_run_event, setup_logger

logger = setup_logger(__name__)

# Starting inner resolution when an uncapped set first overflows
BASE_INNER_DELTA = 1e-6


def _check_sub_ifs(sub_ifs: Sequence) -> list:
    if not sub_ifs:
        raise UsageError("A superfractal needs at least one sub-IFS")
    compiled = [compile_ifs(F) for F in sub_ifs]
    tags = {(cf.spec.space_tag, cf.space.dim) for cf in compiled}
    if len(tags) != 1:
        raise UsageError(f"Sub-IFSs must share one ground space, got {sorted(tags)}")
    return compiled


def lifted_system(sub_ifs: Sequence) -> IfsSpec:
    """
    The superfractal as an IFS on the hyperspace: lifted map i is the
    Hutchinson set map of sub_ifs[ifs_id].
    """
    compiled = _check_sub_ifs(sub_ifs)
    maps = tuple(MapSpec("lifted", ifs_id=i) for i in range(len(compiled)))
    return IfsSpec("hyperspace", maps, label="superfractal", dim=compiled[0].space.dim)


def cap_inner(S: FiniteSet, inner_cap: int = IFS_INNER_CAP) -> FiniteSet:
    """
    Enforce the inner size cap by doubling dedup_delta until S fits.

    The returned set's dedup_delta records the resolution actually used.
    """
    if len(S) <= inner_cap:
        return S
    delta = S.dedup_delta if S.dedup_delta > 0 else BASE_INNER_DELTA
    current = S
    while len(current) > inner_cap:
        delta *= 2.0
        current = make_finite_set(S.space_tag, S.points, delta)
    logger.debug(f"inner cap {inner_cap}: escalated delta {S.dedup_delta:g} -> {delta:g}, size {len(S)} -> {len(current)}")
    return current


def lifted_apply(sub_ifs, S: FiniteSet, inner_cap: int = IFS_INNER_CAP) -> FiniteSet:
    """
    One lifted map: the sub-IFS's Hutchinson step applied to the set S.

    Args:
        sub_ifs: IfsSpec or CompiledIfs on S's ground space
        S: Nonempty FiniteSet
        inner_cap: Largest member size kept before delta escalation

    Returns:
        F_sub(S), deduplicated at S.dedup_delta or coarser when capped
    """
    cf = compile_ifs(sub_ifs)
    if S.space_tag != cf.spec.space_tag:
        raise UsageError(f"Set on '{S.space_tag}' used with a sub-IFS on '{cf.spec.space_tag}'")
    return cap_inner(hutchinson_step(cf, S), inner_cap)


# ============================================================================
# HAUSDORFF-HAUSDORFF METRIC
# ============================================================================

def _boxes(members: Sequence[FiniteSet]) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.array([m.points.min(axis=0) for m in members])
    hi = np.array([m.points.max(axis=0) for m in members])
    return lo, hi


def _lower_bounds(lo_a, hi_a, lo_b, hi_b) -> np.ndarray:
    # coordinate projections are 1-Lipschitz, so extreme coordinates bound d_H from below
    gap = np.maximum(np.abs(lo_a[:, None, :] - lo_b[None, :, :]), np.abs(hi_a[:, None, :] - hi_b[None, :, :]))
    return gap.max(axis=2)


def _uses_boxes(members: Sequence[FiniteSet]) -> bool:
    return members[0].space_tag == "euclidean"


def _directed_hh(A: Sequence[FiniteSet], B: Sequence[FiniteSet]) -> float:
    """max over a in A of min over b in B of d_H(a, b), with lower-bound pruning."""
    if _uses_boxes(A):
        bounds = _lower_bounds(*_boxes(A), *_boxes(B))
    else:
        bounds = np.zeros((len(A), len(B)))
    worst = 0.0
    for i, a in enumerate(A):
        best = np.inf
        for j in np.argsort(bounds[i], kind="stable"):
            if bounds[i, j] >= best or best <= worst:
                break
            best = min(best, hausdorff_distance(a, B[j]).value)
        worst = max(worst, best)
    return float(worst)


def _check_ensembles(A: SetEnsemble, B: SetEnsemble) -> None:
    if len(A) == 0 or len(B) == 0:
        raise DomainError("Hausdorff-Hausdorff distance needs nonempty ensembles")
    tags = {(m.space_tag, m.dim) for m in list(A.members) + list(B.members)}
    if len(tags) != 1:
        raise UsageError(f"Ensembles mix ground spaces: {sorted(tags)}")


def hh_distance(A: SetEnsemble, B: SetEnsemble) -> float:
    """
    Hausdorff distance on H(H(X)) with Hausdorff distance as the ground metric.

    Args:
        A: Nonempty SetEnsemble
        B: Nonempty SetEnsemble on the same ground space

    Returns:
        max of the two directed max-min distances
    """
    _check_ensembles(A, B)
    if len(A) == 1 and len(B) == 1:
        return hausdorff_distance(A.members[0], B.members[0]).value
    return max(_directed_hh(A.members, B.members), _directed_hh(B.members, A.members))


def make_ensemble(sets: Sequence[FiniteSet], delta2: float = 0.0) -> SetEnsemble:
    """
    First-come deduplication of sets at outer resolution delta2.

    A set is dropped when a kept member lies strictly within delta2/2 of it.
    """
    sets = list(sets)
    if not sets:
        raise DomainError("An ensemble must have at least one member")
    if delta2 < 0:
        raise DomainError("delta2 must be non-negative")
    if delta2 == 0:
        return SetEnsemble(members=sets, delta2=0.0)
    kept: List[FiniteSet] = []
    lows, highs = [], []
    boxes = _uses_boxes(sets)
    radius = delta2 / 2.0
    for S in sets:
        if boxes:
            lo, hi = S.points.min(axis=0), S.points.max(axis=0)
        duplicate = False
        if kept:
            if boxes:
                bound = np.maximum(np.abs(np.array(lows) - lo), np.abs(np.array(highs) - hi)).max(axis=1)
                candidates = np.flatnonzero(bound < radius)
            else:
                candidates = range(len(kept))
            for j in candidates:
                if hausdorff_distance(S, kept[j]).value < radius:
                    duplicate = True
                    break
        if not duplicate:
            kept.append(S)
            if boxes:
                lows.append(lo)
                highs.append(hi)
    return SetEnsemble(members=kept, delta2=float(delta2))


# ============================================================================
# LIFTED ITERATION
# ============================================================================

def lifted_chaos_orbit(sub_ifs: Sequence, S0: FiniteSet, policy: SelectionPolicy, n: int, seed: int,
                       inner_cap: int = IFS_INNER_CAP) -> LiftedOrbit:
    """
    The chaos game on H(X): S_k = F_{sigma_k}(S_{k-1}).

    Selection follows the same draw contract as point orbits. The adversarial
    policy is defined against a point target and is not available here.

    Args:
        sub_ifs: Sub-IFSs sharing one ground space
        S0: Nonempty starting set
        policy: uniform_iid or markov policy for len(sub_ifs) maps
        n: Number of steps
        seed: Generator seed
        inner_cap: Member size cap

    Returns:
        LiftedOrbit with n+1 sets
    """
    if n < 1:
        raise UsageError("Orbit length n must be at least 1")
    if len(S0) == 0:
        raise DomainError("Starting set must be nonempty")
    compiled = _check_sub_ifs(sub_ifs)
    if policy.kind == "adversarial_floor":
        raise UsageError("The adversarial policy is not defined on the hyperspace")
    system = lifted_system(compiled)
    validate_policy(policy, system.n_maps)
    if S0.space_tag != compiled[0].spec.space_tag:
        raise UsageError(f"Starting set on '{S0.space_tag}' used with sub-IFSs on '{compiled[0].spec.space_tag}'")

    schedule = Selector(policy, system.n_maps, n, seed).schedule()
    sets = [S0]
    sigmas = np.empty(n, dtype=np.int64)
    escalations = 0
    for k, m in enumerate(schedule):
        image = hutchinson_step(compiled[system.maps[m].ifs_id], sets[-1])
        capped = cap_inner(image, inner_cap)
        if capped is not image:
            escalations += 1
        sets.append(capped)
        sigmas[k] = m + 1

    max_delta = max(S.dedup_delta for S in sets)
    if escalations:
        logger.warning(f"Inner cap {inner_cap} forced {escalations} delta escalations (max delta {max_delta:g})")
    log_run_event(logger, "lifted_orbit_done", n=n, seed=int(seed), policy=policy.policy_id,
                  escalations=escalations)
    return LiftedOrbit(sets=sets, sigmas=sigmas, seed=int(seed), policy_id=policy.policy_id,
                       escalations=escalations, max_inner_delta=float(max_delta))


def lifted_tail(o: LiftedOrbit, K: int, delta2: float) -> SetEnsemble:
    """Members S_K..S_n of a lifted orbit as an ensemble deduplicated at delta2."""
    n = len(o.sets) - 1
    if not 0 <= K <= n:
        raise UsageError(f"Tail start K={K} outside 0..{n}")
    return make_ensemble(o.sets[K:], delta2)


def lifted_deterministic(sub_ifs: Sequence, S0: FiniteSet, depth: int, delta2: float,
                         inner_cap: int = IFS_INNER_CAP) -> SetEnsemble:
    """
    Deterministic lifted reference: the ensemble F^depth({S0}) on H(H(X)).

    Each level applies every lifted map to every member and deduplicates the
    result at delta2.
    """
    if depth < 0:
        raise UsageError("depth must be non-negative")
    compiled = _check_sub_ifs(sub_ifs)
    system = lifted_system(compiled)
    level = make_ensemble([S0], delta2)
    for d in range(depth):
        images = [lifted_apply(compiled[m.ifs_id], S, inner_cap) for S in level.members for m in system.maps]
        level = make_ensemble(images, delta2)
        logger.debug(f"lifted level {d + 1}: {len(level)} members")
    log_run_event(logger, "lifted_reference_done", depth=depth, members=len(level), delta2=delta2)
    return level


def lifted_seed_distance(sub_ifs: Sequence, S0: FiniteSet, policy: SelectionPolicy, n: int, K: int,
                         delta2: float, reference: SetEnsemble, seed: int,
                         inner_cap: int = IFS_INNER_CAP) -> Tuple[float, int, float]:
    """
    hh_distance between one seed's lifted tail and a reference ensemble.

    Returns:
        (distance, inner escalations, largest inner delta)
    """
    orbit = lifted_chaos_orbit(sub_ifs, S0, policy, n, seed, inner_cap)
    distance = hh_distance(lifted_tail(orbit, K, delta2), reference)
    return distance, orbit.escalations, orbit.max_inner_delta
