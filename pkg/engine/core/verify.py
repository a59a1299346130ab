"""
Statistical verification of chaos-game convergence.

- convergence_report: seed panels of random orbits compared against a
  reference attractor over a ladder of tail starts K
- cover_bound: sampled certificate that every point near the attractor
  reaches it, in the Hausdorff sense, within a bounded number of steps
- upper_limit_equality: orbit tail against the truncated topological upper
  limit grown from the same starting point

"With probability one" is tested as a pass rate over independent seeds.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from config import IFS_PASS_THRESHOLD, IFS_THREADS
from core.chaos import off_manifold, orbit_tail, run_orbit
from core.deterministic import upper_limit
from core.grid import DedupIndex
from core.hausdorff import NearestIndex, directed, hausdorff_distance
from core.ifs import compile_ifs, hutchinson_step, make_finite_set, singleton
from errors import DomainError, UsageError
from models import (ConvergenceReport, CoverCertificate, CurvePoint, FiniteSet,
                    SeedOutcome, SelectionPolicy, SpacePoint)
from utils.logger import log_run_event, setup_logger
from utils.rng import derive_seeds, make_rng

logger = setup_logger(__name__)

ANALYTIC_REFERENCES = ("circle", "projective_line_x0", "point")


# ============================================================================
# REFERENCE SETS
# ============================================================================

def analytic_reference(name: str, count: int = 1000, coords: Sequence[float] = ()) -> FiniteSet:
    """
    Closed-form attractors used as A_ref.

    - circle: count equally spaced points of the unit circle
    - projective_line_x0: count equally spaced points of the line x=0 in RP^2
    - point: the single point `coords` in Euclidean space
    """
    if name == "circle":
        if count < 1:
            raise UsageError("Reference net needs at least one point")
        t = 2.0 * math.pi * np.arange(count) / count
        return make_finite_set("circle", np.column_stack([np.cos(t), np.sin(t)]))
    if name == "projective_line_x0":
        if count < 1:
            raise UsageError("Reference net needs at least one point")
        t = math.pi * np.arange(count) / count
        return make_finite_set("projective2", np.column_stack([np.zeros(count), np.cos(t), np.sin(t)]))
    if name == "point":
        if not coords:
            raise UsageError("Point reference needs coordinates")
        return make_finite_set("euclidean", [list(coords)])
    raise UsageError(f"Unknown analytic reference '{name}'")


# ============================================================================
# SEED ENSEMBLES
# ============================================================================

def run_ensemble(worker: Callable, jobs: List[tuple], threads: int = IFS_THREADS) -> list:
    """
    Evaluate worker(*job) for every job, in job order.

    Runs in a process pool of at most `threads` workers; one thread runs
    inline.
    """
    threads = max(1, min(int(threads), len(jobs)))
    if threads == 1:
        return [worker(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, *job) for job in jobs]
        return [f.result() for f in futures]


def _seed_outcome(F, x0: SpacePoint, policy: SelectionPolicy, epsilon: float, n: int, T: int,
                  ladder: Tuple[int, ...], A_ref: FiniteSet, seed: int) -> SeedOutcome:
    orbit = run_orbit(F, x0, policy, n, seed)
    curve = []
    for K in ladder:
        tail = orbit_tail(orbit, K, T)
        containment, _, _ = directed(tail, A_ref)
        covering, _, _ = directed(A_ref, tail)
        curve.append(CurvePoint(K=K, distance=max(containment, covering),
                                containment=containment, covering=covering))
    K_found = next((c.K for c in curve if c.distance < epsilon), None)
    violations = [] if K_found is None else [c.K for c in curve if c.K > K_found and c.distance >= epsilon]
    return SeedOutcome(seed=int(seed), curve=curve, K_found=K_found, passed=K_found is not None,
                       knee_violations=violations, off_manifold=off_manifold(orbit))


def convergence_report(F, x0: SpacePoint, policy: SelectionPolicy, epsilon: float, n: int,
                       T: Optional[int], seeds: int, A_ref: Optional[FiniteSet],
                       K_ladder: Optional[Sequence[int]] = None, base_seed: int = 0,
                       threshold: float = IFS_PASS_THRESHOLD, scene_id: str = "",
                       threads: int = IFS_THREADS) -> ConvergenceReport:
    """
    Run a seed panel and measure tails against A_ref.

    Each seed passes when some rung of the K ladder has d_H(A_ref, tail) < epsilon.
    Rungs past that point that climb back above epsilon are recorded as knee
    violations. The report curve is the per-K median over seeds.

    Args:
        F: IfsSpec
        x0: Starting point, declared to lie in the basin
        policy: Selection policy
        epsilon: Pass distance
        n: Orbit length
        T: Tail length (default n // 2)
        seeds: Number of independent seeds
        A_ref: Reference attractor
        K_ladder: Tail starts (default: powers of ten below n, capped at n - T)
        base_seed: Seed the ensemble is derived from
        threshold: Required pass fraction
        scene_id: Label carried into the report
        threads: Process pool size

    Returns:
        ConvergenceReport
    """
    if A_ref is None:
        raise UsageError("No reference attractor: run `ifs det` first or configure REFERENCE")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if seeds < 1:
        raise UsageError("At least one seed is required")
    T = max(1, n // 2) if T is None else int(T)
    if T < 1:
        raise UsageError("Tail length T must be at least 1")
    ladder = _ladder(n, T, K_ladder)

    child_seeds = derive_seeds(base_seed, seeds)
    jobs = [(F, x0, policy, epsilon, n, T, ladder, A_ref, s) for s in child_seeds]
    outcomes = run_ensemble(_seed_outcome, jobs, threads)

    curve = [(K, float(np.median([o.curve[i].distance for o in outcomes]))) for i, K in enumerate(ladder)]
    K_found = next((K for K, d in curve if d < epsilon), None)
    passed = sum(1 for o in outcomes if o.passed)
    report = ConvergenceReport(scene_id=scene_id, epsilon=epsilon, T=T, n=n, policy_id=policy.policy_id,
                               K_found=K_found, tail_distance_curve=curve, seeds_passed=passed,
                               seeds_total=len(outcomes), threshold=threshold, outcomes=outcomes)
    for o in outcomes:
        if o.knee_violations:
            logger.warning(f"Seed {o.seed}: tail distance climbed back above epsilon at K={o.knee_violations}")
    log_run_event(logger, "report_done", scene=scene_id, passed=passed, total=len(outcomes),
                  K_found=K_found, meets_threshold=report.meets_threshold)
    return report


def _ladder(n: int, T: int, K_ladder: Optional[Sequence[int]]) -> Tuple[int, ...]:
    if K_ladder:
        ladder = sorted({int(K) for K in K_ladder if 0 <= int(K) <= n})
        if not ladder:
            raise UsageError(f"No K in the ladder {list(K_ladder)} fits an orbit of length {n}")
        return tuple(ladder)
    top = max(0, n - T)
    ladder = [0]
    K = 10
    while K <= top:
        ladder.append(K)
        K *= 10
    if top not in ladder:
        ladder.append(top)
    return tuple(ladder)


# ============================================================================
# COVER CERTIFICATES
# ============================================================================

def _sample_candidates(space, A_ref: FiniteSet, epsilon: float, count: int, rng) -> np.ndarray:
    if space.tag == "euclidean":
        lo = A_ref.points.min(axis=0) - epsilon
        hi = A_ref.points.max(axis=0) + epsilon
        return lo + (hi - lo) * rng.random((count, space.dim))
    raw = rng.standard_normal((count, space.dim))
    norms = np.sqrt((raw * raw).sum(axis=1))
    return space.canonicalize_many(raw[norms > 1e-6])


def _reaches(cf, A_ref: FiniteSet, x: np.ndarray, epsilon: float, m_cap: int, dedup_delta: float) -> Optional[int]:
    B = make_finite_set(A_ref.space_tag, x.reshape(1, -1), dedup_delta)
    for m in range(m_cap + 1):
        if directed(B, A_ref)[0] < epsilon / 2 and directed(A_ref, B)[0] < epsilon / 2:
            return m
        if m < m_cap:
            B = hutchinson_step(cf, B)
    return None


def cover_bound(F, A_ref: FiniteSet, epsilon: float, net_delta: float, m_cap: int,
                samples: int = 400, seed: int = 0, dedup_delta: Optional[float] = None) -> CoverCertificate:
    """
    Sample A_ref + epsilon and record how many Hutchinson steps each sample needs.

    Candidates are drawn from a bounding region (a box around A_ref in
    Euclidean space, the whole manifold otherwise), kept when they lie
    strictly within epsilon of A_ref and thinned to a net_delta net. For
    every net point x the smallest m <= m_cap with
    d_H(A_ref, F^m({x})) < epsilon/2 is recorded.

    Args:
        F: IfsSpec
        A_ref: Reference attractor
        epsilon: Dilation radius
        net_delta: Net resolution, below epsilon/4
        m_cap: Step budget per sample
        samples: Net size to aim for
        seed: Sampling seed
        dedup_delta: Resolution of the iterated sets (default epsilon/20)

    Returns:
        CoverCertificate; samples that exhaust m_cap are listed as failures
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if not 0 < net_delta < epsilon / 4:
        raise UsageError(f"net_delta={net_delta} must lie in (0, epsilon/4)")
    if m_cap < 1:
        raise UsageError("m_cap must be at least 1")
    cf = compile_ifs(F)
    if A_ref.space_tag != cf.spec.space_tag:
        raise UsageError("Reference and IFS live on different spaces")
    delta = epsilon / 20.0 if dedup_delta is None else dedup_delta
    space = cf.space
    rng = make_rng(seed)

    index = DedupIndex(space, net_delta)
    reference = NearestIndex(space, A_ref.points)
    net = []
    for _ in range(64):
        candidates = _sample_candidates(space, A_ref, epsilon, 4096, rng)
        near, _ = reference.query(candidates)
        inside = candidates[near < epsilon]
        net.extend(inside[index.add(inside)])
        if len(net) >= samples:
            break
    net = net[:samples]

    recorded, failures = [], []
    for x in net:
        m = _reaches(cf, A_ref, x, epsilon, m_cap, delta)
        if m is None:
            failures.append(tuple(x.tolist()))
        else:
            recorded.append((tuple(x.tolist()), m))
    M = 1 + max((m for _, m in recorded), default=0)
    cert = CoverCertificate(epsilon=epsilon, samples=recorded, M=M, failures=failures,
                            m_cap=m_cap, dedup_delta=delta)
    if failures:
        logger.warning(f"Cover certificate incomplete: {len(failures)} of {len(net)} samples exceeded m_cap={m_cap}")
    log_run_event(logger, "certificate_done", samples=len(recorded), failures=len(failures), M=M, epsilon=epsilon)
    return cert


def replay_certificate(F, A_ref: FiniteSet, cert: CoverCertificate) -> bool:
    """Re-verify d_H(A_ref, F^m({x})) < epsilon/2 for every recorded (x, m)."""
    cf = compile_ifs(F)
    for x, m in cert.samples:
        B = make_finite_set(A_ref.space_tag, [list(x)], cert.dedup_delta)
        for _ in range(m):
            B = hutchinson_step(cf, B)
        if not hausdorff_distance(A_ref, B).value < cert.epsilon / 2:
            logger.warning(f"Certificate sample {x} failed replay at m={m}")
            return False
    return True


# ============================================================================
# UPPER LIMIT VERSUS ORBIT
# ============================================================================

def upper_limit_equality(F, x0: SpacePoint, policy: SelectionPolicy, n: int, K: int, k_max: int,
                         seed: int = 0, T: Optional[int] = None, dedup_delta: float = 0.0,
                         tail_K: Optional[int] = None) -> float:
    """
    d_H between an orbit tail and the truncated upper limit of F^k({x0}).

    Args:
        F: IfsSpec
        x0: Starting point; the deterministic side starts from {x0}
        policy: Selection policy of the orbit
        n: Orbit length
        K, k_max: Truncation of the union over k >= K of F^k({x0})
        seed: Orbit seed
        T: Tail length (default: to the end of the orbit)
        dedup_delta: Resolution of the deterministic side
        tail_K: First orbit index of the tail (default min(K, n))

    Returns:
        Hausdorff distance between the two sides
    """
    orbit = run_orbit(F, x0, policy, n, seed)
    tail = orbit_tail(orbit, min(K, n) if tail_K is None else tail_K, T)
    limit = upper_limit(F, singleton(x0, dedup_delta), K, k_max, dedup_delta)
    value = hausdorff_distance(tail, limit).value
    log_run_event(logger, "upper_limit_equality", n=n, K=K, k_max=k_max, value=value)
    return value
