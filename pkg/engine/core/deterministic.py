"""
The deterministic algorithm.

Iterates the Hutchinson map until successive iterates stop moving in the
Hausdorff metric, and approximates the topological upper limit
intersection over K of closure(union over k >= K of F^k(B)) by truncated
tail unions.
"""

from typing import List, Optional, Sequence, Tuple

from config import IFS_WINDOW
from core.hausdorff import hausdorff_distance
from core.ifs import compile_ifs, hutchinson_step, make_finite_set, union
from errors import DomainError, UsageError
from models import AttractorApprox, FiniteSet
from utils.logger import log_run_event, setup_logger
from utils.rng import make_rng

logger = setup_logger(__name__)

# A step counts toward the window only when its gap is below tol * STOP_FRACTION
STOP_FRACTION = 0.5


def _with_delta(B: FiniteSet, delta: float) -> FiniteSet:
    if delta == B.dedup_delta:
        return B
    return make_finite_set(B.space_tag, B.points, delta)


def deterministic_attractor(F, B0: FiniteSet, tol: float, max_iter: int = 200,
                            window: int = IFS_WINDOW, dedup_delta: Optional[float] = None,
                            mode: str = "accelerated") -> AttractorApprox:
    """
    Iterate B <- F(B) until the Cauchy gap d_H(F^k B, F^(k+1) B) stays below
    tol * STOP_FRACTION for `window` consecutive steps.

    Under isometric maps each new point lands at about the spacing of the
    current net, so gaps just under tol still leave holes wider than tol.
    The margin makes a converged set a tol-net of what the iteration fills.

    A small gap certifies numerical stabilization only; a run that exhausts
    max_iter is returned with converged=False.

    Args:
        F: IfsSpec or CompiledIfs
        B0: Nonempty starting set, assumed to lie in the basin
        tol: Gap tolerance
        max_iter: Iteration budget
        window: Consecutive sub-tolerance gaps required
        dedup_delta: Set resolution (default: B0's, or tol/4 when B0 has none)
        mode: Hausdorff evaluation mode

    Returns:
        AttractorApprox holding the last iterate and the per-step trace
    """
    if len(B0) == 0:
        raise DomainError("Starting set must be nonempty")
    if not tol > 0:
        raise DomainError("Tolerance must be positive")
    if window < 1:
        raise UsageError("Window must be at least 1")
    cf = compile_ifs(F)
    if dedup_delta is None:
        dedup_delta = B0.dedup_delta if B0.dedup_delta > 0 else tol / 4.0
    current = _with_delta(B0, dedup_delta)

    trace: List[Tuple[int, int, float]] = []
    streak = 0
    gap = float("inf")
    converged = False
    k = 0
    for k in range(1, max_iter + 1):
        nxt = hutchinson_step(cf, current)
        gap = hausdorff_distance(current, nxt, mode).value
        trace.append((k, len(nxt), gap))
        current = nxt
        streak = streak + 1 if gap < tol * STOP_FRACTION else 0
        if streak >= window:
            converged = True
            break

    if not converged:
        logger.warning(f"Deterministic iteration did not stabilize: gap={gap:.6g} after {k} steps (tol={tol})")
    log_run_event(logger, "attractor_done", ifs=cf.spec.label, iters=k, size=len(current),
                  gap=gap, converged=converged)
    return AttractorApprox(points=current, tol=tol, iters_used=k, cauchy_gap=gap,
                           converged=converged, trace=trace)


def upper_limit(F, B0: FiniteSet, K: int, k_max: int, dedup_delta: Optional[float] = None) -> FiniteSet:
    """
    Truncated tail union: dedup of F^K(B0) u ... u F^k_max(B0).

    The intersection over K is left to the caller, who compares successive
    truncations (see upper_limit_stabilization).
    """
    if K < 0 or k_max < 0:
        raise UsageError("K and k_max must be non-negative")
    if K > k_max:
        raise UsageError(f"K={K} exceeds k_max={k_max}")
    if len(B0) == 0:
        raise DomainError("Starting set must be nonempty")
    cf = compile_ifs(F)
    delta = B0.dedup_delta if dedup_delta is None else dedup_delta
    current = _with_delta(B0, delta)
    levels = []
    for k in range(k_max + 1):
        if k >= K:
            levels.append(current)
        if k < k_max:
            current = hutchinson_step(cf, current)
    return union(levels, delta)


def upper_limit_stabilization(F, B0: FiniteSet, K_values: Sequence[int], k_max: int,
                              dedup_delta: Optional[float] = None) -> List[Tuple[int, float]]:
    """
    Hausdorff distance between the truncations at successive K values.

    Returns:
        [(K_i, d_H(U(K_{i-1}), U(K_i))) for i >= 1]
    """
    K_values = sorted(K_values)
    unions = [upper_limit(F, B0, K, k_max, dedup_delta) for K in K_values]
    return [(K_values[i], hausdorff_distance(unions[i - 1], unions[i]).value)
            for i in range(1, len(unions))]


def self_map_gap(F, A: FiniteSet) -> float:
    """d_H(F(A), A): how far A is from being invariant."""
    return hausdorff_distance(hutchinson_step(F, A), A).value


def contraction_ratio(F, B: FiniteSet, samples: int = 256, seed: int = 0) -> List[float]:
    """
    Largest observed ratio d(f x, f y) / d(x, y) per map over random pairs of B.

    A sanity check for contractivity; values >= 1 mean no contraction was seen.
    """
    cf = compile_ifs(F)
    if len(B) < 2:
        return [float("nan")] * len(cf)
    rng = make_rng(seed)
    i = rng.integers(0, len(B), samples)
    j = rng.integers(0, len(B), samples)
    keep = i != j
    x, y = B.points[i[keep]], B.points[j[keep]]
    base = cf.space.rowwise(x, y)
    ok = base > 0
    ratios = []
    for m in cf.maps:
        moved = cf.space.rowwise(m.apply(x[ok]), m.apply(y[ok]))
        ratios.append(float((moved / base[ok]).max()) if ok.any() else float("nan"))
    return ratios
