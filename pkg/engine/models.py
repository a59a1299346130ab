"""
Domain models for the IFS engine.

Plain dataclasses describing points, maps, systems, finite set
approximations, orbits and the reports built from them. Behaviour lives
in the core package; every model here knows how to serialize itself
with to_dict().
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class SpacePoint:
    """
    A point of one ground space.

    - space_tag is one of euclidean, circle, projective2.
    - coords has length n (euclidean), 2 (circle) or 3 (homogeneous, projective2).
    """
    space_tag: str
    coords: Tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def to_dict(self):
        return {'space_tag': self.space_tag, 'coords': list(self.coords)}


@dataclass(frozen=True)
class MapSpec:
    """
    One continuous map of an IFS.

    - kind: identity | affine | rotation2 | projective3x3 | lifted
    - matrix/offset for affine, matrix for projective3x3, alpha (radians) for rotation2,
      ifs_id (index into the sub-IFS list) for lifted maps.
    """
    kind: str
    matrix: Optional[Tuple[Tuple[float, ...], ...]] = None
    offset: Optional[Tuple[float, ...]] = None
    alpha: Optional[float] = None
    ifs_id: Optional[int] = None

    def to_dict(self):
        result = {'kind': self.kind}
        if self.matrix is not None:
            result['matrix'] = [list(row) for row in self.matrix]
        if self.offset is not None:
            result['offset'] = list(self.offset)
        if self.alpha is not None:
            result['alpha'] = self.alpha
        if self.ifs_id is not None:
            result['ifs_id'] = self.ifs_id
        return result


@dataclass(frozen=True)
class IfsSpec:
    """
    An iterated function system F = (X; f_1, ..., f_N).

    dim is the coordinate length of points of the ground space.
    """
    space_tag: str
    maps: Tuple[MapSpec, ...]
    label: str = "ifs"
    dim: int = 2

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    def to_dict(self):
        return {
            'space_tag': self.space_tag,
            'dim': self.dim,
            'label': self.label,
            'maps': [m.to_dict() for m in self.maps],
        }


@dataclass
class FiniteSet:
    """
    A finite point set standing in for a nonempty compact set.

    points is a (k, dim) float64 array of canonical coordinates, already
    deduplicated at dedup_delta.
    """
    space_tag: str
    points: np.ndarray
    dedup_delta: float = 0.0

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def to_dict(self, include_points: bool = False):
        result = {
            'space_tag': self.space_tag,
            'dim': self.dim,
            'size': len(self),
            'dedup_delta': self.dedup_delta,
        }
        if include_points:
            result['points'] = self.points.tolist()
        return result


@dataclass(frozen=True)
class DistanceResult:
    """Hausdorff distance with the point pairs realizing each directed part."""
    value: float
    forward: float
    backward: float
    witness_b_to_c: Tuple[Tuple[float, ...], Tuple[float, ...]]
    witness_c_to_b: Tuple[Tuple[float, ...], Tuple[float, ...]]

    def to_dict(self):
        return {
            'value': self.value,
            'forward': self.forward,
            'backward': self.backward,
            'witness_b_to_c': [list(p) for p in self.witness_b_to_c],
            'witness_c_to_b': [list(p) for p in self.witness_c_to_b],
        }


@dataclass
class AttractorApprox:
    points: FiniteSet
    tol: float
    iters_used: int
    cauchy_gap: float
    converged: bool
    trace: List[Tuple[int, int, float]] = field(default_factory=list)

    def to_dict(self):
        return {
            'tol': self.tol,
            'iters_used': self.iters_used,
            'cauchy_gap': self.cauchy_gap,
            'converged': self.converged,
            'points': self.points.to_dict(),
        }


@dataclass(frozen=True)
class SelectionPolicy:
    """
    How map indices are drawn for a random orbit.

    - kind: uniform_iid | markov | adversarial_floor
    - floor_p: guaranteed lower bound on every conditional probability
    - matrix: N x N row-stochastic matrix (markov only)
    - target: FiniteSet the adversary tries to escape from (adversarial_floor only)
    """
    kind: str
    floor_p: float
    matrix: Optional[Tuple[Tuple[float, ...], ...]] = None
    target: Optional[FiniteSet] = field(default=None, compare=False, hash=False)

    @property
    def policy_id(self) -> str:
        if self.kind == "markov":
            rows = "/".join(",".join(f"{v:g}" for v in row) for row in self.matrix)
            return f"markov[{rows}]"
        return f"{self.kind}(p={self.floor_p:g})"

    def to_dict(self):
        result = {'kind': self.kind, 'floor_p': self.floor_p, 'id': self.policy_id}
        if self.matrix is not None:
            result['matrix'] = [list(row) for row in self.matrix]
        if self.target is not None:
            result['target_size'] = len(self.target)
        return result


@dataclass
class RandomOrbit:
    """
    A realized random orbit.

    points[k] = f_{sigmas[k-1]}(points[k-1]); sigmas are 1-based map indices.
    """
    space_tag: str
    x0: SpacePoint
    points: np.ndarray
    sigmas: np.ndarray
    seed: int
    policy_id: str
    n_maps: int = 1
    floor_p: float = 1.0

    @property
    def n(self) -> int:
        return int(self.sigmas.shape[0])

    def to_dict(self):
        return {
            'space_tag': self.space_tag,
            'x0': self.x0.to_dict(),
            'n': self.n,
            'seed': self.seed,
            'policy': self.policy_id,
            'n_maps': self.n_maps,
            'floor_p': self.floor_p,
        }


@dataclass
class FloorReport:
    """Empirical conditional selection rates per recent-history class."""
    floor_p: float
    window: int
    rates: Dict[Tuple[int, ...], List[float]]
    counts: Dict[Tuple[int, ...], int]
    untestable: List[Tuple[int, ...]]
    min_rate: float
    passed: bool

    def to_dict(self):
        return {
            'floor_p': self.floor_p,
            'window': self.window,
            'rates': {",".join(map(str, k)) or "-": v for k, v in self.rates.items()},
            'counts': {",".join(map(str, k)) or "-": v for k, v in self.counts.items()},
            'untestable': [",".join(map(str, k)) for k in self.untestable],
            'min_rate': self.min_rate,
            'passed': self.passed,
        }


@dataclass
class CurvePoint:
    """One rung of the K ladder: the tail starting at K and its distances to A_ref."""
    K: int
    distance: float
    containment: float
    covering: float

    def to_dict(self):
        return {'K': self.K, 'distance': self.distance,
                'containment': self.containment, 'covering': self.covering}


@dataclass
class SeedOutcome:
    seed: int
    curve: List[CurvePoint]
    K_found: Optional[int]
    passed: bool
    knee_violations: List[int] = field(default_factory=list)
    off_manifold: float = 0.0

    def to_dict(self):
        return {
            'seed': self.seed,
            'K_found': self.K_found,
            'passed': self.passed,
            'knee_violations': self.knee_violations,
            'off_manifold': self.off_manifold,
            'curve': [c.to_dict() for c in self.curve],
        }


@dataclass
class ConvergenceReport:
    scene_id: str
    epsilon: float
    T: int
    n: int
    policy_id: str
    K_found: Optional[int]
    tail_distance_curve: List[Tuple[int, float]]
    seeds_passed: int
    seeds_total: int
    threshold: float
    outcomes: List[SeedOutcome] = field(default_factory=list)
    upper_limit_equality: Optional[float] = None

    @property
    def meets_threshold(self) -> bool:
        return self.seeds_total > 0 and self.seeds_passed >= self.threshold * self.seeds_total - 1e-12

    def to_dict(self):
        return {
            'scene_id': self.scene_id,
            'epsilon': self.epsilon,
            'T': self.T,
            'n': self.n,
            'policy': self.policy_id,
            'K_found': self.K_found,
            'tail_distance_curve': [[k, d] for k, d in self.tail_distance_curve],
            'seeds_passed': self.seeds_passed,
            'seeds_total': self.seeds_total,
            'threshold': self.threshold,
            'meets_threshold': self.meets_threshold,
            'upper_limit_equality': self.upper_limit_equality,
            'outcomes': [o.to_dict() for o in self.outcomes],
        }


@dataclass
class CoverCertificate:
    """Sampled evidence for a uniform bound M(eps) on the steps needed to reach A_ref."""
    epsilon: float
    samples: List[Tuple[Tuple[float, ...], int]]
    M: int
    failures: List[Tuple[float, ...]]
    m_cap: int
    dedup_delta: float = 0.0

    @property
    def complete(self) -> bool:
        return not self.failures

    def to_dict(self):
        return {
            'epsilon': self.epsilon,
            'M': self.M,
            'm_cap': self.m_cap,
            'dedup_delta': self.dedup_delta,
            'complete': self.complete,
            'samples': [[list(x), m] for x, m in self.samples],
            'failures': [list(x) for x in self.failures],
        }


@dataclass
class SetEnsemble:
    """A finite collection of compact sets; members pairwise farther than delta2/2 apart."""
    members: List[FiniteSet]
    delta2: float = 0.0

    def __len__(self) -> int:
        return len(self.members)

    def to_dict(self):
        return {
            'delta2': self.delta2,
            'size': len(self.members),
            'member_sizes': [len(m) for m in self.members],
        }


@dataclass
class LiftedOrbit:
    """A chaos-game orbit on the hyperspace: one compact set per step."""
    sets: List[FiniteSet]
    sigmas: np.ndarray
    seed: int
    policy_id: str
    escalations: int = 0
    max_inner_delta: float = 0.0

    def to_dict(self):
        return {
            'n': int(self.sigmas.shape[0]),
            'seed': self.seed,
            'policy': self.policy_id,
            'escalations': self.escalations,
            'max_inner_delta': self.max_inner_delta,
        }


@dataclass(frozen=True)
class RenderSpec:
    """
    How a point set becomes a PPM image.

    viewport is (xmin, xmax, ymin, ymax) in chart coordinates; chart picks the
    affine chart (x, y or z = 1) for projective2 sets.
    """
    width: int = 512
    height: int = 512
    viewport: Tuple[float, float, float, float] = (-1.2, 1.2, -1.2, 1.2)
    background: int = 0
    foreground: int = 255
    radius: int = 0
    chart: str = "z"

    def to_dict(self):
        return {
            'width': self.width, 'height': self.height,
            'viewport': list(self.viewport),
            'background': self.background, 'foreground': self.foreground,
            'radius': self.radius, 'chart': self.chart,
        }


@dataclass(frozen=True)
class ReferenceSpec:
    """Where A_ref comes from: analytic:<name>, deterministic, or file:<path>."""
    kind: str
    name: str = ""
    count: int = 1000
    path: str = ""
    coords: Tuple[float, ...] = ()

    def to_dict(self):
        return {'kind': self.kind, 'name': self.name, 'count': self.count,
                'path': self.path, 'coords': list(self.coords)}


@dataclass(frozen=True)
class Budgets:
    n: int = 100_000
    # None means n // 2; load_scene resolves it
    T: Optional[int] = None
    K_ladder: Tuple[int, ...] = ()
    seeds: int = 20
    seed: int = 0
    tol: float = 1e-2
    epsilon: float = 2e-2
    dedup_delta: float = 2.5e-3
    max_iter: int = 200
    window: int = 5
    m_cap: int = 10_000
    cover_epsilon: float = 0.1
    net_delta: float = 0.02
    cover_samples: int = 400
    upper_K: int = 10
    upper_k_max: int = 20
    threshold: float = 0.95
    delta2: float = 0.01
    inner_cap: int = 4096
    lifted_depth: int = 12

    def to_dict(self):
        return {key: (list(value) if isinstance(value, tuple) else value)
                for key, value in self.__dict__.items()}


@dataclass(frozen=True)
class SceneConfig:
    """A fully validated scene file."""
    version: int
    label: str
    ifs: Optional[IfsSpec]
    sub_ifs: Tuple[IfsSpec, ...]
    x0: SpacePoint
    policy: SelectionPolicy
    budgets: Budgets
    reference: ReferenceSpec
    render: RenderSpec
    out_dir: str
    path: str = ""

    @property
    def is_superfractal(self) -> bool:
        return bool(self.sub_ifs)

    def to_dict(self):
        return {
            'version': self.version,
            'label': self.label,
            'ifs': self.ifs.to_dict() if self.ifs else None,
            'sub_ifs': [s.to_dict() for s in self.sub_ifs],
            'x0': self.x0.to_dict(),
            'policy': self.policy.to_dict(),
            'budgets': self.budgets.to_dict(),
            'reference': self.reference.to_dict(),
            'render': self.render.to_dict(),
            'out_dir': self.out_dir,
        }
