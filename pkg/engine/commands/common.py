"""
Shared helpers for subcommands: scene loading, artifact locations and
reference resolution.
"""

from dataclasses import replace
from pathlib import Path
from typing import Optional

from core.ifs import ifs_hash
from core.verify import analytic_reference
from errors import MissingArtifactError, UsageError
from models import FiniteSet, SceneConfig, SelectionPolicy
from utils.artifacts import artifact_dir, read_points
from utils.scene import load_scene


def scene_dir(scene: SceneConfig, out: Optional[str]) -> Path:
    """<out or scene OUT>/<label>, created on demand."""
    return artifact_dir(out or scene.out_dir, scene.label)


def load_point_scene(path: str) -> SceneConfig:
    """Load a scene that declares a single IFS (MAP_i keys)."""
    scene = load_scene(path)
    if scene.ifs is None:
        raise UsageError(f"Scene {scene.label} declares sub-IFSs; use `ifs superfractal`")
    return scene


def base_seed(scene: SceneConfig, seed: Optional[int]) -> int:
    return scene.budgets.seed if seed is None else int(seed)


def resolve_reference(scene: SceneConfig, out: Optional[str]) -> FiniteSet:
    """
    A_ref for a scene.

    Raises:
        MissingArtifactError: REFERENCE=deterministic before `ifs det` has run
    """
    ref = scene.reference
    if ref.kind == "analytic":
        A_ref = analytic_reference(ref.name, ref.count, ref.coords)
    elif ref.kind == "deterministic":
        path = scene_dir(scene, out) / "attractor"
        A_ref = read_points(path, missing_hint=f"run `ifs det --scene {scene.path}` first")
    elif ref.kind == "file":
        A_ref = read_points(ref.path)
    else:
        raise MissingArtifactError(f"Scene {scene.label} has no usable REFERENCE")
    if A_ref.space_tag != scene.x0.space_tag or A_ref.dim != len(scene.x0.coords):
        raise UsageError(f"Reference lives on '{A_ref.space_tag}' (dim {A_ref.dim}), "
                         f"scene on '{scene.x0.space_tag}' (dim {len(scene.x0.coords)})")
    return A_ref


def scene_policy(scene: SceneConfig, A_ref: Optional[FiniteSet]) -> SelectionPolicy:
    """The scene's policy, with the reference attached as the adversary's target."""
    if scene.policy.kind == "adversarial_floor":
        if A_ref is None:
            raise UsageError("adversarial_floor needs a reference attractor as its target")
        return replace(scene.policy, target=A_ref)
    return scene.policy


def provenance(scene: SceneConfig) -> dict:
    """Sidecar fields identifying the scene and IFS an artifact came from."""
    hashes = [ifs_hash(scene.ifs)] if scene.ifs is not None else [ifs_hash(s) for s in scene.sub_ifs]
    return {"scene": scene.label, "ifs_hash": hashes[0] if len(hashes) == 1 else hashes}
