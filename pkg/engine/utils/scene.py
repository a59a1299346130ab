"""
Scene files.

A scene is a line-oriented KEY=VALUE document (read with python-dotenv,
no interpolation) describing one IFS or superfractal together with its
selection policy, budgets, reference attractor and render settings. The
grammar is documented in scenes/SCENES.md.

load_scene reports three kinds of failure separately:

- SceneParseError: unreadable file, malformed line, unknown key, bad number
- SceneVersionError: VERSION not understood by this build
- SceneValidationError: every broken invariant, as (field path, reason)
"""

import math
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from dotenv import dotenv_values

from config import IFS_INNER_CAP, IFS_OUT_DIR, IFS_PASS_THRESHOLD, IFS_WINDOW
from errors import SceneParseError, SceneValidationError, SceneVersionError
from models import (Budgets, IfsSpec, MapSpec, ReferenceSpec, RenderSpec, SceneConfig,
                    SelectionPolicy, SpacePoint)
from utils.logger import setup_logger
from utils.validation import (validate_floor, validate_map_kind_for_space, validate_markov_matrix,
                              validate_nonneg_int, validate_positive, validate_projective_matrix,
                              validate_space_tag, validate_version)

logger = setup_logger(__name__)

LINE_PATTERN = re.compile(r"^\s*(export\s+)?[A-Z][A-Z0-9_]*\s*=")
MAP_KEY = re.compile(r"^(SUB(\d+)_)?MAP_(\d+)$")

SCALAR_KEYS = {
    "VERSION", "LABEL", "SPACE", "DIM", "X0", "POLICY", "FLOOR_P", "MARKOV", "REFERENCE", "OUT",
    "N", "T", "K_LADDER", "SEEDS", "SEED", "TOL", "EPSILON", "DEDUP_DELTA", "MAX_ITER", "WINDOW",
    "M_CAP", "COVER_EPSILON", "NET_DELTA", "COVER_SAMPLES", "UPPER_K", "UPPER_K_MAX", "THRESHOLD",
    "DELTA2", "INNER_CAP", "LIFTED_DEPTH",
    "RENDER_WIDTH", "RENDER_HEIGHT", "RENDER_VIEWPORT", "RENDER_RADIUS", "RENDER_CHART",
    "RENDER_BACKGROUND", "RENDER_FOREGROUND",
}

INT_BUDGETS = {"N": "n", "T": "T", "SEEDS": "seeds", "SEED": "seed", "MAX_ITER": "max_iter",
               "WINDOW": "window", "M_CAP": "m_cap", "COVER_SAMPLES": "cover_samples",
               "UPPER_K": "upper_K", "UPPER_K_MAX": "upper_k_max", "INNER_CAP": "inner_cap",
               "LIFTED_DEPTH": "lifted_depth"}
FLOAT_BUDGETS = {"TOL": "tol", "EPSILON": "epsilon", "DEDUP_DELTA": "dedup_delta",
                 "COVER_EPSILON": "cover_epsilon", "NET_DELTA": "net_delta",
                 "THRESHOLD": "threshold", "DELTA2": "delta2"}


class SceneReader:
    """Typed access to raw scene values; conversion failures are parse errors."""

    def __init__(self, values: Dict[str, Optional[str]], path: str):
        self.values = values
        self.path = path

    def has(self, key: str) -> bool:
        return self.values.get(key) not in (None, "")

    def text(self, key: str, default: Optional[str] = None) -> Optional[str]:
        value = self.values.get(key)
        return default if value in (None, "") else value.strip()

    def number(self, key: str, default=None, kind=float):
        raw = self.text(key)
        if raw is None:
            return default
        try:
            return _parse_int(raw) if kind is int else float(raw)
        except ValueError:
            raise SceneParseError(f"{self.path}: {key}={raw!r} is not a valid {kind.__name__}")

    def floats(self, key: str, raw: Optional[str] = None) -> Optional[Tuple[float, ...]]:
        raw = self.text(key) if raw is None else raw
        if raw is None:
            return None
        try:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        except ValueError:
            raise SceneParseError(f"{self.path}: {key}={raw!r} is not a comma-separated list of numbers")

    def ints(self, key: str) -> Optional[Tuple[int, ...]]:
        raw = self.text(key)
        if raw is None:
            return None
        try:
            return tuple(_parse_int(v) for v in raw.split(",") if v.strip())
        except ValueError:
            raise SceneParseError(f"{self.path}: {key}={raw!r} is not a comma-separated list of integers")


def _parse_int(raw: str) -> int:
    raw = raw.strip().replace("_", "")
    try:
        return int(raw)
    except ValueError:
        value = float(raw)
        if not value.is_integer():
            raise
        return int(value)


def _read_lines(path: Path) -> None:
    try:
        lines = path.read_text().splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise SceneParseError(f"Cannot read scene {path}: {e}")
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if not LINE_PATTERN.match(line):
            raise SceneParseError(f"{path}:{number}: expected KEY=VALUE, got {stripped!r}")


# ============================================================================
# MAPS AND SYSTEMS
# ============================================================================

def parse_map(text: str, field: str, reader: SceneReader) -> MapSpec:
    """
    Parse one map line: `<kind> [key=value ...]`.

    Kinds: identity | affine matrix=<row-major> [offset=<vector>] |
    rotation2 alpha=<radians> | projective3x3 matrix=<row-major 3x3>
    """
    tokens = text.split()
    if not tokens:
        raise SceneParseError(f"{reader.path}: {field} is empty")
    kind, params = tokens[0], {}
    for token in tokens[1:]:
        if "=" not in token:
            raise SceneParseError(f"{reader.path}: {field}: expected key=value, got {token!r}")
        key, value = token.split("=", 1)
        params[key] = value
    unknown = set(params) - {"matrix", "offset", "alpha"}
    if unknown:
        raise SceneParseError(f"{reader.path}: {field}: unknown map parameter(s) {sorted(unknown)}")
    matrix = reader.floats(f"{field}.matrix", params["matrix"]) if "matrix" in params else None
    offset = reader.floats(f"{field}.offset", params["offset"]) if "offset" in params else None
    alpha = None
    if "alpha" in params:
        try:
            alpha = float(params["alpha"])
        except ValueError:
            raise SceneParseError(f"{reader.path}: {field}.alpha={params['alpha']!r} is not a number")
    return MapSpec(kind=kind, matrix=_square(matrix), offset=offset, alpha=alpha)


def _square(flat: Optional[Tuple[float, ...]]):
    if flat is None:
        return None
    side = int(round(math.sqrt(len(flat))))
    if side * side != len(flat):
        return (tuple(flat),)
    return tuple(tuple(flat[i * side:(i + 1) * side]) for i in range(side))


def _check_map(m: MapSpec, field: str, space_tag: str, dim: int, problems: List[Tuple[str, str]]) -> None:
    is_valid, message = validate_map_kind_for_space(m.kind, space_tag)
    if not is_valid:
        problems.append((field, message))
        return
    if m.kind == "affine":
        if m.matrix is None or len(m.matrix) != dim or any(len(row) != dim for row in m.matrix):
            problems.append((f"{field}.matrix", f"affine maps need a {dim}x{dim} matrix"))
        if m.offset is not None and len(m.offset) != dim:
            problems.append((f"{field}.offset", f"offset must have {dim} entries"))
    elif m.kind == "rotation2":
        if m.alpha is None or not math.isfinite(m.alpha):
            problems.append((f"{field}.alpha", "rotation2 needs a finite alpha"))
        if dim != 2:
            problems.append((field, "rotation2 needs a 2-dimensional space"))
    elif m.kind == "projective3x3":
        if m.matrix is None:
            problems.append((f"{field}.matrix", "projective3x3 needs a matrix"))
        else:
            is_valid, message = validate_projective_matrix(m.matrix)
            if not is_valid:
                problems.append((f"{field}.matrix", message))


def _collect_maps(reader: SceneReader) -> Tuple[Dict[int, Dict[int, str]], List[str]]:
    groups: Dict[int, Dict[int, str]] = {}
    unknown = []
    for key in reader.values:
        match = MAP_KEY.match(key)
        if match:
            group = int(match.group(2)) if match.group(2) else 0
            groups.setdefault(group, {})[int(match.group(3))] = key
        elif key not in SCALAR_KEYS:
            unknown.append(key)
    return groups, unknown


def _build_ifs(keys: Dict[int, str], label: str, space_tag: str, dim: int, reader: SceneReader,
               problems: List[Tuple[str, str]], prefix: str) -> Optional[IfsSpec]:
    indices = sorted(keys)
    if indices != list(range(1, len(indices) + 1)):
        problems.append((f"{prefix}MAP_*", f"map indices must run 1..N without gaps, got {indices}"))
        return None
    maps = []
    for i in indices:
        field = keys[i]
        m = parse_map(reader.text(field, ""), field, reader)
        _check_map(m, field, space_tag, dim, problems)
        maps.append(m)
    return IfsSpec(space_tag=space_tag, maps=tuple(maps), label=label, dim=dim)


# ============================================================================
# POLICY, REFERENCE, RENDER
# ============================================================================

def _build_policy(reader: SceneReader, n_maps: int, problems: List[Tuple[str, str]]) -> SelectionPolicy:
    kind = reader.text("POLICY", "uniform_iid")
    matrix = None
    floor_p = reader.number("FLOOR_P")
    if kind == "uniform_iid":
        floor_p = 1.0 / n_maps if floor_p is None else floor_p
    elif kind == "markov":
        raw = reader.text("MARKOV")
        if raw is None:
            problems.append(("MARKOV", "markov policy needs MARKOV rows"))
        else:
            matrix = tuple(reader.floats("MARKOV", row) for row in raw.split(";"))
            if floor_p is None:
                floor_p = min(min(row) for row in matrix if row) if all(matrix) else 0.0
    elif kind == "adversarial_floor":
        if floor_p is None:
            problems.append(("FLOOR_P", "adversarial_floor needs an explicit FLOOR_P"))
    else:
        problems.append(("POLICY", f"unknown policy '{kind}' (uniform_iid, markov, adversarial_floor)"))

    floor_p = 0.0 if floor_p is None else floor_p
    is_valid, message = validate_floor(floor_p, n_maps)
    if not is_valid and not any(path == "FLOOR_P" for path, _ in problems):
        problems.append(("FLOOR_P", message))
    if kind == "uniform_iid" and floor_p > 1.0 / n_maps + 1e-15:
        problems.append(("FLOOR_P", f"uniform selection only guarantees 1/N={1.0 / n_maps:g}"))
    if matrix is not None:
        is_valid, message = validate_markov_matrix(matrix, n_maps, floor_p)
        if not is_valid:
            problems.append(("MARKOV", message))
    return SelectionPolicy(kind=kind, floor_p=floor_p, matrix=matrix)


def parse_reference(raw: str, scene_dir: Path, problems: List[Tuple[str, str]]) -> ReferenceSpec:
    """analytic:<name>[:<count>] | analytic:point:<coords> | deterministic | file:<path>"""
    if raw == "deterministic":
        return ReferenceSpec(kind="deterministic")
    if raw.startswith("file:"):
        path = Path(raw[len("file:"):])
        if not path.is_absolute():
            path = scene_dir / path
        if not path.with_suffix(".f64").exists():
            problems.append(("REFERENCE", f"reference file {path} does not exist"))
        return ReferenceSpec(kind="file", path=str(path))
    if raw.startswith("analytic:"):
        parts = raw.split(":")
        name = parts[1] if len(parts) > 1 else ""
        if name == "point":
            try:
                coords = tuple(float(v) for v in parts[2].split(","))
            except (IndexError, ValueError):
                problems.append(("REFERENCE", "analytic:point needs coordinates, e.g. analytic:point:0"))
                coords = ()
            return ReferenceSpec(kind="analytic", name=name, count=1, coords=coords)
        if name not in ("circle", "projective_line_x0"):
            problems.append(("REFERENCE", f"unknown analytic reference '{name}'"))
        count = 1000
        if len(parts) > 2:
            try:
                count = _parse_int(parts[2])
            except ValueError:
                problems.append(("REFERENCE", f"net size {parts[2]!r} is not an integer"))
        if count < 1:
            problems.append(("REFERENCE", "net size must be at least 1"))
        return ReferenceSpec(kind="analytic", name=name, count=count)
    problems.append(("REFERENCE", f"expected analytic:<name>, deterministic or file:<path>, got {raw!r}"))
    return ReferenceSpec(kind="none")


def _build_render(reader: SceneReader, problems: List[Tuple[str, str]]) -> RenderSpec:
    defaults = RenderSpec()
    viewport = reader.floats("RENDER_VIEWPORT") or defaults.viewport
    spec = RenderSpec(
        width=reader.number("RENDER_WIDTH", defaults.width, int),
        height=reader.number("RENDER_HEIGHT", defaults.height, int),
        viewport=tuple(viewport),
        background=reader.number("RENDER_BACKGROUND", defaults.background, int),
        foreground=reader.number("RENDER_FOREGROUND", defaults.foreground, int),
        radius=reader.number("RENDER_RADIUS", defaults.radius, int),
        chart=reader.text("RENDER_CHART", defaults.chart),
    )
    if spec.width < 1 or spec.height < 1:
        problems.append(("RENDER_WIDTH", "image width and height must be at least 1"))
    if len(spec.viewport) != 4:
        problems.append(("RENDER_VIEWPORT", "viewport is xmin,xmax,ymin,ymax"))
    elif not (spec.viewport[1] > spec.viewport[0] and spec.viewport[3] > spec.viewport[2]):
        problems.append(("RENDER_VIEWPORT", "viewport must be nondegenerate"))
    if spec.radius < 0:
        problems.append(("RENDER_RADIUS", "radius must be non-negative"))
    if spec.chart not in ("x", "y", "z"):
        problems.append(("RENDER_CHART", "chart must be x, y or z"))
    for key, level in (("RENDER_BACKGROUND", spec.background), ("RENDER_FOREGROUND", spec.foreground)):
        if not 0 <= level <= 255:
            problems.append((key, "intensity must lie in 0..255"))
    return spec


def _build_budgets(reader: SceneReader, problems: List[Tuple[str, str]]) -> Budgets:
    defaults = Budgets(window=IFS_WINDOW, threshold=IFS_PASS_THRESHOLD, inner_cap=IFS_INNER_CAP)
    fields = defaults.to_dict()
    for key, name in INT_BUDGETS.items():
        fields[name] = reader.number(key, fields[name], int)
    for key, name in FLOAT_BUDGETS.items():
        fields[name] = reader.number(key, fields[name])
    fields["K_ladder"] = reader.ints("K_LADDER") or ()

    for key in ("N", "SEEDS", "MAX_ITER", "WINDOW", "M_CAP", "COVER_SAMPLES", "INNER_CAP"):
        is_valid, message = validate_positive(fields[INT_BUDGETS[key]], key)
        if not is_valid:
            problems.append((key, message))
    for key in ("SEED", "UPPER_K", "UPPER_K_MAX", "LIFTED_DEPTH"):
        is_valid, message = validate_nonneg_int(fields[INT_BUDGETS[key]], key)
        if not is_valid:
            problems.append((key, message))
    for key in ("TOL", "EPSILON", "COVER_EPSILON", "NET_DELTA", "THRESHOLD"):
        is_valid, message = validate_positive(fields[FLOAT_BUDGETS[key]], key)
        if not is_valid:
            problems.append((key, message))
    for key in ("DEDUP_DELTA", "DELTA2"):
        if not fields[FLOAT_BUDGETS[key]] >= 0:
            problems.append((key, f"{key} must be non-negative"))
    if fields["threshold"] > 1:
        problems.append(("THRESHOLD", "THRESHOLD must lie in (0, 1]"))
    if fields["upper_K"] > fields["upper_k_max"]:
        problems.append(("UPPER_K", "UPPER_K must not exceed UPPER_K_MAX"))
    if fields["T"] is None:
        fields["T"] = max(1, fields["n"] // 2)
    else:
        is_valid, message = validate_positive(fields["T"], "T")
        if not is_valid:
            problems.append(("T", message))
        elif fields["T"] > fields["n"]:
            problems.append(("T", "tail length T must not exceed N"))
    if fields["net_delta"] >= fields["cover_epsilon"] / 4:
        problems.append(("NET_DELTA", "NET_DELTA must be below COVER_EPSILON/4"))
    if any(K < 0 or K > fields["n"] for K in fields["K_ladder"]):
        problems.append(("K_LADDER", "every K must lie in 0..N"))
    fields["K_ladder"] = tuple(sorted(set(fields["K_ladder"])))
    return Budgets(**fields)


def _build_x0(reader: SceneReader, space_tag: str, dim: int, problems: List[Tuple[str, str]]) -> SpacePoint:
    coords = reader.floats("X0")
    if coords is None:
        problems.append(("X0", "starting point X0 is required"))
        return SpacePoint(space_tag, tuple([0.0] * dim))
    if len(coords) != dim:
        problems.append(("X0", f"X0 needs {dim} coordinates, got {len(coords)}"))
    elif space_tag in ("circle", "projective2") and math.sqrt(sum(c * c for c in coords)) <= 1e-12:
        problems.append(("X0", "X0 must be a nonzero vector"))
    return SpacePoint(space_tag, coords)


# ============================================================================
# ENTRY POINT
# ============================================================================

def load_scene(path) -> SceneConfig:
    """
    Parse and validate a scene file.

    Args:
        path: Scene file path

    Returns:
        Fully validated SceneConfig
    """
    path = Path(path)
    if not path.is_file():
        raise SceneParseError(f"Scene file {path} does not exist")
    _read_lines(path)
    values = dotenv_values(path, interpolate=False)
    reader = SceneReader(values, str(path))

    groups, unknown = _collect_maps(reader)
    if unknown:
        raise SceneParseError(f"{path}: unknown key(s) {', '.join(sorted(unknown))}")
    if not reader.has("VERSION"):
        raise SceneParseError(f"{path}: VERSION is required")
    version = reader.number("VERSION", kind=int)
    is_valid, message = validate_version(version)
    if not is_valid:
        raise SceneVersionError(f"{path}: {message}")

    problems: List[Tuple[str, str]] = []
    label = reader.text("LABEL", path.stem)
    if not re.match(r"^[A-Za-z0-9_.-]+$", label):
        problems.append(("LABEL", "label may only contain letters, digits, '.', '_' and '-'"))
    space_tag = reader.text("SPACE", "euclidean")
    is_valid, message = validate_space_tag(space_tag)
    if not is_valid or space_tag == "hyperspace":
        problems.append(("SPACE", message if not is_valid else "hyperspace scenes declare SUB<j>_MAP_i over a ground space"))
    default_dim = {"circle": 2, "projective2": 3}.get(space_tag, 2)
    dim = reader.number("DIM", default_dim, int)
    if space_tag in ("circle", "projective2") and dim != default_dim:
        problems.append(("DIM", f"space '{space_tag}' has dimension {default_dim}"))
    if dim < 1:
        problems.append(("DIM", "DIM must be at least 1"))

    ifs, sub_ifs = None, []
    if 0 in groups:
        ifs = _build_ifs(groups[0], label, space_tag, dim, reader, problems, "")
    for j in sorted(g for g in groups if g > 0):
        sub = _build_ifs(groups[j], f"{label}.sub{j}", space_tag, dim, reader, problems, f"SUB{j}_")
        if sub is not None:
            sub_ifs.append(sub)
    if 0 in groups and len(groups) > 1:
        problems.append(("MAP_*", "a scene declares either MAP_i or SUB<j>_MAP_i, not both"))
    if not groups:
        problems.append(("MAP_*", "no maps declared"))
    if sub_ifs and sorted(g for g in groups if g > 0) != list(range(1, len(groups) + 1)):
        problems.append(("SUB*", "sub-IFS indices must run 1..M without gaps"))

    n_maps = ifs.n_maps if ifs is not None else max(len(sub_ifs), 1)
    policy = _build_policy(reader, n_maps, problems)
    if sub_ifs and policy.kind == "adversarial_floor":
        problems.append(("POLICY", "adversarial_floor is not available for superfractal scenes"))
    x0 = _build_x0(reader, space_tag, dim, problems)
    budgets = _build_budgets(reader, problems)
    reference = parse_reference(reader.text("REFERENCE", "deterministic"), path.parent, problems)
    if reference.kind == "analytic" and reference.name == "circle" and space_tag != "circle":
        problems.append(("REFERENCE", "analytic:circle needs SPACE=circle"))
    if reference.kind == "analytic" and reference.name == "projective_line_x0" and space_tag != "projective2":
        problems.append(("REFERENCE", "analytic:projective_line_x0 needs SPACE=projective2"))
    if reference.kind == "analytic" and reference.name == "point" and len(reference.coords) not in (0, dim):
        problems.append(("REFERENCE", f"analytic:point needs {dim} coordinates"))
    render = _build_render(reader, problems)

    if problems:
        raise SceneValidationError(problems)
    scene = SceneConfig(version=version, label=label, ifs=ifs, sub_ifs=tuple(sub_ifs), x0=x0,
                        policy=policy, budgets=budgets, reference=reference, render=render,
                        out_dir=reader.text("OUT", IFS_OUT_DIR), path=str(path))
    logger.debug(f"loaded scene {label} from {path}")
    return scene
