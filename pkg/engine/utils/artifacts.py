"""
Artifact reading and writing.

- point dumps: <name>.f64 little-endian float64 rows, <name>.json sidecar
- sigma dumps: <name>.sigma little-endian uint32 map indices
- ensemble dumps: <name>.ens blocks of (uint64 LE row count, float64 rows)
  with a <name>.json manifest
- reports: sorted-key JSON with a format_version and no timestamps, plus
  a text report rendered from templates/report.txt.j2
"""

import csv
import json
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

import numpy as np
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from config import REPORT_FORMAT_VERSION
from errors import ArtifactFormatError, MissingArtifactError
from models import FiniteSet, SetEnsemble
from utils.logger import setup_logger

logger = setup_logger(__name__)

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"

_env = Environment(loader=FileSystemLoader(str(TEMPLATE_DIR)), undefined=StrictUndefined,
                   keep_trailing_newline=True, trim_blocks=True, lstrip_blocks=True)


def artifact_dir(out_dir: str, label: str) -> Path:
    """<out_dir>/<label>, created on demand."""
    path = Path(out_dir) / label
    path.mkdir(parents=True, exist_ok=True)
    return path


def _base(path) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix in (".f64", ".json", ".sigma", ".ens") else path


# ============================================================================
# POINT DUMPS
# ============================================================================

def write_points(path, points: FiniteSet, meta: Optional[Dict] = None,
                 sigmas: Optional[np.ndarray] = None) -> Path:
    """
    Write a point dump, its sidecar and optionally a sigma dump.

    Args:
        path: Dump path, with or without the .f64 suffix
        points: FiniteSet to store
        meta: Extra sidecar fields (seed, policy, ifs_hash, ...)
        sigmas: One-based map indices of an orbit

    Returns:
        Path of the .f64 file
    """
    base = _base(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    data_path = base.with_suffix(".f64")
    data_path.write_bytes(np.ascontiguousarray(points.points, dtype="<f8").tobytes())
    sidecar = {
        "format_version": REPORT_FORMAT_VERSION,
        "space_tag": points.space_tag,
        "dim": points.dim,
        "count": len(points),
        "dedup_delta": points.dedup_delta,
        "sigma_file": None,
    }
    sidecar.update(meta or {})
    if sigmas is not None:
        sigma_path = base.with_suffix(".sigma")
        sigma_path.write_bytes(np.asarray(sigmas, dtype="<u4").tobytes())
        sidecar["sigma_file"] = sigma_path.name
    write_json(base.with_suffix(".json"), sidecar)
    logger.debug(f"wrote {len(points)} points to {data_path}")
    return data_path


def read_sidecar(path) -> Dict:
    sidecar_path = _base(path).with_suffix(".json")
    if not sidecar_path.exists():
        raise MissingArtifactError(f"No sidecar {sidecar_path}")
    try:
        return json.loads(sidecar_path.read_text())
    except json.JSONDecodeError as e:
        raise ArtifactFormatError(f"Corrupt sidecar {sidecar_path}: {e}")


def read_points(path, missing_hint: str = "") -> FiniteSet:
    """
    Load a point dump written by write_points.

    Raises:
        MissingArtifactError: dump or sidecar missing
        ArtifactFormatError: sizes disagree with the sidecar
    """
    base = _base(path)
    data_path = base.with_suffix(".f64")
    if not data_path.exists():
        hint = f"; {missing_hint}" if missing_hint else ""
        raise MissingArtifactError(f"No point dump at {data_path}{hint}")
    sidecar = read_sidecar(base)
    for key in ("space_tag", "dim", "count"):
        if key not in sidecar:
            raise ArtifactFormatError(f"Sidecar {base.with_suffix('.json')} lacks '{key}'")
    raw = data_path.read_bytes()
    dim, count = int(sidecar["dim"]), int(sidecar["count"])
    if len(raw) != 8 * dim * count or count < 1:
        raise ArtifactFormatError(f"{data_path} holds {len(raw)} bytes, sidecar promises {count}x{dim} float64")
    points = np.frombuffer(raw, dtype="<f8").reshape(count, dim).astype(float)
    return FiniteSet(sidecar["space_tag"], points, float(sidecar.get("dedup_delta", 0.0)))


def read_sigmas(path) -> np.ndarray:
    base = _base(path)
    sigma_path = base.with_suffix(".sigma")
    if not sigma_path.exists():
        raise MissingArtifactError(f"No sigma dump at {sigma_path}")
    raw = sigma_path.read_bytes()
    if len(raw) % 4:
        raise ArtifactFormatError(f"{sigma_path} is not a whole number of uint32 values")
    return np.frombuffer(raw, dtype="<u4").astype(np.int64)


# ============================================================================
# ENSEMBLE DUMPS
# ============================================================================

def write_ensemble(path, ensemble: SetEnsemble, meta: Optional[Dict] = None) -> Path:
    """Length-prefixed member dumps plus a manifest."""
    base = _base(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    chunks = []
    for member in ensemble.members:
        chunks.append(np.array([len(member)], dtype="<u8").tobytes())
        chunks.append(np.ascontiguousarray(member.points, dtype="<f8").tobytes())
    data_path = base.with_suffix(".ens")
    data_path.write_bytes(b"".join(chunks))
    first = ensemble.members[0]
    manifest = {
        "format_version": REPORT_FORMAT_VERSION,
        "space_tag": first.space_tag,
        "dim": first.dim,
        "members": len(ensemble),
        "member_sizes": [len(m) for m in ensemble.members],
        "member_deltas": [m.dedup_delta for m in ensemble.members],
        "delta2": ensemble.delta2,
    }
    manifest.update(meta or {})
    write_json(base.with_suffix(".json"), manifest)
    return data_path


def read_ensemble(path) -> SetEnsemble:
    base = _base(path)
    data_path = base.with_suffix(".ens")
    if not data_path.exists():
        raise MissingArtifactError(f"No ensemble dump at {data_path}")
    manifest = read_sidecar(base)
    dim = int(manifest["dim"])
    raw = data_path.read_bytes()
    members, offset = [], 0
    deltas = manifest.get("member_deltas", [])
    while offset < len(raw):
        if offset + 8 > len(raw):
            raise ArtifactFormatError(f"Truncated member header in {data_path}")
        count = int(np.frombuffer(raw[offset:offset + 8], dtype="<u8")[0])
        offset += 8
        size = 8 * dim * count
        if offset + size > len(raw):
            raise ArtifactFormatError(f"Truncated member data in {data_path}")
        points = np.frombuffer(raw[offset:offset + size], dtype="<f8").reshape(count, dim).astype(float)
        delta = float(deltas[len(members)]) if len(members) < len(deltas) else 0.0
        members.append(FiniteSet(manifest["space_tag"], points, delta))
        offset += size
    if len(members) != int(manifest["members"]):
        raise ArtifactFormatError(f"{data_path} holds {len(members)} members, manifest promises {manifest['members']}")
    return SetEnsemble(members=members, delta2=float(manifest.get("delta2", 0.0)))


# ============================================================================
# REPORTS
# ============================================================================

def write_json(path, payload: Dict) -> Path:
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(payload)
    body.setdefault("format_version", REPORT_FORMAT_VERSION)
    path.write_text(json.dumps(body, sort_keys=True, indent=2, allow_nan=True) + "\n")
    return path


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def render_report(template: str, **context) -> str:
    return _env.get_template(template).render(**context)


def write_text_report(path, template: str, **context) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(template, **context))
    return path
