"""
Rasterize point sets into binary PPM (P6) images.

Points are mapped into a 2D chart, then into the viewport, and each one
lights a disc of `radius` pixels. Output bytes depend only on the points
and the RenderSpec.
"""

from typing import Dict, Tuple

import numpy as np

from errors import ArtifactFormatError, DomainError, UsageError
from models import FiniteSet, RenderSpec
from utils.logger import log_run_event, setup_logger

logger = setup_logger(__name__)

CHART_AXES = {"x": 0, "y": 1, "z": 2}

# Homogeneous weights smaller than this sit on the chart horizon
HORIZON = 1e-6


def check_render_spec(spec: RenderSpec) -> None:
    if spec.width < 1 or spec.height < 1:
        raise UsageError("Image width and height must be at least 1 pixel")
    xmin, xmax, ymin, ymax = spec.viewport
    if not (xmax > xmin and ymax > ymin):
        raise UsageError(f"Degenerate viewport {spec.viewport}")
    if spec.radius < 0:
        raise UsageError("Dot radius must be non-negative")
    if spec.chart not in CHART_AXES:
        raise UsageError(f"Unknown projective chart '{spec.chart}'")
    for level in (spec.background, spec.foreground):
        if not 0 <= level <= 255:
            raise UsageError("Intensities must lie in 0..255")


def chart_coordinates(S: FiniteSet, chart: str = "z") -> Tuple[np.ndarray, np.ndarray]:
    """
    Planar coordinates of every point and the mask of points on the chart horizon.

    Euclidean sets use their first two coordinates (a line is drawn on v=0),
    circle points are drawn in place, projective points go through the
    affine chart where the chosen coordinate equals 1.
    """
    pts = S.points
    if S.space_tag == "projective2":
        axis = CHART_AXES[chart]
        rest = [i for i in range(3) if i != axis]
        w = pts[:, axis]
        near = np.abs(w) < HORIZON
        w = np.where(near, np.where(w < 0, -HORIZON, HORIZON), w)
        return pts[:, rest] / w[:, None], near
    flat = np.zeros(len(pts), dtype=bool)
    if pts.shape[1] == 1:
        return np.column_stack([pts[:, 0], np.zeros(len(pts))]), flat
    return pts[:, :2], flat


def rasterize(S: FiniteSet, spec: RenderSpec) -> Tuple[np.ndarray, Dict[str, int]]:
    """
    Draw S into a (height, width) uint8 intensity array.

    Points outside the viewport are skipped; horizon points are clamped onto
    the viewport border and counted as flagged.
    """
    check_render_spec(spec)
    if len(S) == 0:
        raise DomainError("Refusing to render an empty point set")
    uv, horizon = chart_coordinates(S, spec.chart)
    flagged = int(horizon.sum())
    xmin, xmax, ymin, ymax = spec.viewport
    if flagged:
        uv = uv.copy()
        uv[horizon, 0] = np.clip(uv[horizon, 0], xmin, xmax)
        uv[horizon, 1] = np.clip(uv[horizon, 1], ymin, ymax)
    col = np.floor((uv[:, 0] - xmin) / (xmax - xmin) * spec.width).astype(np.int64)
    row = np.floor((ymax - uv[:, 1]) / (ymax - ymin) * spec.height).astype(np.int64)
    col = np.minimum(col, spec.width - 1)
    row = np.minimum(row, spec.height - 1)
    inside = (uv[:, 0] >= xmin) & (uv[:, 0] <= xmax) & (uv[:, 1] >= ymin) & (uv[:, 1] <= ymax)
    col, row = col[inside], row[inside]

    image = np.full((spec.height, spec.width), spec.background, dtype=np.uint8)
    r = spec.radius
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx * dx + dy * dy > r * r:
                continue
            y, x = row + dy, col + dx
            ok = (y >= 0) & (y < spec.height) & (x >= 0) & (x < spec.width)
            image[y[ok], x[ok]] = spec.foreground
    stats = {"points": len(S), "drawn": int(inside.sum()), "outside": int((~inside).sum()), "flagged": flagged}
    return image, stats


def encode_ppm(image: np.ndarray) -> bytes:
    """Binary P6 encoding of a grayscale intensity array."""
    height, width = image.shape
    rgb = np.repeat(image[:, :, None], 3, axis=2)
    return f"P6\n{width} {height}\n255\n".encode("ascii") + rgb.tobytes()


def decode_ppm(data: bytes) -> np.ndarray:
    """Read back the first channel of a P6 image written by encode_ppm."""
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P6":
        raise ArtifactFormatError("Not a binary PPM image")
    width, height = (int(v) for v in parts[1].split())
    rgb = np.frombuffer(parts[3], dtype=np.uint8).reshape(height, width, 3)
    return rgb[:, :, 0].copy()


def render_ppm(S: FiniteSet, spec: RenderSpec) -> Tuple[bytes, Dict[str, int]]:
    """Rasterize and encode; returns (P6 bytes, draw statistics)."""
    image, stats = rasterize(S, spec)
    if stats["flagged"]:
        logger.warning(f"{stats['flagged']} points lie on the horizon of chart {spec.chart}=1 and were clamped")
    log_run_event(logger, "render_done", width=spec.width, height=spec.height, **stats)
    return encode_ppm(image), stats
