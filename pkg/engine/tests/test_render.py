import numpy as np
import pytest

from core.ifs import make_finite_set
from core.render import chart_coordinates, decode_ppm, encode_ppm, rasterize, render_ppm
from core.verify import analytic_reference
from errors import ArtifactFormatError, DomainError, UsageError
from models import FiniteSet, RenderSpec

CIRCLE_SPEC = RenderSpec(width=128, height=128, viewport=(-1.2, 1.2, -1.2, 1.2))


def pixel_centers(spec, rows, cols):
    xmin, xmax, ymin, ymax = spec.viewport
    u = xmin + (cols + 0.5) * (xmax - xmin) / spec.width
    v = ymax - (rows + 0.5) * (ymax - ymin) / spec.height
    return u, v


def test_circle_pixels_lie_on_the_circle():
    image, stats = rasterize(analytic_reference("circle", 2000), CIRCLE_SPEC)
    rows, cols = np.nonzero(image)
    u, v = pixel_centers(CIRCLE_SPEC, rows, cols)
    pixel = 2.4 / 128
    assert np.all(np.abs(np.sqrt(u * u + v * v) - 1.0) <= 2 * pixel)
    assert stats == {"points": 2000, "drawn": 2000, "outside": 0, "flagged": 0}


def test_rendering_is_byte_deterministic():
    S = analytic_reference("circle", 500)
    first, _ = render_ppm(S, CIRCLE_SPEC)
    second, _ = render_ppm(S, CIRCLE_SPEC)
    assert first == second
    assert first.startswith(b"P6\n128 128\n255\n")
    assert len(first) == len(b"P6\n128 128\n255\n") + 128 * 128 * 3


def test_decode_reads_back_the_intensities():
    image, _ = rasterize(analytic_reference("circle", 300), CIRCLE_SPEC)
    assert np.array_equal(decode_ppm(encode_ppm(image)), image)
    with pytest.raises(ArtifactFormatError):
        decode_ppm(b"P3\n1 1\n255\n000")


def test_empty_sets_are_not_rendered():
    with pytest.raises(DomainError):
        rasterize(FiniteSet("circle", np.empty((0, 2))), CIRCLE_SPEC)


def test_degenerate_viewport_is_refused():
    with pytest.raises(UsageError):
        rasterize(analytic_reference("circle", 10), RenderSpec(viewport=(0.0, 0.0, -1.0, 1.0)))


def test_points_outside_the_viewport_are_counted():
    S = make_finite_set("euclidean", [[0.0, 0.0], [5.0, 5.0]])
    image, stats = rasterize(S, RenderSpec(width=10, height=10, viewport=(-1.0, 1.0, -1.0, 1.0)))
    assert stats["drawn"] == 1 and stats["outside"] == 1
    assert image.sum() == 255
    assert image[5, 5] == 255


def test_radius_draws_discs():
    S = make_finite_set("euclidean", [[0.0, 0.0]])
    image, _ = rasterize(S, RenderSpec(width=21, height=21, viewport=(-1.0, 1.0, -1.0, 1.0), radius=1))
    assert int((image == 255).sum()) == 5


def test_line_sets_are_drawn_on_the_axis():
    S = make_finite_set("euclidean", [[0.0], [0.5]])
    uv, horizon = chart_coordinates(S)
    assert uv.tolist() == [[0.0, 0.0], [0.5, 0.0]]
    assert not horizon.any()


def test_projective_horizon_points_are_flagged():
    S = make_finite_set("projective2", [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    _, stats = rasterize(S, RenderSpec(width=16, height=16, chart="z"))
    assert stats["flagged"] == 1
    assert stats["drawn"] == 2


def test_projective_line_renders_as_a_vertical_segment():
    spec = RenderSpec(width=64, height=64, viewport=(-2.0, 2.0, -4.0, 4.0), chart="y")
    image, stats = rasterize(analytic_reference("projective_line_x0", 500), spec)
    _, cols = np.nonzero(image)
    assert set(cols.tolist()) == {32}
    assert stats["flagged"] == 1
    assert stats["outside"] > 0
