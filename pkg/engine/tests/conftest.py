"""
Shared fixtures: small IFSs on every ground space and a scene writer.
"""

import math
import textwrap

import numpy as np
import pytest

from core.ifs import make_finite_set
from core.spaces import make_point
from models import IfsSpec, MapSpec

SQRT3_HALF = math.sqrt(3.0) / 2.0


def affine(matrix, offset=None):
    rows = tuple(tuple(float(v) for v in row) for row in matrix)
    return MapSpec("affine", matrix=rows, offset=None if offset is None else tuple(float(v) for v in offset))


@pytest.fixture
def halving_ifs():
    return IfsSpec("euclidean", (affine([[0.5]]),), label="halving", dim=1)


@pytest.fixture
def interval_ifs():
    """Two halvings of [0, 1]; the attractor is the whole interval."""
    return IfsSpec("euclidean", (affine([[0.5]]), affine([[0.5]], [0.5])), label="interval", dim=1)


@pytest.fixture
def thirds_ifs():
    third = 1.0 / 3.0
    return IfsSpec("euclidean", (affine([[third]]), affine([[third]], [2.0 * third])), label="thirds", dim=1)


@pytest.fixture
def sierpinski_ifs():
    half = [[0.5, 0.0], [0.0, 0.5]]
    maps = (affine(half), affine(half, [0.5, 0.0]), affine(half, [0.25, SQRT3_HALF / 2.0]))
    return IfsSpec("euclidean", maps, label="sierpinski", dim=2)


@pytest.fixture
def circle_ifs():
    return IfsSpec("circle", (MapSpec("identity"), MapSpec("rotation2", alpha=1.0)), label="circle", dim=2)


@pytest.fixture
def projective_ifs():
    c, s = math.cos(1.0), math.sin(1.0)
    scale = ((1.0, 0.0, 0.0), (0.0, 2.0, 0.0), (0.0, 0.0, 2.0))
    turn = ((1.0, 0.0, 0.0), (0.0, 2.0 * c, -2.0 * s), (0.0, 2.0 * s, 2.0 * c))
    maps = (MapSpec("projective3x3", matrix=scale), MapSpec("projective3x3", matrix=turn))
    return IfsSpec("projective2", maps, label="projective", dim=3)


@pytest.fixture
def circle_start():
    return make_point("circle", (1.0, 0.0))


@pytest.fixture
def projective_start():
    return make_point("projective2", (1.0, 1.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_set(space_tag, size, rng, dim=2, scale=1.0):
    """A FiniteSet of `size` random canonical points (no dedup)."""
    if space_tag == "euclidean":
        raw = scale * rng.standard_normal((size, dim))
    else:
        raw = rng.standard_normal((size, 2 if space_tag == "circle" else 3))
        raw[np.abs(raw).sum(axis=1) < 1e-3] = 1.0
    return make_finite_set(space_tag, raw)


@pytest.fixture
def write_scene(tmp_path):
    """Write a scene file into tmp_path; OUT points at tmp_path/out."""
    def _write(name, body, with_out=True):
        text = textwrap.dedent(body).strip() + "\n"
        if with_out:
            text += f"OUT={tmp_path / 'out'}\n"
        path = tmp_path / f"{name}.scene"
        path.write_text(text)
        return path
    return _write
