"""Unit tests for the nine-vertex interlocking block."""

import numpy as np
import pytest

from interlock.block import WHITE_SIDES, oriented_block, versatile_block
from interlock.mesh import (
    cross_section_area,
    euler_characteristic,
    signed_volume,
    validate_mesh,
)

_R_CW = np.array([[0.0, 1.0], [-1.0, 0.0]])
_CENTER = np.array([1.0, 0.0])

EXPECTED_VERTICES = np.array(
    [
        [0, 0, 0], [1, 1, 0], [2, 0, 0], [1, -1, 0],
        [0, 1, 1], [1, 1, 1], [1, 0, 1], [1, -1, 1], [0, -1, 1],
    ],
    dtype=float,
)


def test_block_vertex_table():
    b = versatile_block()
    assert np.array_equal(b.mesh.vertices, EXPECTED_VERTICES)
    assert len(b.mesh.triangles) == 14


def test_block_is_watertight_with_volume_two():
    m = versatile_block().mesh
    validate_mesh(m)
    assert euler_characteristic(m) == 2
    assert signed_volume(m) == pytest.approx(2.0, abs=1e-12)
    # 9 - E + 14 = 2 pins the edge count
    edges = {frozenset(e) for t in m.triangles for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))}
    assert len(edges) == 21


@pytest.mark.parametrize("z", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_every_cross_section_has_area_two(z):
    m = versatile_block().mesh
    assert cross_section_area(m, z) == pytest.approx(2.0, abs=1e-12)


def test_horizontal_face_groups():
    b = versatile_block()
    assert len(b.bottom_square) == 2
    assert len(b.top_rectangle) == 3
    zs = b.mesh.vertices[:, 2]
    for tri in b.bottom_square:
        assert np.all(zs[list(tri)] == 0.0)
    for tri in b.top_rectangle:
        assert np.all(zs[list(tri)] == 1.0)


def test_two_lower_ramps_overhang():
    m = versatile_block().mesh
    c = m.vertices[m.triangles]
    n = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    n = n / np.linalg.norm(n, axis=1, keepdims=True)
    slanted_down = n[(n[:, 2] < -1e-9) & (np.abs(n[:, 2] + 1.0) > 1e-9)]
    expect = {(-1, 1, -1), (-1, -1, -1)}
    got = {tuple(np.sign(v).astype(int)) for v in slanted_down}
    assert got == expect
    assert np.allclose(np.abs(slanted_down), 1.0 / np.sqrt(3.0))


def test_orientation_zero_is_the_base_block():
    assert np.array_equal(oriented_block(0).vertices, EXPECTED_VERTICES)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_oriented_blocks_are_valid(k):
    m = oriented_block(k)
    validate_mesh(m)
    assert signed_volume(m) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_orientation_steps_rotate_clockwise(k):
    a = oriented_block(k)
    b = oriented_block((k + 1) % 4)
    xy = (a.vertices[:, :2] - _CENTER) @ _R_CW.T + _CENTER
    rotated = {(round(x, 9), round(y, 9), round(z, 9)) for (x, y), z in zip(xy, a.vertices[:, 2])}
    target = {tuple(np.round(v, 9)) for v in b.vertices}
    assert rotated == target


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_bottom_diamond_is_rotation_invariant(k):
    m = oriented_block(k)
    bottom = {tuple(np.round(v, 9)) for v in m.vertices if v[2] == 0.0}
    assert bottom == {(0.0, 0.0, 0.0), (1.0, 1.0, 0.0), (2.0, 0.0, 0.0), (1.0, -1.0, 0.0)}


def test_invalid_orientation_rejected():
    for k in (-1, 4, 7):
        with pytest.raises(ValueError):
            oriented_block(k)


def test_white_sides_follow_the_rotation():
    clockwise = {"N": "E", "E": "S", "S": "W", "W": "N"}
    assert WHITE_SIDES[0] == frozenset({"N", "W"})
    for k in range(4):
        image = frozenset(clockwise[s] for s in WHITE_SIDES[k])
        assert WHITE_SIDES[(k + 1) % 4] == image
