"""Planar isometry algebra, z-preserving 3D extension, and the wallpaper
groups p1, pg, p4 used to generate block assemblies.

An isometry is a pair (M, v) of an orthogonal 2x2 matrix and an offset
vector acting as x -> M x + v.  Composition, application, inversion and
the lift to 3-space that keeps the z-coordinate fixed are provided, plus
bounded-window enumeration of group elements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORTHO_TOL = 1e-12
DEDUP_DECIMALS = 9


def _frozen(a, shape, dtype=np.float64):
    arr = np.array(a, dtype=dtype).reshape(shape)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Isometry2:
    """Rigid motion of the plane: orthogonal matrix plus offset."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix, (2, 2)))
        object.__setattr__(self, "offset", _frozen(self.offset, (2,)))
        m = self.matrix
        if not np.allclose(m.T @ m, np.eye(2), atol=ORTHO_TOL, rtol=0.0):
            raise ValueError("matrix is not orthogonal")
        det = float(np.linalg.det(m))
        if not (abs(det - 1.0) <= ORTHO_TOL or abs(det + 1.0) <= ORTHO_TOL):
            raise ValueError("matrix determinant is not +-1")

    def key(self, decimals: int = DEDUP_DECIMALS) -> tuple:
        """Rounded entries, used for dedup and canonical ordering."""
        return tuple(np.round(self.matrix, decimals).ravel()) + tuple(
            np.round(self.offset, decimals)
        )

    def __eq__(self, other):
        if not isinstance(other, Isometry2):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix) and np.array_equal(
            self.offset, other.offset
        )

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True, eq=False)
class Isometry3:
    """Rigid motion of 3-space (here always a lifted planar isometry)."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix, (3, 3)))
        object.__setattr__(self, "offset", _frozen(self.offset, (3,)))

    def __eq__(self, other):
        if not isinstance(other, Isometry3):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix) and np.array_equal(
            self.offset, other.offset
        )

    def __hash__(self):
        return hash(tuple(self.matrix.ravel()) + tuple(self.offset))


def identity2() -> Isometry2:
    return Isometry2(np.eye(2), np.zeros(2))


def compose(second: Isometry2, first: Isometry2) -> Isometry2:
    """Composition second o first: apply ``first``, then ``second``."""
    return Isometry2(
        second.matrix @ first.matrix,
        second.matrix @ first.offset + second.offset,
    )


def invert(iso: Isometry2) -> Isometry2:
    mt = iso.matrix.T
    return Isometry2(mt, -(mt @ iso.offset))


def apply2(iso: Isometry2, p) -> np.ndarray:
    """Apply the isometry to a point (2,) or point array (..., 2)."""
    p = np.asarray(p, dtype=np.float64)
    return p @ iso.matrix.T + iso.offset


def extend3(iso: Isometry2) -> Isometry3:
    """Lift to 3-space: (x1, x2, x3) -> (M (x1, x2) + v, x3)."""
    m = np.eye(3)
    m[:2, :2] = iso.matrix
    v = np.zeros(3)
    v[:2] = iso.offset
    return Isometry3(m, v)


def apply3(iso: Isometry3, p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    return p @ iso.matrix.T + iso.offset


def matrix_angle_deg(m) -> float:
    """Canonical angle of an orthogonal 2x2 matrix, in degrees in [0, 180].

    For rotations this is the absolute rotation angle; for reflections the
    angle parameter of (cos t, sin t; sin t, -cos t).
    """
    m = np.asarray(m, dtype=np.float64)
    theta = abs(np.degrees(np.arctan2(m[1, 0], m[0, 0]))) % 360.0
    return min(theta, 360.0 - theta)


# ---------------------------------------------------------------------------
# wallpaper groups


@dataclass(frozen=True)
class WallpaperGroup:
    """A finitely generated planar symmetry group with a 2D translation
    lattice and a finite point group."""

    name: str
    generators: tuple[Isometry2, ...]

    def __post_init__(self):
        mats = _point_group(self.generators)
        if mats is None:
            raise ValueError("generator matrices do not span a finite point group")
        if not _has_independent_translations(self.generators):
            raise ValueError("group offsets do not span the plane")


def _point_group(generators, bound: int = 48):
    """BFS closure of the generator matrices; None if > ``bound`` matrices."""
    seen = {}
    frontier = [np.eye(2)]
    seen[tuple(np.round(np.eye(2), DEDUP_DECIMALS).ravel())] = np.eye(2)
    steps = [g.matrix for g in generators] + [g.matrix.T for g in generators]
    while frontier:
        m = frontier.pop()
        for s in steps:
            nm = s @ m
            k = tuple(np.round(nm, DEDUP_DECIMALS).ravel())
            if k not in seen:
                if len(seen) >= bound:
                    return None
                seen[k] = nm
                frontier.append(nm)
    return list(seen.values())


def _has_independent_translations(generators) -> bool:
    """Offsets of generator products up to length 2 must span the plane.

    The generator offsets alone can be collinear (the published p4
    generators are an example); short products expose the translation
    lattice.
    """
    isos = [identity2()] + list(generators)
    offsets = []
    for a in generators:
        offsets.append(a.offset)
    for a in isos:
        for b in isos:
            offsets.append(compose(a, b).offset)
    stack = np.array(offsets)
    return np.linalg.matrix_rank(stack, tol=1e-9) >= 2


_R_CW = np.array([[0.0, 1.0], [-1.0, 0.0]])  # 90 degrees clockwise


def wallpaper_group(name: str) -> WallpaperGroup:
    """The three groups used for assembly generation.

    p1: two independent translations along the diamond lattice.
    pg: a glide reflection plus one translation.
    p4: two quarter turns and a half turn.
    """
    eye = np.eye(2)
    if name == "p1":
        gens = (
            Isometry2(eye, (1.0, -1.0)),
            Isometry2(eye, (1.0, 1.0)),
        )
    elif name == "pg":
        gens = (
            Isometry2([[0.0, -1.0], [-1.0, 0.0]], (2.0, 0.0)),
            Isometry2(eye, (1.0, 1.0)),
        )
    elif name == "p4":
        gens = (
            Isometry2([[0.0, 1.0], [-1.0, 0.0]], (0.0, 2.0)),
            Isometry2([[0.0, -1.0], [1.0, 0.0]], (0.0, -2.0)),
            Isometry2(-eye, (0.0, 0.0)),
        )
    else:
        raise ValueError(f"unknown wallpaper group: {name!r}")
    return WallpaperGroup(name, gens)


def group_elements(group: WallpaperGroup, window) -> list[Isometry2]:
    """All distinct group elements whose offset lies in the closed window.

    ``window`` is (xmin, xmax, ymin, ymax).  Elements are found by
    breadth-first closure over generator products (inverses included) with
    duplicate removal on rounded entries; the search expands through a
    padded hull of the window and the origin so elements inside the window
    are reached even when intermediate products step outside it.  Returns
    a list in canonical order (lexicographic on matrix entries, then
    offset); an empty window yields an empty list.
    """
    xmin, xmax, ymin, ymax = (float(w) for w in window)
    if xmin > xmax or ymin > ymax:
        return []
    tol = 1e-9
    pad = 2.0 + 2.0 * max(
        (float(np.linalg.norm(g.offset)) for g in group.generators), default=1.0
    )
    exmin, exmax = min(xmin, 0.0) - pad, max(xmax, 0.0) + pad
    eymin, eymax = min(ymin, 0.0) - pad, max(ymax, 0.0) + pad

    steps = list(group.generators) + [invert(g) for g in group.generators]
    start = identity2()
    seen = {start.key(): start}
    frontier = [start]
    while frontier:
        cur = frontier.pop()
        for s in steps:
            nxt = compose(s, cur)
            ox, oy = nxt.offset
            if not (exmin <= ox <= exmax and eymin <= oy <= eymax):
                continue
            k = nxt.key()
            if k not in seen:
                seen[k] = nxt
                frontier.append(nxt)

    inside = [
        iso
        for iso in seen.values()
        if xmin - tol <= iso.offset[0] <= xmax + tol
        and ymin - tol <= iso.offset[1] <= ymax + tol
    ]
    return sorted(inside, key=lambda iso: iso.key())
