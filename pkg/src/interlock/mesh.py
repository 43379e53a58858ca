"""Indexed triangle meshes with the geometric predicates the assembly and
blocking code relies on, plus binary STL and OBJ file IO.

Meshes are immutable: affine operations return new instances.  The overlap
predicate reports strict interior penetration only; surface-to-surface
contact (the normal situation between neighboring blocks in a gapless
assembly) is not overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .isometry import Isometry3

DEFAULT_TOL = 1e-9
_CHAIN_DECIMALS = 9


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Vertex array (V, 3) and triangle index array (T, 3).

    Triangles are wound so their normals point out of the enclosed solid.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64)
        t = np.array(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError("vertices must have shape (V, 3)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("triangles must have shape (T, 3)")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        v.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    def corners(self) -> np.ndarray:
        """Triangle soup view, shape (T, 3, 3)."""
        return self.vertices[self.triangles]


def _undirected_edges(triangles: np.ndarray) -> np.ndarray:
    e = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]
    )
    return np.sort(e, axis=1)


def euler_characteristic(m: TriMesh) -> int:
    """V - E + F with E counted from unique undirected edges."""
    edges = np.unique(_undirected_edges(m.triangles), axis=0)
    return int(len(m.vertices) - len(edges) + len(m.triangles))


def validate_mesh(m: TriMesh) -> None:
    """Raise ValueError unless the mesh is closed, consistently oriented
    watertight, free of degenerate triangles, and positively oriented."""
    soup = m.corners()
    areas = np.linalg.norm(
        np.cross(soup[:, 1] - soup[:, 0], soup[:, 2] - soup[:, 0]), axis=1
    )
    if np.any(areas <= 0.0):
        raise ValueError("degenerate triangle")
    directed = {}
    for a, b, c in m.triangles:
        for i, j in ((a, b), (b, c), (c, a)):
            key = (int(i), int(j))
            directed[key] = directed.get(key, 0) + 1
    for (i, j), count in directed.items():
        if count != 1:
            raise ValueError(f"directed edge {(i, j)} used {count} times")
        if directed.get((j, i), 0) != 1:
            raise ValueError(f"edge {{{i}, {j}}} is not shared by two opposed triangles")
    if signed_volume(m) <= 0.0:
        raise ValueError("signed volume is not positive")


def signed_volume(m: TriMesh) -> float:
    """Divergence-theorem volume: sum of det(p1, p2, p3) / 6."""
    soup = m.corners()
    return float(np.einsum("ij,ij->", soup[:, 0], np.cross(soup[:, 1], soup[:, 2])) / 6.0)


def cross_section_area(m: TriMesh, z: float) -> float:
    """Area of the polygon(s) cut by the plane at height ``z``.

    Triangle/plane segments are chained into closed loops and measured with
    the shoelace formula.  Slices outside the open vertical extent or
    through a vertex plane are rejected.
    """
    z = float(z)
    zs = m.vertices[:, 2]
    if not (zs.min() < z < zs.max()):
        raise ValueError("degenerate slice")
    if np.any(np.abs(zs - z) < 1e-12):
        raise ValueError("degenerate slice")

    segments = []
    for tri in m.triangles:
        pts = m.vertices[tri]
        below = pts[:, 2] < z
        n_below = int(below.sum())
        if n_below == 0 or n_below == 3:
            continue
        lone = int(np.nonzero(below == (n_below == 1))[0][0])
        ends = []
        for other in range(3):
            if other == lone:
                continue
            p0, p1 = pts[lone], pts[other]
            t = (z - p0[2]) / (p1[2] - p0[2])
            q = p0 + t * (p1 - p0)
            ends.append((q[0], q[1]))
        segments.append(tuple(ends))

    def key(pt):
        return (round(pt[0], _CHAIN_DECIMALS), round(pt[1], _CHAIN_DECIMALS))

    link = {}
    for idx, (a, b) in enumerate(segments):
        link.setdefault(key(a), []).append((idx, b))
        link.setdefault(key(b), []).append((idx, a))
    if any(len(ends) != 2 for ends in link.values()):
        raise ValueError("slice does not chain into closed loops")

    used = set()
    total = 0.0
    for idx, (a, b) in enumerate(segments):
        if idx in used:
            continue
        used.add(idx)
        loop = [a, b]
        while key(loop[-1]) != key(loop[0]):
            step = [
                (j, nxt) for j, nxt in link[key(loop[-1])] if j not in used
            ]
            if not step:
                raise ValueError("slice does not chain into closed loops")
            j, nxt = step[0]
            used.add(j)
            loop.append(nxt)
        xs = np.array([p[0] for p in loop[:-1]])
        ys = np.array([p[1] for p in loop[:-1]])
        total += 0.5 * abs(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1)))
    return float(total)


def translate(m: TriMesh, d) -> TriMesh:
    d = np.asarray(d, dtype=np.float64)
    return TriMesh(m.vertices + d, m.triangles)


def scale(m: TriMesh, a: float, b: float, c: float) -> TriMesh:
    if a <= 0.0 or b <= 0.0 or c <= 0.0:
        raise ValueError("scale factors must be positive")
    return TriMesh(m.vertices * np.array([a, b, c]), m.triangles)


def apply_isometry(m: TriMesh, iso: Isometry3) -> TriMesh:
    return TriMesh(m.vertices @ iso.matrix.T + iso.offset, m.triangles)


def aabb(m: TriMesh) -> tuple[np.ndarray, np.ndarray]:
    return m.vertices.min(axis=0), m.vertices.max(axis=0)


def point_in_mesh(p, m: TriMesh, tol: float = DEFAULT_TOL, rng=None) -> bool:
    """Strict interior test: parity ray casting, with points within ``tol``
    of the surface classified as outside.  Grazing rays are retried in a
    fresh random direction (seeded, so the call is deterministic)."""
    p = np.asarray(p, dtype=np.float64)
    soup = m.corners()
    if _kernels.point_tris_dist(p, soup) <= tol:
        return False
    if rng is None:
        rng = np.random.default_rng(0x51CE)
    for _ in range(64):
        d = rng.standard_normal(3)
        n = np.linalg.norm(d)
        if n < 1e-12:
            continue
        hits, ok = _kernels.ray_hits(p, d / n, soup)
        if ok:
            return hits % 2 == 1
    raise RuntimeError("parity ray casting kept grazing after 64 retries")


def _any_strictly_inside(points, target: TriMesh, tol: float, rng) -> bool:
    for p in points:
        if point_in_mesh(p, target, tol, rng=rng):
            return True
    return False


def _interior_samples(m: TriMesh, tol: float, rng) -> np.ndarray:
    """Triangle centroids nudged inward, kept only if interior to ``m``.

    Catches volume overlap between meshes whose boundaries only graze,
    where no vertex and no proper crossing gives the game away.
    """
    c = m.corners()
    n = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    ln = np.linalg.norm(n, axis=1)
    keep = ln > tol
    if not keep.any():
        return np.empty((0, 3))
    lo, hi = aabb(m)
    delta = max(1e3 * tol, 1e-6 * float(np.linalg.norm(hi - lo)))
    pts = c[keep].mean(axis=1) - n[keep] / ln[keep, None] * delta
    ok = [point_in_mesh(p, m, tol, rng=rng) for p in pts]
    return pts[np.array(ok, dtype=bool)]


def overlap(a: TriMesh, b: TriMesh, tol: float = DEFAULT_TOL) -> bool:
    """True iff the open interiors intersect with penetration beyond ``tol``.

    Checked as (i) a proper triangle-triangle crossing with mutual
    plane-penetration deeper than ``tol``, (ii) a vertex or the vertex
    centroid of one mesh strictly inside the other, or (iii) an inward
    nudged surface sample of one mesh strictly inside both, which catches
    grazing-boundary overlaps such as coincident copies.  Exactly-touching
    faces do not count.
    """
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    amin, amax = aabb(a)
    bmin, bmax = aabb(b)
    if np.any(amin > bmax + tol) or np.any(bmin > amax + tol):
        return False
    ta = a.corners()
    tb = b.corners()
    if _kernels.tri_cross_any(ta, tb, tol):
        return True
    rng = np.random.default_rng(0x0EC4)
    pts_a = np.vstack([a.vertices, a.vertices.mean(axis=0)])
    if _any_strictly_inside(pts_a, b, tol, rng):
        return True
    pts_b = np.vstack([b.vertices, b.vertices.mean(axis=0)])
    if _any_strictly_inside(pts_b, a, tol, rng):
        return True
    if _any_strictly_inside(_interior_samples(a, tol, rng), b, tol, rng):
        return True
    return _any_strictly_inside(_interior_samples(b, tol, rng), a, tol, rng)


def mesh_distance(a: TriMesh, b: TriMesh) -> float:
    """Min vertex-to-surface distance between two meshes (both directions).

    Exact for contacts across flat faces, which is how assembled blocks
    meet; zero means touching.
    """
    ta = a.corners()
    tb = b.corners()
    best = np.inf
    for p in a.vertices:
        best = min(best, _kernels.point_tris_dist(p, tb))
    for p in b.vertices:
        best = min(best, _kernels.point_tris_dist(p, ta))
    return float(best)


# ---------------------------------------------------------------------------
# file IO

_STL_REC = np.dtype(
    [("normal", "<f4", (3,)), ("corner", "<f4", (3, 3)), ("attr", "<u2")]
)


def _soups(meshes) -> np.ndarray:
    if isinstance(meshes, TriMesh):
        meshes = [meshes]
    parts = [m.corners() for m in meshes]
    if not parts:
        return np.zeros((0, 3, 3))
    return np.concatenate(parts)


def write_stl(meshes, path, tag: str = "interlock") -> None:
    """Binary STL: 80-byte zero-padded header, little-endian uint32 count,
    then per triangle 12 float32 (normal + corners) and a zero uint16."""
    soup = _soups(meshes)
    n = np.cross(soup[:, 1] - soup[:, 0], soup[:, 2] - soup[:, 0])
    lengths = np.linalg.norm(n, axis=1)
    safe = np.where(lengths > 0.0, lengths, 1.0)
    n = np.where(lengths[:, None] > 0.0, n / safe[:, None], 0.0)
    rec = np.zeros(len(soup), dtype=_STL_REC)
    rec["normal"] = n.astype("<f4")
    rec["corner"] = soup.astype("<f4")
    header = tag.encode("ascii")[:80].ljust(80, b"\0")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.uint32(len(soup)).tobytes())
        fh.write(rec.tobytes())


def read_stl_soup(path):
    """Raw binary STL payload: (header bytes, normals, corner soup, attrs),
    all exactly as stored (float32)."""
    with open(path, "rb") as fh:
        header = fh.read(80)
        count = int(np.frombuffer(fh.read(4), dtype="<u4")[0])
        rec = np.frombuffer(fh.read(count * _STL_REC.itemsize), dtype=_STL_REC)
    if len(rec) != count:
        raise ValueError("truncated STL file")
    return header, rec["normal"], rec["corner"], rec["attr"]


def read_stl(path) -> TriMesh:
    """Read a binary STL and weld exactly-equal corners into a TriMesh."""
    _, _, soup, _ = read_stl_soup(path)
    flat = soup.reshape(-1, 3).astype(np.float64)
    vertices, inverse = np.unique(flat, axis=0, return_inverse=True)
    return TriMesh(vertices, inverse.reshape(-1, 3))


def write_obj(meshes, path, names=None) -> None:
    """OBJ text: "v x y z" lines then 1-based "f i j k" lines."""
    if isinstance(meshes, TriMesh):
        meshes = [meshes]
    lines = []
    offset = 0
    for idx, m in enumerate(meshes):
        if names is not None:
            lines.append(f"o {names[idx]}")
        for x, y, z in m.vertices:
            lines.append(f"v {x:.9g} {y:.9g} {z:.9g}")
        for a, b, c in m.triangles:
            lines.append(f"f {a + 1 + offset} {b + 1 + offset} {c + 1 + offset}")
        offset += len(m.vertices)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
