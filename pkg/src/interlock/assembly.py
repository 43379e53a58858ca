"""Assemblies as Truchet tilings: the p1/pg/p4 wallpaper patterns, the
alternating-color validity rule, block placement on the diamond lattice,
frame/core partition, and STL + manifest export.

Grid cells are addressed (row, col), 1-based, with linear index
(r - 1) * cols + c.  Cell (r, c) sits at r * (1, -1) + c * (1, 1) in
lattice units; the perimeter cells are the frame, the interior the core.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .block import BLOCK_CENTER_XY, WHITE_SIDES, oriented_block
from .isometry import Isometry3, WallpaperGroup, _R_CW
from .mesh import TriMesh, translate, scale as scale_mesh, write_stl

ROW_STEP = np.array([1.0, -1.0])
COL_STEP = np.array([1.0, 1.0])

# Grid-compass deltas in (row, col).
SIDE_STEPS = {"N": (-1, 0), "S": (1, 0), "W": (0, -1), "E": (0, 1)}
_OPPOSITE = {"N": "S", "S": "N", "W": "E", "E": "W"}


@dataclass(frozen=True)
class TruchetTiling:
    """An m×n grid of tile orientations 0..3."""

    rows: int
    cols: int
    orientation: np.ndarray
    group: str | None = None

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid dimensions must be positive")
        o = np.array(self.orientation, dtype=np.int64)
        if o.shape != (self.rows, self.cols):
            raise ValueError("orientation grid shape mismatch")
        if o.size and (o.min() < 0 or o.max() > 3):
            raise ValueError("orientations must be 0..3")
        o.flags.writeable = False
        object.__setattr__(self, "orientation", o)

    def linear_index(self, r: int, c: int) -> int:
        """1-based linear index of cell (r, c), both 1-based."""
        if not (1 <= r <= self.rows and 1 <= c <= self.cols):
            raise ValueError("cell out of range")
        return (r - 1) * self.cols + c

    def cell_of(self, index: int) -> tuple[int, int]:
        if not (1 <= index <= self.rows * self.cols):
            raise ValueError("index out of range")
        return (index - 1) // self.cols + 1, (index - 1) % self.cols + 1


def frame_indices(rows: int, cols: int) -> frozenset[int]:
    """Linear indices (1-based) of the perimeter cells."""
    out = set()
    for r in range(1, rows + 1):
        for c in range(1, cols + 1):
            if r in (1, rows) or c in (1, cols):
                out.add((r - 1) * cols + c)
    return frozenset(out)


def core_indices(rows: int, cols: int) -> frozenset[int]:
    return frozenset(range(1, rows * cols + 1)) - frame_indices(rows, cols)


def _group_name(g) -> str:
    if isinstance(g, WallpaperGroup):
        return g.name
    return str(g)


def tiling_from_group(g, m: int, n: int) -> TruchetTiling:
    """The symmetric orientation pattern for wallpaper group p1, pg, or p4.

    p1 repeats one orientation, pg alternates two by column, p4 cycles four
    in a 2×2-periodic pattern.
    """
    if m < 3 or n < 3:
        raise ValueError("need m, n >= 3 for a nonempty core")
    name = _group_name(g)
    rr = np.arange(1, m + 1)[:, None]
    cc = np.arange(1, n + 1)[None, :]
    if name == "p1":
        o = np.zeros((m, n), dtype=np.int64)
    elif name == "pg":
        o = np.where(cc % 2 == 0, 0, 3) + np.zeros((m, 1), dtype=np.int64)
    elif name == "p4":
        lut = {(1, 0): 0, (0, 0): 1, (0, 1): 2, (1, 1): 3}
        o = np.zeros((m, n), dtype=np.int64)
        for (rp, cp), k in lut.items():
            o[(rr % 2 == rp) & (cc % 2 == cp)] = k
    else:
        raise ValueError(f"unknown wallpaper group {name!r}")
    return TruchetTiling(m, n, o, group=name)


def validate_tiling(t: TruchetTiling) -> bool:
    """True iff every interior edge alternates colors: across each shared
    side, exactly one of the two facing sides is white."""
    o = t.orientation
    for r in range(t.rows):
        for c in range(t.cols):
            if c + 1 < t.cols:
                left = "E" in WHITE_SIDES[int(o[r, c])]
                right = "W" in WHITE_SIDES[int(o[r, c + 1])]
                if left == right:
                    return False
            if r + 1 < t.rows:
                upper = "S" in WHITE_SIDES[int(o[r, c])]
                lower = "N" in WHITE_SIDES[int(o[r + 1, c])]
                if upper == lower:
                    return False
    return True


def count_assemblies(m: int, n: int) -> int:
    """Number of valid m×n tilings up to the enumeration's symmetry
    quotient: 2^(m+n-3)."""
    if m < 2 or n < 2:
        raise ValueError("need m, n >= 2")
    return 2 ** (m + n - 3)


def rotate_tiling(t: TruchetTiling) -> TruchetTiling:
    """Quarter-turn clockwise: transpose the grid and advance every
    orientation by one."""
    o = (np.rot90(t.orientation, k=-1) + 1) % 4
    return TruchetTiling(t.cols, t.rows, o)


@dataclass(frozen=True)
class Assembly:
    """Placed blocks: (linear index, placement isometry, scaled mesh)
    triples plus the frame/core split.

    The placement isometry maps the canonical block to its pose in lattice
    units; the stored mesh additionally carries the diag(a, b, c) scale.
    """

    tiling: TruchetTiling
    blocks: tuple
    frame: frozenset
    core: frozenset
    gap: float
    scale: tuple


def cell_translation(r: int, c: int, gap: float = 0.0) -> np.ndarray:
    """Lattice-unit xy position of cell (r, c); gap > 0 spreads the lattice
    so every block gains gap/2 clearance per side."""
    return (1.0 + gap) * (r * ROW_STEP + c * COL_STEP)


def _placement(k: int, r: int, c: int, gap: float) -> Isometry3:
    rot = np.linalg.matrix_power(_R_CW, k).astype(np.float64)
    shift = BLOCK_CENTER_XY - rot @ BLOCK_CENTER_XY + cell_translation(r, c, gap)
    matrix = np.eye(3)
    matrix[:2, :2] = rot
    return Isometry3(matrix, np.array([shift[0], shift[1], 0.0]))


def build_assembly(t: TruchetTiling, gap: float = 0.0, scale=(1.0, 1.0, 1.0)) -> Assembly:
    """Place one oriented block per cell on the diamond lattice."""
    if not validate_tiling(t):
        raise ValueError("invalid tiling: adjacent colors clash")
    if gap < 0.0:
        raise ValueError("gap must be nonnegative")
    a, b, c = (float(s) for s in scale)
    if a <= 0.0 or b <= 0.0 or c <= 0.0:
        raise ValueError("scale factors must be positive")
    blocks = []
    for r in range(1, t.rows + 1):
        for col in range(1, t.cols + 1):
            k = int(t.orientation[r - 1, col - 1])
            tx, ty = cell_translation(r, col, gap)
            mesh = translate(oriented_block(k), (tx, ty, 0.0))
            mesh = scale_mesh(mesh, a, b, c)
            blocks.append((t.linear_index(r, col), _placement(k, r, col, gap), mesh))
    return Assembly(
        tiling=t,
        blocks=tuple(blocks),
        frame=frame_indices(t.rows, t.cols),
        core=core_indices(t.rows, t.cols),
        gap=float(gap),
        scale=(a, b, c),
    )


def export_assembly(assembly: Assembly, outdir, combined_name: str = "assembly.stl") -> dict:
    """Write one STL per block, a combined STL, and manifest.json mapping
    block index to file, orientation, frame/core flag, and placement."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t = assembly.tiling
    width = max(3, len(str(t.rows * t.cols)))
    entries = []
    for index, placement, mesh in assembly.blocks:
        r, c = t.cell_of(index)
        name = f"block_{index:0{width}d}.stl"
        write_stl(mesh, outdir / name)
        entries.append(
            {
                "index": index,
                "row": r,
                "col": c,
                "orientation": int(t.orientation[r - 1, c - 1]),
                "frame": index in assembly.frame,
                "file": name,
                "placement": {
                    "matrix": placement.matrix.tolist(),
                    "offset": placement.offset.tolist(),
                },
            }
        )
    write_stl([m for _, _, m in assembly.blocks], outdir / combined_name)
    manifest = {
        "rows": t.rows,
        "cols": t.cols,
        "group": t.group,
        "gap": assembly.gap,
        "scale": list(assembly.scale),
        "combined": combined_name,
        "blocks": entries,
    }
    with open(outdir / "manifest.json", "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
