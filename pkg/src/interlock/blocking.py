"""Directional Blocking Graphs: which block catches which when the
assembly is pushed along a direction d.

Two constructions are provided.  The combinatorial one reads arcs straight
off the tiling (each core block leans on the two neighbors across its
white sides when pushed down); the geometric one nudges each core mesh
along d and records actual interpenetrations.  The two must agree on
gapless assemblies, which is the cross-validation the test suite runs.

Nodes are 1-based linear cell indices.  Frame nodes carry self-loops
(a frame block restrains itself); only core blocks emit other arcs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .assembly import SIDE_STEPS, Assembly, TruchetTiling, validate_tiling
from .block import WHITE_SIDES
from .mesh import DEFAULT_TOL, overlap, translate

DOWN = (0.0, 0.0, -1.0)


@dataclass(frozen=True)
class BlockingGraph:
    n_nodes: int
    arcs: frozenset
    direction: tuple
    frame: frozenset

    def out_arcs(self, i: int) -> list[tuple[int, int]]:
        return sorted(a for a in self.arcs if a[0] == i)


def dbg_combinatorial(t: TruchetTiling) -> BlockingGraph:
    """Arcs from each core cell to the two grid neighbors across its white
    sides, plus frame self-loops.  Implicit direction: straight down."""
    if not validate_tiling(t):
        raise ValueError("invalid tiling: adjacent colors clash")
    m, n = t.rows, t.cols
    arcs = set()
    frame = set()
    for r in range(1, m + 1):
        for c in range(1, n + 1):
            i = t.linear_index(r, c)
            if r in (1, m) or c in (1, n):
                frame.add(i)
                arcs.add((i, i))
                continue
            for side in sorted(WHITE_SIDES[int(t.orientation[r - 1, c - 1])]):
                dr, dc = SIDE_STEPS[side]
                arcs.add((i, t.linear_index(r + dr, c + dc)))
    return BlockingGraph(m * n, frozenset(arcs), DOWN, frozenset(frame))


def dbg_geometric(a: Assembly, d, eps_scale: float = 0.01, tol: float = DEFAULT_TOL) -> BlockingGraph:
    """Arcs i -> j for core i whose mesh, nudged by eps_scale block heights
    along d, penetrates block j.  Frame self-loops added unconditionally."""
    if a.gap != 0.0:
        raise ValueError("gapped assembly: contact relations would be lost")
    d = np.asarray(d, dtype=np.float64)
    norm = np.linalg.norm(d)
    if norm == 0.0:
        raise ValueError("direction must be nonzero")
    if not (0.0 < eps_scale <= 0.25):
        raise ValueError("eps_scale must be in (0, 0.25]")
    height = a.scale[2]
    shift = d / norm * (eps_scale * height)

    meshes = {index: mesh for index, _, mesh in a.blocks}
    arcs = {(j, j) for j in a.frame}
    for i in sorted(a.core):
        nudged = translate(meshes[i], shift)
        for j in sorted(meshes):
            if j != i and overlap(nudged, meshes[j], tol):
                arcs.add((i, j))
    return BlockingGraph(
        a.tiling.rows * a.tiling.cols,
        frozenset(arcs),
        tuple(float(v) for v in d / norm),
        a.frame,
    )


def write_edge_list(g: BlockingGraph, path) -> None:
    """One arc per line, "i j", 1-based, sorted."""
    with open(path, "w", encoding="ascii") as fh:
        for i, j in sorted(g.arcs):
            fh.write(f"{i} {j}\n")


def write_graph_json(g: BlockingGraph, path) -> None:
    payload = {
        "nodes": g.n_nodes,
        "direction": list(g.direction),
        "frame": sorted(g.frame),
        "arcs": [list(a) for a in sorted(g.arcs)],
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
