"""Interlocking flow model: unit loads on core blocks propagate along
blocking-graph arcs, half to each of the block's two supporters, until the
frame has absorbed everything.

The transfer matrix A is row-stochastic (frame rows are absorbing unit
rows, core rows carry two 1/2 entries), so one step is multiplication by
its transpose and total mass is conserved exactly.  `iterate` runs the
propagation; `closed_form` solves the absorbing-chain limit directly and
serves as the oracle for it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .assembly import TruchetTiling, core_indices
from .blocking import BlockingGraph

LOADED_EPS = 1e-9


class FlowError(RuntimeError):
    """Raised when the flow has no absorbing limit.

    `component` holds the 1-based node indices of the strongly connected
    core component that traps mass, when one was identified.
    """

    def __init__(self, message, component=()):
        super().__init__(message)
        self.component = tuple(component)


@dataclass(frozen=True)
class TransferMatrix:
    """Row-stochastic |I|x|I| sparse matrix plus the frame/core split
    (0-based index arrays)."""

    matrix: sp.csr_matrix
    frame: np.ndarray
    core: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class FlowResult:
    frame_load: dict
    residual_core_mass: float
    iterations: int
    converged: bool

    def total_frame_mass(self) -> float:
        return float(sum(self.frame_load.values()))


def transfer_matrix(g: BlockingGraph) -> TransferMatrix:
    """Build A from a blocking graph: 1/2 per core arc, 1 on frame
    diagonals.  Core nodes must have exactly two outgoing arcs."""
    n = g.n_nodes
    frame = sorted(g.frame)
    out = {i: [] for i in range(1, n + 1)}
    for i, j in g.arcs:
        out[i].append(j)
    rows, cols, data = [], [], []
    for i in range(1, n + 1):
        targets = sorted(out[i])
        if i in g.frame:
            if targets != [i]:
                raise ValueError(f"frame node {i} must carry only its self-loop")
            rows.append(i - 1)
            cols.append(i - 1)
            data.append(1.0)
        else:
            if len(targets) != 2 or i in targets:
                raise ValueError(
                    f"unsupported block: core node {i} has out-arcs {targets}"
                )
            for j in targets:
                rows.append(i - 1)
                cols.append(j - 1)
                data.append(0.5)
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    frame_idx = np.array([j - 1 for j in frame], dtype=np.int64)
    core_idx = np.setdiff1d(np.arange(n), frame_idx)
    return TransferMatrix(matrix, frame_idx, core_idx)


def initial_load(t: TruchetTiling, core_value: float = 1.0) -> np.ndarray:
    """Load vector: core_value on core cells, 0 on the frame."""
    if core_value < 0.0:
        raise ValueError("core_value must be nonnegative")
    x = np.zeros(t.rows * t.cols)
    for i in core_indices(t.rows, t.cols):
        x[i - 1] = core_value
    return x


def step(A: TransferMatrix, x: np.ndarray) -> np.ndarray:
    """One propagation step: mass moves along arcs, so new = A^T x.
    Total mass is conserved (columns of A^T sum to 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise ValueError("load vector length mismatch")
    return A.matrix.T @ x


def _result(A: TransferMatrix, x: np.ndarray, iterations: int, converged: bool) -> FlowResult:
    frame_load = {int(j) + 1: float(x[j]) for j in A.frame}
    residual = float(x[A.core].sum()) if len(A.core) else 0.0
    return FlowResult(frame_load, residual, iterations, converged)


def iterate(A: TransferMatrix, x: np.ndarray, tol: float = 1e-12, max_iter: int = 10**6) -> FlowResult:
    """Propagate until the residual core mass drops below tol."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    x = np.asarray(x, dtype=np.float64).copy()
    if x.shape != (A.n,):
        raise ValueError("load vector length mismatch")
    residual = float(x[A.core].sum()) if len(A.core) else 0.0
    if residual < tol:
        return _result(A, x, 0, True)
    AT = A.matrix.T.tocsr()
    for it in range(1, max_iter + 1):
        x = AT @ x
        residual = float(x[A.core].sum())
        if residual < tol:
            return _result(A, x, it, True)
    return _result(A, x, max_iter, False)


def _trapped_component(A: TransferMatrix):
    """A strongly connected core component with no arc leaving it, if any
    exists (1-based indices), else None."""
    k = len(A.core)
    if k == 0:
        return None
    Q = A.matrix[A.core][:, A.core].tocsr()
    R = A.matrix[A.core][:, A.frame].tocsr()
    n_comp, labels = connected_components(Q, directed=True, connection="strong")
    leaks_to_frame = np.asarray(R.sum(axis=1)).ravel() > 0.0
    for comp in range(n_comp):
        members = np.nonzero(labels == comp)[0]
        if leaks_to_frame[members].any():
            continue
        sub = Q[members]
        inside = np.zeros(k, dtype=bool)
        inside[members] = True
        if not inside[sub.indices].all():
            continue
        return tuple(int(A.core[i]) + 1 for i in members)
    return None


def _spectral_radius_est(Q: sp.csr_matrix, iters: int = 500) -> float:
    k = Q.shape[0]
    if k == 0 or Q.nnz == 0:
        return 0.0
    v = np.full(k, 1.0 / k)
    rho = 0.0
    for _ in range(iters):
        w = Q @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        rho = nw / np.linalg.norm(v)
        v = w / nw
    return float(rho)


def closed_form(A: TransferMatrix, x: np.ndarray) -> FlowResult:
    """Absorbing-chain limit: frame load = R^T (I - Q^T)^{-1} x_core with
    Q, R the core->core and core->frame sub-blocks of A."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise ValueError("load vector length mismatch")
    trapped = _trapped_component(A)
    if trapped is not None:
        raise FlowError(
            f"non-absorbing cycle: core component {trapped} never drains",
            component=trapped,
        )
    k = len(A.core)
    out = np.zeros(A.n)
    out[A.frame] = x[A.frame]
    if k:
        Q = A.matrix[A.core][:, A.core].tocsr()
        if _spectral_radius_est(Q) >= 1.0 - 1e-12:
            raise FlowError("non-absorbing cycle: spectral radius of Q is not < 1")
        R = A.matrix[A.core][:, A.frame].tocsr()
        system = (sp.identity(k, format="csc") - Q.T.tocsc()).tocsc()
        y = spsolve(system, x[A.core])
        if k == 1:
            y = np.atleast_1d(y)
        out[A.frame] += R.T @ y
    frame_load = {int(j) + 1: float(out[j]) for j in A.frame}
    return FlowResult(frame_load, 0.0, 0, True)


def flow_metrics(r: FlowResult) -> dict:
    """max load, loaded frame-cell count, coefficient of variation over the
    loaded cells, iterations."""
    if not r.converged:
        raise ValueError("unconverged flow has no metrics")
    loads = np.array(sorted(r.frame_load.values()), dtype=np.float64)
    loaded = loads[loads > LOADED_EPS]
    cv = float(loaded.std() / loaded.mean()) if len(loaded) else 0.0
    return {
        "max_load": float(loads.max()) if len(loads) else 0.0,
        "loaded_cells": int(len(loaded)),
        "cv": cv,
        "iterations": r.iterations,
    }


# ---------------------------------------------------------------------------
# exports

def flow_grid(r: FlowResult, rows: int, cols: int) -> np.ndarray:
    """m x n grid with frame cells filled and core cells 0."""
    grid = np.zeros((rows, cols))
    for j, load in r.frame_load.items():
        grid[(j - 1) // cols, (j - 1) % cols] = load
    return grid


def write_flow_csv(r: FlowResult, rows: int, cols: int, path) -> None:
    grid = flow_grid(r, rows, cols)
    with open(path, "w", encoding="ascii") as fh:
        for row in grid:
            fh.write(",".join(f"{v:.6f}" for v in row) + "\n")


def write_flow_json(r: FlowResult, rows: int, cols: int, path) -> None:
    payload = {
        "rows": rows,
        "cols": cols,
        "frame_load": {str(j): round(v, 6) for j, v in sorted(r.frame_load.items())},
        "residual_core_mass": round(r.residual_core_mass, 6),
        "iterations": r.iterations,
        "converged": r.converged,
        "total_frame_mass": round(r.total_frame_mass(), 6),
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_flow_svg(r: FlowResult, rows: int, cols: int, path, cell: int = 40) -> None:
    """Static heatmap: one square per cell, frame cells shaded by load with
    the value printed."""
    grid = flow_grid(r, rows, cols)
    vmax = grid.max()
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{cols * cell}" '
        f'height="{rows * cell}" font-family="monospace" font-size="{cell // 4}">',
    ]
    for i in range(rows):
        for j in range(cols):
            v = grid[i, j]
            shade = 255 - int(round(180.0 * v / vmax)) if vmax > 0 and v > 0 else 255
            lines.append(
                f'<rect x="{j * cell}" y="{i * cell}" width="{cell}" height="{cell}" '
                f'fill="rgb({shade},{shade},255)" stroke="black"/>'
            )
            if v > LOADED_EPS:
                lines.append(
                    f'<text x="{j * cell + cell // 2}" y="{i * cell + cell // 2}" '
                    f'text-anchor="middle" dominant-baseline="middle">{v:.2f}</text>'
                )
    lines.append("</svg>")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
