"""Enumerate every valid m x n tiling, canonicalize, and screen the
candidates with the flow model.

A valid tiling is exactly a choice of one horizontal letter per row
(W or E: the side of the row's white horizontal arcs) and one vertical
letter per column (N or S), so there are 2^(m+n) valid orientation grids.
Dedup quotients by the letter-complement group of order 8 generated by
complementing all row letters, all column letters, or all column letters
but the first.  That action is free, giving exactly 2^(m+n-3) classes,
which is the published count; it is NOT the rotate/mirror dihedral group
(whose orbit count differs).  The canonical representative, first row
letter W and first two column letters N, is the lexicographically
smallest orientation grid in its class.

The first-row/first-column propagation is cross-checked against a brute
force scan of all 4^(m*n) orientation grids on small grids.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import flows
from .assembly import TruchetTiling, build_assembly, export_assembly, validate_tiling
from .block import WHITE_SIDES

DEDUP_GROUP = "letter-complement group of order 8 (free action), not dihedral"

# orientation = ORIENT_FROM_VH[v, h]; v: 0=N 1=S, h: 0=W 1=E
ORIENT_FROM_VH = np.array([[0, 1], [3, 2]], dtype=np.int64)

METRICS = ("max_load", "cv", "loaded_cells")


@dataclass(frozen=True)
class CandidateSet:
    rows: int
    cols: int
    tilings: tuple
    results: tuple = None
    metrics: tuple = None


@dataclass(frozen=True)
class RankedCandidate:
    rank: int
    position: int
    tiling: TruchetTiling
    result: flows.FlowResult
    metrics: dict
    converged: bool


def grid_from_letters(h_bits, v_bits) -> np.ndarray:
    h = np.asarray(h_bits, dtype=np.int64)
    v = np.asarray(v_bits, dtype=np.int64)
    return ORIENT_FROM_VH[v[None, :], h[:, None]]


def letters_from_grid(o: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row letters (0=W, 1=E) and column letters (0=N, 1=S) of a valid
    orientation grid."""
    o = np.asarray(o)
    h = np.isin(o[:, 0], (1, 2)).astype(np.int64)
    v = np.isin(o[0, :], (2, 3)).astype(np.int64)
    return h, v


def canonicalize(t: TruchetTiling) -> TruchetTiling:
    """The class representative: complement letters until the first row
    letter is W and the first two column letters are N."""
    if not validate_tiling(t):
        raise ValueError("invalid tiling: adjacent colors clash")
    h, v = letters_from_grid(t.orientation)
    if h[0]:
        h = 1 - h
    if v[0]:
        v = 1 - v
    if len(v) > 1 and v[1]:
        v = np.concatenate([v[:1], 1 - v[1:]])
    return TruchetTiling(t.rows, t.cols, grid_from_letters(h, v))


def enumerate_tilings(m: int, n: int) -> CandidateSet:
    """All 2^(m+n-3) canonical tilings, in lexicographic orientation-grid
    order.  Small grids are cross-checked against brute force."""
    if m < 3 or n < 3:
        raise ValueError("need m, n >= 3")
    tilings = []
    for v_tail in itertools.product((0, 1), repeat=n - 2):
        v = np.array((0, 0) + v_tail, dtype=np.int64)
        for h_tail in itertools.product((0, 1), repeat=m - 1):
            h = np.array((0,) + h_tail, dtype=np.int64)
            tilings.append(TruchetTiling(m, n, grid_from_letters(h, v)))
    if m * n <= 9:
        brute = brute_force_tilings(m, n)
        ours = {t.orientation.tobytes() for t in tilings}
        theirs = {t.orientation.tobytes() for t in brute}
        if ours != theirs:
            raise RuntimeError(
                "internal consistency error: propagation and brute force disagree"
            )
    return CandidateSet(m, n, tuple(tilings))


def _edge_luts() -> tuple[np.ndarray, np.ndarray]:
    """Pairwise validity tables derived from the white-side sets: exactly
    one of the two facing sides is white."""
    h_ok = np.zeros((4, 4), dtype=bool)
    v_ok = np.zeros((4, 4), dtype=bool)
    for a in range(4):
        for b in range(4):
            h_ok[a, b] = ("E" in WHITE_SIDES[a]) != ("W" in WHITE_SIDES[b])
            v_ok[a, b] = ("S" in WHITE_SIDES[a]) != ("N" in WHITE_SIDES[b])
    return h_ok, v_ok


def brute_force_tilings(m: int, n: int) -> list[TruchetTiling]:
    """Scan all 4^(m*n) orientation grids with the per-edge rule, then
    canonicalize and dedup.  Oracle for enumerate_tilings; m*n <= 12."""
    cells = m * n
    if cells > 12:
        raise ValueError("brute force limited to m*n <= 12")
    h_ok, v_ok = _edge_luts()
    total = 4**cells
    chunk = 1 << 20
    seen = {}
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        digits = np.empty((cells, len(codes)), dtype=np.int64)
        for pos in range(cells):
            digits[pos] = ((codes >> np.uint64(2 * pos)) & np.uint64(3)).astype(np.int64)
        ok = np.ones(len(codes), dtype=bool)
        for r in range(m):
            for c in range(n):
                pos = r * n + c
                if c + 1 < n:
                    ok &= h_ok[digits[pos], digits[pos + 1]]
                if r + 1 < m:
                    ok &= v_ok[digits[pos], digits[pos + n]]
        for col in np.nonzero(ok)[0]:
            o = digits[:, col].reshape(m, n)
            rep = canonicalize(TruchetTiling(m, n, o))
            seen[rep.orientation.tobytes()] = rep
    return sorted(seen.values(), key=lambda t: tuple(t.orientation.ravel()))


def _closed_form_batch(tilings, m: int, n: int):
    """Vectorized absorbing-chain solve for a batch of same-size tilings.
    Returns the per-candidate frame-load grids, shape (B, m, n)."""
    core_cells = [(r, c) for r in range(1, m - 1) for c in range(1, n - 1)]
    frame_cells = [
        (r, c)
        for r in range(m)
        for c in range(n)
        if r in (0, m - 1) or c in (0, n - 1)
    ]
    core_pos = {cell: i for i, cell in enumerate(core_cells)}
    frame_pos = {cell: i for i, cell in enumerate(frame_cells)}
    k, f = len(core_cells), len(frame_cells)
    B = len(tilings)

    hb = np.empty((B, m), dtype=np.int64)
    vb = np.empty((B, n), dtype=np.int64)
    for i, t in enumerate(tilings):
        hb[i], vb[i] = letters_from_grid(t.orientation)

    Q = np.zeros((B, k, k))
    R = np.zeros((B, k, f))
    for ci, (r, c) in enumerate(core_cells):
        for bits, targets in (
            (hb[:, r], ((r, c - 1), (r, c + 1))),
            (vb[:, c], ((r - 1, c), (r + 1, c))),
        ):
            for bit, cell in enumerate(targets):
                sel = bits == bit
                if cell in core_pos:
                    Q[sel, ci, core_pos[cell]] += 0.5
                else:
                    R[sel, ci, frame_pos[cell]] += 0.5

    system = np.broadcast_to(np.eye(k), (B, k, k)) - np.transpose(Q, (0, 2, 1))
    y = np.linalg.solve(system, np.ones((B, k, 1)))[..., 0]
    frame_vec = np.einsum("bkf,bk->bf", R, y)
    grids = np.zeros((B, m, n))
    for cell, i in frame_pos.items():
        grids[:, cell[0], cell[1]] = frame_vec[:, i]
    return grids


def evaluate(c: CandidateSet, chunk: int = 2048) -> CandidateSet:
    """Flows for every candidate: batched closed-form solve, falling back
    to the per-candidate solvers if a batch turns out singular."""
    m, n = c.rows, c.cols
    results = []
    metrics = []
    for start in range(0, len(c.tilings), chunk):
        batch = c.tilings[start : start + chunk]
        try:
            grids = _closed_form_batch(batch, m, n)
            batch_results = []
            for t, grid in zip(batch, grids):
                frame_load = {
                    t.linear_index(r + 1, col + 1): float(grid[r, col])
                    for r in range(m)
                    for col in range(n)
                    if r in (0, m - 1) or col in (0, n - 1)
                }
                batch_results.append(flows.FlowResult(frame_load, 0.0, 0, True))
        except np.linalg.LinAlgError:
            batch_results = [_single_flow(t) for t in batch]
        for res in batch_results:
            results.append(res)
            metrics.append(flows.flow_metrics(res) if res.converged else None)
    return CandidateSet(m, n, c.tilings, tuple(results), tuple(metrics))


def _single_flow(t: TruchetTiling) -> flows.FlowResult:
    from .blocking import dbg_combinatorial

    A = flows.transfer_matrix(dbg_combinatorial(t))
    x = flows.initial_load(t)
    try:
        return flows.closed_form(A, x)
    except flows.FlowError:
        return flows.iterate(A, x)


def screen(c: CandidateSet, metric: str = "max_load") -> list[RankedCandidate]:
    """Rank all candidates by the chosen metric, ascending.  Unconverged
    candidates sort last; ties keep canonical enumeration order."""
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    if not c.tilings:
        raise ValueError("empty candidate set")
    if c.results is None:
        c = evaluate(c)
    order = sorted(
        range(len(c.tilings)),
        key=lambda i: (0, c.metrics[i][metric], i)
        if c.results[i].converged
        else (1, 0.0, i),
    )
    ranked = []
    for rank, i in enumerate(order, start=1):
        ranked.append(
            RankedCandidate(
                rank=rank,
                position=i,
                tiling=c.tilings[i],
                result=c.results[i],
                metrics=c.metrics[i] or {},
                converged=c.results[i].converged,
            )
        )
    return ranked


def orientation_string(t: TruchetTiling) -> str:
    return "".join(str(int(v)) for v in t.orientation.ravel())


def write_ranking_csv(ranked, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("rank,orientations,converged,max_load,cv,loaded_cells\n")
        for rc in ranked:
            if rc.converged:
                fh.write(
                    f"{rc.rank},{orientation_string(rc.tiling)},true,"
                    f"{rc.metrics['max_load']:.6f},{rc.metrics['cv']:.6f},"
                    f"{rc.metrics['loaded_cells']}\n"
                )
            else:
                fh.write(f"{rc.rank},{orientation_string(rc.tiling)},false,,,\n")


def write_ranking_json(ranked, rows, cols, metric, path) -> None:
    payload = {
        "rows": rows,
        "cols": cols,
        "metric": metric,
        "count": len(ranked),
        "dedup_group": DEDUP_GROUP,
        "candidates": [
            {
                "rank": rc.rank,
                "orientations": orientation_string(rc.tiling),
                "converged": rc.converged,
                "metrics": {
                    k: (round(v, 6) if isinstance(v, float) else v)
                    for k, v in sorted(rc.metrics.items())
                },
            }
            for rc in ranked
        ],
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def export_top_k(ranked, k: int, outdir, gap: float = 0.0, scale=(1.0, 1.0, 1.0)) -> None:
    """STL export of the k best candidates, one subdirectory per rank."""
    from pathlib import Path

    outdir = Path(outdir)
    for rc in ranked[:k]:
        a = build_assembly(rc.tiling, gap=gap, scale=scale)
        export_assembly(a, outdir / f"rank_{rc.rank:03d}")
