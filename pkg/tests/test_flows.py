"""Unit tests for the load transfer model."""

import json

import numpy as np
import pytest

from interlock.assembly import core_indices, frame_indices, tiling_from_group
from interlock.blocking import BlockingGraph, dbg_combinatorial
from interlock.flows import (
    FlowError,
    closed_form,
    flow_grid,
    flow_metrics,
    initial_load,
    iterate,
    step,
    transfer_matrix,
    write_flow_csv,
    write_flow_json,
    write_flow_svg,
)


def _graph(n, arcs, frame, direction=(0.0, 0.0, -1.0)):
    return BlockingGraph(n, frozenset(arcs), direction, frozenset(frame))


def _wallpaper_result(name, m, n, method=closed_form):
    t = tiling_from_group(name, m, n)
    A = transfer_matrix(dbg_combinatorial(t))
    return method(A, initial_load(t))


def trapped_graph():
    # three core blocks propping each other up in a cycle, one frame block
    arcs = {(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2), (4, 4)}
    return _graph(4, arcs, {4})


def test_transfer_matrix_rows_are_stochastic():
    t = tiling_from_group("p4", 5, 5)
    A = transfer_matrix(dbg_combinatorial(t))
    assert A.n == 25
    dense = A.matrix.toarray()
    assert np.allclose(dense.sum(axis=1), 1.0)
    frame = frame_indices(5, 5)
    for i in range(25):
        if i + 1 in frame:
            assert dense[i, i] == 1.0 and dense[i].sum() == 1.0
        else:
            assert dense[i, i] == 0.0
            assert sorted(dense[i][dense[i] > 0]) == [0.5, 0.5]


def test_transfer_matrix_rejects_broken_frames():
    # frame node with an outgoing arc to a neighbor
    g = _graph(2, {(1, 1), (1, 2), (2, 2)}, {1, 2})
    with pytest.raises(ValueError):
        transfer_matrix(g)
    # frame node with no self-loop
    g = _graph(2, {(2, 2)}, {1, 2})
    with pytest.raises(ValueError):
        transfer_matrix(g)


def test_transfer_matrix_rejects_bad_core_degree():
    # core node 1 leaning on a single support
    g = _graph(3, {(1, 2), (2, 2), (3, 3)}, {2, 3})
    with pytest.raises(ValueError, match="core node"):
        transfer_matrix(g)
    # core self-loops make no physical sense
    g = _graph(3, {(1, 1), (1, 2), (2, 2), (3, 3)}, {2, 3})
    with pytest.raises(ValueError):
        transfer_matrix(g)


def test_initial_load_marks_core_cells():
    t = tiling_from_group("p1", 4, 5)
    x = initial_load(t)
    assert x.shape == (20,)
    core = core_indices(4, 5)
    for i in range(1, 21):
        assert x[i - 1] == (1.0 if i in core else 0.0)
    assert initial_load(t, core_value=2.5).sum() == pytest.approx(2.5 * len(core))
    with pytest.raises(ValueError):
        initial_load(t, core_value=-1.0)


def test_step_matches_matrix_action():
    t = tiling_from_group("pg", 4, 4)
    A = transfer_matrix(dbg_combinatorial(t))
    x = initial_load(t)
    manual = A.matrix.T @ x
    assert np.allclose(step(A, x), manual)
    with pytest.raises(ValueError):
        step(A, np.ones(3))


def test_step_conserves_mass():
    t = tiling_from_group("p4", 6, 6)
    A = transfer_matrix(dbg_combinatorial(t))
    x = initial_load(t)
    for _ in range(20):
        x = step(A, x)
    assert x.sum() == pytest.approx(16.0, abs=1e-12)


def test_iterate_agrees_with_closed_form():
    for name in ("p1", "pg", "p4"):
        a = _wallpaper_result(name, 6, 6, iterate)
        b = _wallpaper_result(name, 6, 6, closed_form)
        assert a.converged and b.converged
        assert set(a.frame_load) == set(b.frame_load)
        for j, v in a.frame_load.items():
            assert v == pytest.approx(b.frame_load[j], abs=1e-9)
        assert a.total_frame_mass() == pytest.approx(16.0, abs=1e-9)
        assert b.residual_core_mass == 0.0
        assert b.iterations == 0


def test_iterate_parameter_validation():
    t = tiling_from_group("p1", 3, 3)
    A = transfer_matrix(dbg_combinatorial(t))
    x = initial_load(t)
    with pytest.raises(ValueError):
        iterate(A, x, tol=0.0)
    with pytest.raises(ValueError):
        iterate(A, x, max_iter=0)


def test_trapped_cycle_raises_in_closed_form():
    A = transfer_matrix(trapped_graph())
    x = np.array([1.0, 1.0, 1.0, 0.0])
    with pytest.raises(FlowError, match="never drains") as exc:
        closed_form(A, x)
    assert exc.value.component == (1, 2, 3)


def test_trapped_cycle_never_converges():
    A = transfer_matrix(trapped_graph())
    x = np.array([1.0, 1.0, 1.0, 0.0])
    r = iterate(A, x, max_iter=50)
    assert not r.converged
    assert r.iterations == 50
    assert r.residual_core_mass == pytest.approx(3.0)
    with pytest.raises(ValueError):
        flow_metrics(r)


def test_flow_metrics_contents():
    r = _wallpaper_result("p4", 10, 10)
    m = flow_metrics(r)
    assert m["max_load"] == pytest.approx(4.88, abs=0.005)
    assert m["loaded_cells"] == sum(1 for v in r.frame_load.values() if v > 1e-9)
    # cv is taken over the loaded cells only
    loads = np.array([v for v in r.frame_load.values() if v > 1e-9])
    assert m["cv"] == pytest.approx(loads.std() / loads.mean(), rel=1e-12)
    assert m["iterations"] == 0


def test_flow_grid_layout():
    r = _wallpaper_result("p1", 4, 6)
    g = flow_grid(r, 4, 6)
    assert g.shape == (4, 6)
    # core cells stay zero, mass sits on the frame
    assert not g[1:-1, 1:-1].any()
    assert g.sum() == pytest.approx(8.0, abs=1e-9)


def test_p1_grid_is_transpose_symmetric():
    r = _wallpaper_result("p1", 10, 10)
    g = flow_grid(r, 10, 10)
    assert np.allclose(g, g.T)


def test_p4_grid_has_four_fold_symmetry():
    r = _wallpaper_result("p4", 10, 10)
    g = flow_grid(r, 10, 10)
    assert np.allclose(g, np.rot90(g))


def test_larger_grids_load_harder():
    small = flow_metrics(_wallpaper_result("p1", 6, 6))["max_load"]
    large = flow_metrics(_wallpaper_result("p1", 10, 10))["max_load"]
    assert large > small


def test_flow_csv_format(tmp_path):
    r = _wallpaper_result("p1", 3, 3)
    path = tmp_path / "flow.csv"
    write_flow_csv(r, 3, 3, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    vals = np.array([[float(v) for v in ln.split(",")] for ln in lines])
    assert vals.shape == (3, 3)
    assert vals.sum() == pytest.approx(1.0, abs=1e-6)
    assert vals[1, 1] == 0.0


def test_flow_json_format(tmp_path):
    r = _wallpaper_result("pg", 4, 4)
    path = tmp_path / "flow.json"
    write_flow_json(r, 4, 4, path)
    payload = json.loads(path.read_text())
    assert payload["rows"] == 4 and payload["cols"] == 4
    assert payload["converged"] is True
    assert payload["total_frame_mass"] == pytest.approx(4.0, abs=1e-6)
    assert set(payload["frame_load"]) == {str(j) for j in frame_indices(4, 4)}


def test_flow_svg_contents(tmp_path):
    r = _wallpaper_result("p4", 4, 4)
    path = tmp_path / "flow.svg"
    write_flow_svg(r, 4, 4, path)
    text = path.read_text()
    assert text.startswith('<?xml version="1.0"')
    assert text.count("<rect") == 16
    assert "</svg>" in text
    # every loaded frame cell prints its value
    loaded = sum(1 for v in r.frame_load.values() if v > 1e-9)
    assert text.count("<text") == loaded
