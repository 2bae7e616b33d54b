"""Benchmark catalog tests: references, error norms, reports and CLI."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from gebeam import bench, cli, solver


# ----------------------------------------------------------- geometry

def test_planar_arc_mesh_nodes():
    # [TRIVIAL] mesh nodes sit on the analytic quarter-circle
    r_fn, tan_fn, frame_fn = bench.planar_arc(2.0 * bench.L_STD / np.pi)
    pos, tri, conn, s = bench.curve_mesh("wk", r_fn, tan_fn, bench.L_STD, 4,
                                         frame_fn=frame_fn)
    R = 2.0 * bench.L_STD / np.pi
    for p in pos:
        assert np.isclose(np.hypot(p[0], p[1] - R), R, atol=1e-9 * R)
    # triads orthonormal with first column along the tangent
    eye = np.broadcast_to(np.eye(3), tri.shape)
    assert np.allclose(np.swapaxes(tri, -1, -2) @ tri, eye, atol=1e-12)


def test_straight_mesh_lengths():
    pos, tri, conn, s = bench.straight_mesh("cj", 5)
    assert np.isclose(pos[conn[-1][1], 0], bench.L_STD)
    assert np.allclose(np.diff(np.sort(s)), bench.L_STD / (len(s) - 1))


def test_helix_curve_tangent_consistency():
    # [TRIVIAL] tan_fn is the parameter derivative of r_fn
    r_fn, tan_fn, p_end = bench.helix_curve()
    h = 1e-6
    for b in np.linspace(0.1, p_end - 0.1, 7):
        fd = (r_fn(b + h) - r_fn(b - h)) / (2.0 * h)
        assert np.allclose(fd, tan_fn(b), atol=1e-5)


# ------------------------------------------------------- error norms

def _tiny_solution(zeta=100.0, n_ele=4):
    sec = bench.section_for(zeta)
    M = sec.EI3 * np.pi / (2.0 * bench.L_STD)
    pos, tri, conn, s = bench.straight_mesh("wk", n_ele)
    loads = [solver.PointMoment(n_ele, np.array([0.0, 0.0, M]))]
    return bench.solve_case("wk", pos, tri, conn, sec, loads,
                            [solver.Clamp(0)], bench._cfg(zeta, 1),
                            bench.L_STD, s)


def test_l2_error_self_reference():
    # [TRIVIAL] a solution measured against itself is exact
    sol = _tiny_solution()
    assert bench.l2_error(sol, bench.NumericRef(sol)) < 1e-14


def test_l2_error_against_analytic_quarter_circle():
    sol = _tiny_solution()
    ref = bench.bend2d_reference("bend2d-M", bench.section_for(100.0), [])
    err = bench.l2_error(sol, ref)
    assert 1e-7 < err < 1e-3


def test_l2_error_length_mismatch_raises():
    sol = _tiny_solution()
    ref = bench.AnalyticRef(lambda s: np.zeros(3), lambda s: np.zeros(3),
                            0.9 * bench.L_STD)
    with pytest.raises(ValueError, match="length mismatch"):
        bench.l2_error(sol, ref)


def test_l2_error_window_restricts_norm():
    sol = _tiny_solution()
    ref = bench.bend2d_reference("bend2d-M", bench.section_for(100.0), [])
    full = bench.l2_error(sol, ref)
    first = bench.l2_error(sol, ref, window=(0.0, bench.L_STD / 8.0))
    assert first > 0.0 and first != full


def test_observed_orders():
    # [TRIVIAL] exact fourth-order sequence
    errs = [1.0, 1.0 / 16.0, 1.0 / 256.0]
    assert np.allclose(bench.observed_orders(errs, [1, 2, 4])[1:], 4.0)


def test_energy_error_quarter_circle():
    sol = _tiny_solution()
    ref = bench.bend2d_reference("bend2d-M", bench.section_for(100.0), [])
    assert bench.energy_error(sol, ref) < 1e-10


# --------------------------------------------------- study behaviors

def test_bend2d_convergence_order():
    rows, _, _ = bench.bend2d_study("bend2d-M", "wk-tan", "mcs", 100.0,
                                    [2, 4, 8], 1)
    errs = [r["l2_err"] for r in rows]
    assert errs[0] > errs[1] > errs[2]
    assert abs(rows[-1]["order_l2"] - 4.0) < 0.5


def test_full_integration_locks_single_element():
    # [PAPER: single-element error grows strongly with slenderness under
    # full integration, while the strain re-interpolation is immune]
    def one_ele(lock, zeta):
        rows, _, _ = bench.bend2d_study("bend2d-M", "sk-tan", lock, zeta,
                                        [1], 1)
        return rows[0]["l2_err"]

    assert one_ele("fi", 1e4) / one_ele("fi", 10.0) > 10.0
    assert one_ele("mcs", 1e4) / one_ele("mcs", 10.0) < 1.05


def test_arc_tip_matches_reference_table():
    # [PAPER: Example 5 tip positions]
    _, tip = bench.arc_case("wk-tan", "mcs", 100.0, 8, 1)
    assert np.allclose(tip, bench.ARC_TIP_TABLE[("wk-tan", 100, 8)],
                       atol=1e-4)


def test_conservation_audit_force_balance():
    audit, _ = bench.twisted_helix_audit("wk-tan", n_ele=4, steps=6)
    scale = np.linalg.norm(audit["Fl"])
    assert np.linalg.norm(audit["F0"] - audit["Fl"]) < 1e-10 * scale
    assert np.linalg.norm(audit["M0"] - audit["Ml"]) < 1e-10


# ------------------------------------------------------- reports/CLI

def test_run_case_reports(tmp_path):
    out = tmp_path / "rep"
    payload = bench.run_case("bend2d-M", element="sk-tan", zeta=100.0,
                             meshes=[2, 4], steps=1, out=str(out),
                             dump=True)
    csv = (out / "bend2d-M_sk-tan.csv").read_text().splitlines()
    assert csv[0].split(",") == list(bench.CSV_SCHEMA)
    assert len(csv) == 3
    data = json.loads((out / "bend2d-M_sk-tan.json").read_text())
    assert data["rows"][1]["order_l2"] == pytest.approx(
        payload["rows"][1]["order_l2"])
    dump = (out / "bend2d-M_sk-tan_2.dat").read_text().splitlines()
    assert dump[0].lstrip("# ").split() == list("sxyz") + [
        "q0", "q1", "q2", "q3"]
    quat = np.array([[float(v) for v in ln.split()[4:]]
                     for ln in dump[1:]])
    assert np.allclose(np.linalg.norm(quat, axis=-1), 1.0, atol=1e-12)


def test_run_case_rejects_unknowns():
    with pytest.raises(ValueError, match="unknown case"):
        bench.run_case("frisbee")
    with pytest.raises(ValueError, match="unknown element"):
        bench.run_case("bend2d-M", element="beam188")
    with pytest.raises(bench.UnsupportedPolicy, match="mcs, fi, ri"):
        bench.run_case("bend2d-M", locking="ans")


def test_cli_run_and_config_override(tmp_path):
    runner = CliRunner()
    res = runner.invoke(cli.main, ["run", "bend2d-M", "--element", "sk-tan",
                                   "--zeta", "100", "--meshes", "2,4",
                                   "--steps", "1"])
    assert res.exit_code == 0 and "order_l2" in res.output

    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"element": "wk-tan", "zeta": 100,
                               "meshes": [8], "steps": 1}))
    res = runner.invoke(cli.main, ["run", "arc-segment",
                                   "--config", str(cfg)])
    assert res.exit_code == 0 and "wk-tan" in res.output
    res = runner.invoke(cli.main, ["run", "arc-segment", "--config",
                                   str(cfg), "--element", "sk-tan"])
    assert res.exit_code == 0 and "sk-tan" in res.output


def test_cli_rejects_ans_and_bad_meshes():
    runner = CliRunner()
    res = runner.invoke(cli.main, ["run", "bend2d-M", "--locking", "ans"])
    assert res.exit_code != 0
    assert "mcs, fi, ri" in res.output
    res = runner.invoke(cli.main, ["run", "bend2d-M", "--meshes", "1,two"])
    assert res.exit_code != 0
