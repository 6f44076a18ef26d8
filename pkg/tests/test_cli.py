import json

from capfilm.cli import main
from capfilm.io_utils import dumps_json


def run(args):
    return main(args)


def test_cap_command(tmp_path):
    out = tmp_path / "o"
    assert run(["cap", "--delta", "0.1", "--eps", "0.05", "--out", str(out)]) == 0
    rep = json.loads((out / "cap.json").read_text())
    assert rep["schema"] == 1
    assert abs(rep["roundtrip_volume_residual"]) <= 1e-11
    assert rep["cap"]["lambda"] > 0
    assert (out / "cap_table.csv").read_text().splitlines()[0] == "eps,theta,z_C,R,lambda,apex_height"


def test_cap_deterministic_output(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    run(["cap", "--delta", "0.1", "--eps", "0.02", "--out", str(a)])
    run(["cap", "--delta", "0.1", "--eps", "0.02", "--out", str(b)])
    assert (a / "cap.json").read_bytes().replace(str(a).encode(), b"X") == (
        b / "cap.json"
    ).read_bytes().replace(str(b).encode(), b"X")


def test_ode_command(tmp_path):
    out = tmp_path / "o"
    assert run(["ode", "--delta", "0.1", "--eps", "0.01", "--out", str(out)]) == 0
    rep = json.loads((out / "ode_report.json").read_text())
    assert abs(rep["ode"]["residuals"]["pole"]) <= 1e-9
    lines = (out / "profile.csv").read_text().splitlines()
    assert lines[0] == "r,z,psi"
    assert len(lines) > 10


def test_invalid_config_exit_code(tmp_path):
    assert run(["cap", "--delta", "0.7", "--eps", "0.05", "--out", str(tmp_path)]) == 2
    assert run(["cap", "--delta", "0.1", "--eps", "-1", "--out", str(tmp_path)]) == 2


def test_solver_failure_exit_code(tmp_path):
    # beyond the cap family's range: VOLUME_TOO_LARGE -> exit 3
    assert run(["cap", "--delta", "0.1", "--eps", "30", "--out", str(tmp_path)]) == 3


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "wire.json"
    cfg.write_text(json.dumps({"kind": "circle", "params": {"radius": 1.0}, "delta": 0.2, "eps": 0.01}))
    out = tmp_path / "o"
    assert run(["cap", "--config", str(cfg), "--delta", "0.1", "--out", str(out)]) == 0
    rep = json.loads((out / "cap.json").read_text())
    assert rep["config"]["delta"] == 0.1  # flag wins
    assert rep["config"]["eps"] == 0.01  # config value survives


def test_env_output_dir(tmp_path, monkeypatch):
    env_out = tmp_path / "envdir"
    monkeypatch.setenv("CAPFILM_OUT", str(env_out))
    assert run(["cap", "--delta", "0.1", "--eps", "0.01"]) == 0
    assert (env_out / "cap.json").exists()


def test_foliate_cap(tmp_path):
    out = tmp_path / "o"
    code = run(
        ["foliate", "--delta", "0.1", "--eps-grid", "1e-4:0.05:8", "--solver", "cap", "--out", str(out)]
    )
    assert code == 0
    rep = json.loads((out / "sweep_report.json").read_text())
    sweep = rep["sweep"]
    assert sweep["ordering_ok"] and sweep["symmetry_ok"]
    assert sweep["curvature_bound_ok"] and sweep["convergence_ok"]
    assert len(sweep["records"]) == 8
    assert (out / "leaves.csv").exists()


def test_mesh_command(tmp_path):
    out = tmp_path / "o"
    code = run(
        [
            "mesh",
            "--delta", "0.1",
            "--eps", "0.01",
            "--target-edge", "0.05",
            "--tol", "1e-4",
            "--export-domain",
            "--out", str(out),
        ]
    )
    assert code == 0
    rep = json.loads((out / "solve_report.json").read_text())
    assert rep["solve"]["lambda_hat"] > 0
    assert (out / "sheet.obj").exists()
    assert (out / "domain.csv").read_text().splitlines()[0] == "s,x,y"


def test_json_formatting_17g():
    text = dumps_json({"x": 0.1, "flag": True, "arr": [1.0 / 3.0]})
    assert "0.10000000000000001" in text
    assert "0.33333333333333331" in text
    assert "true" in text


def test_no_temp_droppings(tmp_path):
    out = tmp_path / "o"
    run(["cap", "--delta", "0.1", "--eps", "0.01", "--out", str(out)])
    assert not [p for p in out.iterdir() if p.suffix == ".tmp"]


def test_mesh_config_loop_controls(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "kind": "circle",
                "params": {"radius": 1.0},
                "delta": 0.1,
                "eps": 0.005,
                "target_edge": 0.05,
                "tol": 1e-4,
                "max_outer": 25,
                "max_inner": 4000,
                "penalty_growth": 8.0,
            }
        )
    )
    out = tmp_path / "o"
    assert run(["mesh", "--config", str(cfg), "--out", str(out)]) == 0
    rep = json.loads((out / "solve_report.json").read_text())
    assert rep["config"]["solver_params"]["penalty_growth"] == 8.0
    assert rep["solve"]["converged"] is True


def test_verify_quick_under_budget(tmp_path):
    import time

    out = tmp_path / "o"
    t0 = time.perf_counter()
    assert run(["verify", "--quick", "--out", str(out)]) == 0
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    rep = json.loads((out / "verify_report.json").read_text())
    assert rep["all_passed"] is True
    assert rep["quick"] is True
    assert {d["id"] for d in rep["formula_discrepancies"]} == {
        "center_height_sign",
        "closed_form_volume_identity",
    }


def test_foliate_deterministic_bytes(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    args = ["foliate", "--delta", "0.1", "--eps-grid", "1e-3:0.03:4", "--solver", "cap"]
    run(args + ["--out", str(a)])
    run(args + ["--out", str(b)])
    ja = (a / "sweep_report.json").read_bytes().replace(str(a).encode(), b"X")
    jb = (b / "sweep_report.json").read_bytes().replace(str(b).encode(), b"X")
    assert ja == jb
    assert (a / "leaves.csv").read_bytes() == (b / "leaves.csv").read_bytes()
