import json
import math

import numpy as np

from conftest import load_json, mesh_points, read_csv, write_csv

FIT = ["fit", "--mesh", "tri2", "--y", "y", "--x", "lon,lat"]


def test_malformed_header_exits_2(run, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("lon,lon,y\n1,2,3\n")
    proc = run(*FIT, "--data", bad, "--z", "", check=False)
    assert proc.returncode == 2
    assert proc.stderr.strip()


def test_unknown_mesh_exits_2(run, dataset):
    proc = run("fit", "--mesh", "nowhere", "--data", dataset, "--y", "y", "--x", "lon,lat", check=False)
    assert proc.returncode == 2
    assert "unknown mesh" in proc.stderr


def test_missing_file_exits_2(run, tmp_path):
    proc = run(*FIT, "--data", tmp_path / "absent.csv", check=False)
    assert proc.returncode == 2


def test_missing_column_exits_2(run, dataset):
    proc = run(*FIT, "--data", dataset, "--z", "z1,zz", check=False)
    assert proc.returncode == 2


def test_fit_selects_true_covariates(run, dataset, tmp_path):
    out = tmp_path / "model.json"
    run(*FIT, "--data", dataset, "--z", "z1,z2,z3,z4", "--out", out)
    model = load_json(out)
    assert model["active_names"] == ["z1", "z3"]
    beta = model["beta"]
    assert abs(beta[0] - 1.0) < 0.1 and abs(beta[2] + 0.8) < 0.1
    assert beta[1] == 0.0 and beta[3] == 0.0


def test_predict_reproduces_fitted_values(run, dataset, tmp_path):
    model = tmp_path / "model.json"
    run(*FIT, "--data", dataset, "--z", "z1,z2,z3,z4", "--out", model)
    pred = tmp_path / "pred.csv"
    run("predict", "--model", model, "--data", dataset, "--x", "lon,lat", "--out", pred)
    rows = read_csv(pred)
    fitted = load_json(model)["fitted"]
    assert len(rows) == len(fitted)
    for row, f in zip(rows, fitted):
        assert math.isclose(float(row["prediction"]), f, rel_tol=1e-12, abs_tol=1e-12)


def test_off_domain_prediction_is_na(run, dataset, tmp_path):
    model = tmp_path / "model.json"
    run(*FIT, "--data", dataset, "--out", model)
    inside = mesh_points("tri2", 1, 7)[0]
    far = write_csv(tmp_path / "far.csv", {"lon": [100.0, inside[0]], "lat": [100.0, inside[1]]})
    pred = tmp_path / "pred.csv"
    run("predict", "--model", model, "--data", far, "--x", "lon,lat", "--surface-only", "--out", pred)
    rows = read_csv(pred)
    assert rows[0]["alpha"] == "NA"
    assert rows[1]["alpha"] != "NA"


def test_fit_without_covariates(run, dataset, tmp_path):
    out = tmp_path / "model.json"
    run(*FIT, "--data", dataset, "--out", out)
    model = load_json(out)
    assert model["beta"] == []
    assert len(model["fitted"]) == 300


def test_single_replication_simulation(run, tmp_path):
    out = tmp_path / "sim.json"
    run("simulate", "--reps", "1", "--seed", "5", "--out", out)
    result = load_json(out)
    assert isinstance(result, dict)
    text = json.dumps(result)
    assert "NaN" not in text


def test_mesh_check_reports_tri2(run):
    report = json.loads(run("mesh-check", "tri2").stdout)
    assert report["conforming"] is True
    assert report["n_triangles"] == 158


def test_cv_reports_rmspe(run, dataset, tmp_path):
    out = tmp_path / "cv.json"
    run("cv", "--mesh", "tri2", "--data", dataset, "--y", "y", "--x", "lon,lat", "--z", "z1,z2,z3,z4",
        "--folds", "5", "--out", out)
    result = load_json(out)
    assert result["folds"] == 5 and len(result["per_fold"]) == 5
    assert 0.15 < result["rmspe"] < 0.5


def test_fit_is_deterministic(run, dataset, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        run(*FIT, "--data", dataset, "--z", "z1,z2,z3,z4", "--out", out)
    assert a.read_bytes() == b.read_bytes()


def test_surface_grid_written(run, dataset, tmp_path):
    out = tmp_path / "model.json"
    surf = tmp_path / "surface.csv"
    run(*FIT, "--data", dataset, "--out", out, "--surface-grid", "20x10", "--surface-out", surf)
    rows = read_csv(surf)
    assert len(rows) == 200
    inside = [float(r["alpha"]) for r in rows if r["alpha"] != "NA"]
    assert inside and np.all(np.isfinite(inside))


def test_usage_error_exits_2(run):
    assert run("fit", "--bogus", check=False).returncode == 2
