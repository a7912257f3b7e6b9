import hashlib
import json
import math

import numpy as np
import pytest

from pseudoell import JointSpec, KinematicChain, planar_two_link, save_chain
from pseudoell.cli import main


@pytest.fixture
def planar_file(tmp_path):
    path = tmp_path / "planar.json"
    save_chain(planar_two_link(0.3, 0.3), path)
    return str(path)


@pytest.fixture
def sphere_file(tmp_path):
    # three orthogonal revolute joints placed so the zero-pose jacobian
    # is exactly the identity: the ellipsoid is the unit sphere
    chain = KinematicChain(
        joints=(
            JointSpec(axis=np.array([0.0, 1.0, 0.0]),
                      offset=np.array([0.0, 0.0, -1.0])),
            JointSpec(axis=np.array([0.0, 0.0, 1.0]),
                      offset=np.array([-1.0, 0.0, 1.0])),
            JointSpec(axis=np.array([1.0, 0.0, 0.0]),
                      offset=np.array([1.0, -1.0, 0.0])),
        ),
        ee_offset=np.array([0.0, 1.0, 0.0]),
    )
    assert np.array_equal(chain.jacobian([0.0, 0.0, 0.0]), np.eye(3))
    path = tmp_path / "sphere.json"
    save_chain(chain, path)
    return str(path)


def read_metrics(capsys):
    return json.loads(capsys.readouterr().out)


def test_metrics_stdout(planar_file, capsys):
    rc = main(["metrics", "--chain", planar_file, "--q", "0,1.5708",
               "--nu", "1,0"])
    assert rc == 0
    report = read_metrics(capsys)
    assert sorted(report) == ["axes", "l", "r", "radii", "rank_deficient"]
    assert math.isclose(report["r"], 0.30000110196153096, rel_tol=1e-9)
    assert math.isclose(report["l"], 0.42426406870906624, rel_tol=1e-9)
    assert report["rank_deficient"] is False


def test_metrics_deg_flag(planar_file, capsys):
    rc = main(["metrics", "--chain", planar_file, "--q", "0,90", "--deg",
               "--nu", "0,1"])
    assert rc == 0
    report = read_metrics(capsys)
    rc = main(["metrics", "--chain", planar_file, "--q",
               f"0,{math.pi / 2}", "--nu", "0,1"])
    assert rc == 0
    report_rad = read_metrics(capsys)
    assert math.isclose(report["r"], report_rad["r"], rel_tol=1e-12)


def test_metrics_normalizes_direction(planar_file, capsys):
    rc = main(["metrics", "--chain", planar_file, "--q", "0,1.5708",
               "--nu", "2,0"])
    assert rc == 0
    captured = capsys.readouterr()
    assert "warning" in captured.err
    report = json.loads(captured.out)
    assert math.isclose(report["r"], 0.30000110196153096, rel_tol=1e-9)


def test_metrics_missing_chain(tmp_path, capsys):
    rc = main(["metrics", "--chain", str(tmp_path / "nope.json"),
               "--q", "0,0", "--nu", "1,0"])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_metrics_bad_direction(planar_file, capsys):
    assert main(["metrics", "--chain", planar_file, "--q", "0,1.5708",
                 "--nu", "0,0"]) == 2
    assert main(["metrics", "--chain", planar_file, "--q", "0,1.5708",
                 "--nu", "1,0,0"]) == 2
    assert main(["metrics", "--chain", planar_file, "--q", "0,abc",
                 "--nu", "1,0"]) == 2
    capsys.readouterr()


def test_metrics_out_and_manifest(planar_file, tmp_path):
    out = tmp_path / "report.json"
    rc = main(["metrics", "--chain", planar_file, "--q", "0,1.5708",
               "--nu", "1,0", "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert "r" in report
    manifest = json.loads((tmp_path / "report.json.manifest.json").read_text())
    assert manifest["command"] == "metrics"
    assert manifest["outputs"] == [str(out)]
    digest = hashlib.sha256(open(planar_file, "rb").read()).hexdigest()
    assert manifest["inputs"][planar_file] == digest


def test_metrics_upsilon(planar_file, tmp_path, capsys):
    ups = tmp_path / "weight.json"
    ups.write_text("[[1.0, 0.0], [0.0, 4.0]]")
    rc = main(["metrics", "--chain", planar_file, "--q", "0,1.5708",
               "--nu", "1,0", "--upsilon", str(ups)])
    assert rc == 0
    weighted = read_metrics(capsys)
    rc = main(["metrics", "--chain", planar_file, "--q", "0,1.5708",
               "--nu", "1,0"])
    assert rc == 0
    plain = read_metrics(capsys)
    assert weighted["l"] > plain["l"]
    # non positive definite weight rejected
    ups.write_text("[[1.0, 0.0], [0.0, -4.0]]")
    assert main(["metrics", "--chain", planar_file, "--q", "0,1.5708",
                 "--nu", "1,0", "--upsilon", str(ups)]) == 2
    capsys.readouterr()


def test_sweep_csv_and_manifest(planar_file, tmp_path):
    out = tmp_path / "sweep.csv"
    rc = main(["sweep", "--chain", planar_file, "--q", "0.5236,0.1745",
               "--grid-n", "5", "--dir-samples", "64", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "dq1_deg,dq2_deg,max_abs_dr,max_abs_dl"
    assert len(lines) == 1 + 25
    manifest = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
    assert manifest["command"] == "sweep"
    assert manifest["parameters"]["grid_n"] == 5
    assert manifest["parameters"]["dir_samples"] == 64


def test_sweep_zero_range(planar_file, tmp_path):
    out = tmp_path / "sweep0.csv"
    rc = main(["sweep", "--chain", planar_file, "--q", "0.5,0.2",
               "--range-deg", "0", "--grid-n", "3", "--dir-samples", "64",
               "--out", str(out)])
    assert rc == 0
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 9
    for row in rows:
        assert [float(tok) for tok in row.split(",")] == [0.0, 0.0, 0.0, 0.0]


def test_sweep_even_grid_rejected(planar_file, tmp_path, capsys):
    assert main(["sweep", "--chain", planar_file, "--q", "0.5,0.2",
                 "--grid-n", "20", "--out", str(tmp_path / "x.csv")]) == 2
    capsys.readouterr()


def test_sweep_default_dir_samples_recorded(planar_file, tmp_path):
    out = tmp_path / "sweep_def.csv"
    rc = main(["sweep", "--chain", planar_file, "--q", "0.5,0.2",
               "--grid-n", "3", "--range-deg", "1", "--out", str(out)])
    assert rc == 0
    manifest = json.loads((tmp_path / "sweep_def.csv.manifest.json").read_text())
    assert manifest["parameters"]["dir_samples"] == 720


def test_sweep_thread_invariance(planar_file, tmp_path, monkeypatch):
    args = ["sweep", "--chain", planar_file, "--q", "0.5236,0.1745",
            "--grid-n", "7", "--dir-samples", "128"]
    out1 = tmp_path / "a.csv"
    assert main(args + ["--out", str(out1)]) == 0
    monkeypatch.setenv("PSEUDOELL_NUM_THREADS", "4")
    out2 = tmp_path / "b.csv"
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_sweep_bad_thread_env(planar_file, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PSEUDOELL_NUM_THREADS", "zero")
    assert main(["sweep", "--chain", planar_file, "--q", "0.5,0.2",
                 "--out", str(tmp_path / "x.csv")]) == 2
    capsys.readouterr()


def test_experiment_outputs(tmp_path):
    out = tmp_path / "trials.csv"
    rc = main(["experiment", "--draws", "2", "--bootstrap", "150",
               "--sigma-mm", "5", "--seed", "9", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "config_id,dir_index,draw,delta_r_deg,delta_l_deg,dq_true_deg"
    assert len(lines) == 1 + 2 * 7 * 2
    summary = json.loads((tmp_path / "trials.csv.summary.json").read_text())
    assert summary["n_trials"] == 28
    manifest = json.loads((tmp_path / "trials.csv.manifest.json").read_text())
    assert manifest["seed"] == 9
    assert len(manifest["parameters"]["configs_rad"]) == 2
    assert manifest["outputs"] == [str(out), str(out) + ".summary.json"]


def test_experiment_rerun_identical(tmp_path):
    args = ["experiment", "--draws", "2", "--bootstrap", "150",
            "--sigma-mm", "8", "--seed", "4"]
    out1 = tmp_path / "t1.csv"
    out2 = tmp_path / "t2.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    s1 = (tmp_path / "t1.csv.summary.json").read_bytes()
    s2 = (tmp_path / "t2.csv.summary.json").read_bytes()
    assert s1 == s2


def test_experiment_custom_configs(tmp_path):
    cfg = tmp_path / "configs.json"
    cfg.write_text(json.dumps([[0.3, 0.5, 1.5707963267948966]]))
    out = tmp_path / "trials.csv"
    rc = main(["experiment", "--configs", str(cfg), "--draws", "2",
               "--bootstrap", "150", "--out", str(out)])
    assert rc == 0
    summary = json.loads((tmp_path / "trials.csv.summary.json").read_text())
    assert summary["n_trials"] == 7 * 2
    manifest = json.loads((tmp_path / "trials.csv.manifest.json").read_text())
    assert str(cfg) in manifest["inputs"]


def test_experiment_zero_draws_rejected(tmp_path, capsys):
    assert main(["experiment", "--draws", "0",
                 "--out", str(tmp_path / "x.csv")]) == 2
    capsys.readouterr()


def test_experiment_infeasible_config_is_numerical_error(tmp_path, capsys):
    # nearly extended elbow: a 10 cm horizontal path leaves the workspace
    cfg = tmp_path / "configs.json"
    cfg.write_text(json.dumps([[0.3, 1.0, 0.1745]]))
    rc = main(["experiment", "--configs", str(cfg), "--draws", "2",
               "--bootstrap", "150", "--out", str(tmp_path / "x.csv")])
    assert rc == 3
    assert "numerical" in capsys.readouterr().err


def test_output_io_failure(planar_file, tmp_path, capsys):
    missing_dir = tmp_path / "no" / "such" / "dir" / "out.csv"
    rc = main(["sweep", "--chain", planar_file, "--q", "0.5,0.2",
               "--grid-n", "3", "--out", str(missing_dir)])
    assert rc == 4
    assert "i/o" in capsys.readouterr().err


def test_mesh_unit_sphere(sphere_file, tmp_path):
    out = tmp_path / "sphere.obj"
    rc = main(["mesh", "--chain", sphere_file, "--q", "0,0,0",
               "--samples", "16", "--out", str(out)])
    assert rc == 0
    verts = np.array([[float(tok) for tok in line.split()[1:]]
                      for line in out.read_text().splitlines()
                      if line.startswith("v ")])
    assert verts.shape == (16 * 32, 3)
    assert np.max(np.abs(np.linalg.norm(verts, axis=1) - 1.0)) <= 1e-9
    manifest = json.loads((tmp_path / "sphere.obj.manifest.json").read_text())
    assert manifest["command"] == "mesh"


def test_mesh_polyline_and_dominance(planar_file, tmp_path):
    classical = tmp_path / "classical.csv"
    pseudo = tmp_path / "pseudo.csv"
    base = ["mesh", "--chain", planar_file, "--q", "0,1.5707963267948966",
            "--samples", "32"]
    assert main(base + ["--out", str(classical)]) == 0
    assert main(base + ["--pseudo", "--out", str(pseudo)]) == 0

    def radii(path):
        rows = [line.split(",") for line in
                path.read_text().splitlines()[1:]]
        pts = np.array([[float(x), float(y)] for x, y in rows])
        return np.linalg.norm(pts, axis=1)

    r_c = radii(classical)
    r_p = radii(pseudo)
    assert r_c.shape == (32,)
    assert np.all(r_p >= r_c - 1e-12)


def test_mesh_too_few_samples(sphere_file, tmp_path, capsys):
    assert main(["mesh", "--chain", sphere_file, "--q", "0,0,0",
                 "--samples", "8", "--out", str(tmp_path / "x.obj")]) == 2
    capsys.readouterr()


def test_mesh_rerun_identical(sphere_file, tmp_path):
    out1 = tmp_path / "m1.obj"
    out2 = tmp_path / "m2.obj"
    args = ["mesh", "--chain", sphere_file, "--q", "0.1,0.2,0.3",
            "--samples", "16"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
