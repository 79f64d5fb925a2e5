import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from geodib.cli import main
from geodib.data import preset_dataset


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_generate(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", "three_equal", "--seed", 7, "--out", tmp_path)
    assert code == 0 and "N=150" in out
    r = rows(tmp_path / "three_equal.csv")
    assert r[0] == ["x1", "x2", "label"] and len(r) == 151
    code, _, _ = run(capsys, "generate", "single_blob", "--out", tmp_path)
    r = rows(tmp_path / "single_blob.csv")
    assert len(r) == 101 and {row[2] for row in r[1:]} == {"0"}


def test_generate_unknown(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "squares", "--out", tmp_path)
    assert code == 1
    assert "three_equal" in err and "symmetric_plus_skew" in err


def test_usage_errors(tmp_path, capsys):
    assert run(capsys, "sweep", "--no-such-flag")[0] == 1
    assert run(capsys, "cluster", "--out", tmp_path)[0] == 1  # missing --beta
    assert run(capsys, "cluster", "--beta", "-1", "--out", tmp_path)[0] == 1
    assert run(capsys, "smooth-dump", "--s", "0", "--out", tmp_path)[0] == 1
    assert run(capsys, "sweep", "--dataset", "nonsense", "--out", tmp_path)[0] == 1


def test_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x1,x2\n1,oops\n")
    code, _, err = run(capsys, "smooth-dump", "--dataset", bad, "--out", tmp_path)
    assert code == 2 and "line 2" in err
    assert run(capsys, "smooth-dump", "--dataset", tmp_path / "missing.csv", "--out", tmp_path)[0] == 2


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dataset": "single_blob", "s": 3.0, "bins": 8}))
    code, out, _ = run(capsys, "smooth-dump", "--config", cfg, "--bins", 6, "--out", tmp_path)
    assert code == 0 and "100 x 36" in out
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(capsys, "smooth-dump", "--config", cfg, "--out", tmp_path)[0] == 1


def test_smooth_dump(tmp_path, capsys):
    code, _, _ = run(capsys, "smooth-dump", "--dataset", "three_equal", "--s", 2, "--out", tmp_path)
    assert code == 0
    r = rows(tmp_path / "three_equal_s2_joint.csv")
    assert len(r) == 151 and len(r[0]) == 1024 + 2
    assert all(abs(float(row[-1]) - 1) <= 1e-12 for row in r[1:])
    ET.parse(tmp_path / "three_equal_s2_joint.svg")


def test_smooth_dump_refuses_huge_table(tmp_path, capsys):
    code, _, err = run(capsys, "smooth-dump", "--dataset", "three_equal", "--bins", 300, "--out", tmp_path)
    assert code == 2 and "--bins" in err


def test_cluster_tiny_beta(tmp_path, capsys):
    code, out, _ = run(capsys, "cluster", "--dataset", "three_equal", "--beta", 1e-9, "--out", tmp_path)
    assert code == 0 and "n_c=1" in out
    r = rows(tmp_path / "three_equal_s2_beta1e-09_assignment.csv")
    assert len(r) == 151 and {row[3] for row in r[1:]} == {"0"}
    ET.parse(tmp_path / "three_equal_s2_beta1e-09_clusters.svg")


def test_cluster_nonconvergence_exit(tmp_path, capsys, monkeypatch):
    import geodib.cli as cli
    from geodib import dib

    monkeypatch.setattr(cli, "dib_solve", lambda *a, **k: dib.dib_solve(*a, **{**k, "max_iter": 1}))
    code, _, _ = run(capsys, "cluster", "--beta", 3, "--restarts", 1, "--seed", 1, "--out", tmp_path)
    assert code == 3


@pytest.fixture(scope="module")
def three_equal_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    code = main(["sweep", "--dataset", "three_equal", "--s", "2", "--out", str(out)])
    return code, out


def test_sweep_selects_three(three_equal_sweep, capsys):
    code, out = three_equal_sweep
    assert code == 0
    payload = json.loads((out / "three_equal_s2_solutions.json").read_text())
    assert payload["meta"]["selected_n_c"] == 3
    assert len(payload["records"]) == 60
    ET.parse(out / "three_equal_s2_sweep.svg")
    frontier = list(csv.DictReader(open(out / "three_equal_s2_frontier.csv")))
    assert any(r["n_c"] == "3" for r in frontier)


def test_sweep_summary_and_determinism(three_equal_sweep, tmp_path, capsys):
    _, first = three_equal_sweep
    code, out, _ = run(capsys, "sweep", "--dataset", "three_equal", "--s", 2, "--out", tmp_path)
    assert code == 0 and "selected n_c=3" in out
    for name in ("solutions.json", "frontier.csv", "sweep.svg"):
        a = (first / f"three_equal_s2_{name}").read_bytes()
        assert a == (tmp_path / f"three_equal_s2_{name}").read_bytes()


def test_cluster_at_selected_kink(three_equal_sweep, tmp_path, capsys):
    _, first = three_equal_sweep
    frontier = list(csv.DictReader(open(first / "three_equal_s2_frontier.csv")))
    kink = next(r for r in frontier if r["n_c"] == "3" and r["theta"] != "nan")
    beta = float(np.sqrt(float(kink["beta_min"]) * float(kink["beta_max"])))
    code, out, _ = run(capsys, "cluster", "--dataset", "three_equal", "--s", 2, "--beta", beta, "--out", tmp_path)
    assert code == 0 and "n_c=3" in out
    path = next(tmp_path.glob("*_assignment.csv"))
    got = np.array([int(r[3]) for r in rows(path)[1:]])
    truth = preset_dataset("three_equal").labels
    conf = np.zeros((3, 3))
    np.add.at(conf, (truth, got), 1)
    r, c = linear_sum_assignment(-conf)
    assert conf[r, c].sum() / truth.size >= 0.95


def test_sweep_blob_against_reference(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "--dataset", "single_blob", "--s", 2, "--reference", "three_equal",
                       "--out", tmp_path)
    assert code == 0
    assert "no robust multi-cluster solution" in out


def test_boundaries(tmp_path, capsys):
    code, out, _ = run(capsys, "boundaries", "--s-list", "0.001,0.5,4", "--out", tmp_path)
    assert code == 0
    curves = {}
    for name, _, x1, x2 in rows(tmp_path / "symmetric_plus_skew_boundaries.csv")[1:]:
        curves.setdefault(name, []).append((float(x1), float(x2)))
    assert set(curves) == {"kmeans", "gmm", "dib_s0.001", "dib_s0.5", "dib_s4"}
    x = preset_dataset("symmetric_plus_skew").points
    lo, hi = x.min(axis=0), x.max(axis=0)
    for pts in curves.values():
        p = np.array(pts)
        assert np.all(p >= lo - 1e-9) and np.all(p <= hi + 1e-9)
    summary = json.loads((tmp_path / "symmetric_plus_skew_boundaries.json").read_text())["curves"]
    cell = float(max(hi - lo)) / (200 - 1)
    assert summary["dib_s0.001"]["dist_gmm"] <= 2 * cell
    ET.parse(tmp_path / "symmetric_plus_skew_boundaries.svg")


def test_boundaries_default_three_dib_curves(tmp_path, capsys):
    code, out, _ = run(capsys, "boundaries", "--resolution", 60, "--out", tmp_path)
    assert code == 0
    names = {r[0] for r in rows(tmp_path / "symmetric_plus_skew_boundaries.csv")[1:]}
    assert names == {"kmeans", "gmm", "dib_s0.5", "dib_s2", "dib_s4"}


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "geodib", "generate", "single_blob", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and (tmp_path / "single_blob.csv").exists()
