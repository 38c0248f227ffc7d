import json
from pathlib import Path

import numpy as np
import pytest

from mm_lab import core
from mm_lab.cli import main


@pytest.fixture()
def space_file(tmp_path):
    s = core.random_metric_space(4, seed=14)
    path = tmp_path / "space.json"
    core.save_space(s, path)
    return path


def test_space_validate_round_trip(tmp_path, space_file):
    out = tmp_path / "copy.json"
    assert main(["space", "validate", "--in", str(space_file), "-o", str(out)]) == 0
    a = core.load_space(space_file)
    b = core.load_space(out)
    assert np.array_equal(a.dist, b.dist)
    assert np.array_equal(a.weight, b.weight)


def test_mpf_check_and_defect(tmp_path, capsys):
    assert main(["mpf", "check", "--fn", "fp:2", "--samples", "2000"]) == 0
    assert main(["mpf", "check", "--fn", "sq", "--samples", "2000"]) == 1
    out = tmp_path / "defect.csv"
    assert main(["mpf", "defect", "--fn", "gn3:5", "--D", "8", "--probe", "16",
                 "-o", str(out)]) == 0
    assert out.exists()
    text = capsys.readouterr().out
    assert "sup defect" in text


def test_mpf_classify(capsys):
    assert main(["mpf", "classify", "--family", "gn3", "--n", "1,2,4",
                 "--D", "4"]) == 0
    text = capsys.readouterr().out
    assert "(5)Y" in text and "(4)n" in text


def test_product_transform_invariant_dist(tmp_path, space_file, capsys):
    two = tmp_path / "two.json"
    assert main(["gallery", "two-point", "--s", "2", "-o", str(two)]) == 0
    prod = tmp_path / "prod.json"
    assert main(["product", "--space", str(two), "--space", str(two),
                 "--fn", "lp:2", "-o", str(prod)]) == 0
    p = core.load_space(prod)
    assert p.n == 4

    tr = tmp_path / "tr.json"
    assert main(["transform", "--space", str(two), "--fn", "h1", "-o", str(tr)]) == 0
    assert core.load_space(tr).dist[0, 1] == pytest.approx(2.0)

    assert main(["invariant", "od", "--space", str(two), "--kappa", "0.3"]) == 0
    out = capsys.readouterr().out
    assert "od(kappa=0.3) = 2" in out

    mu = tmp_path / "mu.json"
    nu = tmp_path / "nu.json"
    mu.write_text(json.dumps([1.0, 0.0]))
    nu.write_text(json.dumps([0.5, 0.5]))
    plan = tmp_path / "plan.csv"
    assert main(["dist", "prok", "--space", str(two), "--mu", str(mu),
                 "--nu", str(nu), "--lambda", "1", "--plan-csv", str(plan)]) == 0
    assert "0.5" in capsys.readouterr().out
    assert plan.exists()

    assert main(["dist", "box", "--x", str(two), "--y", str(two)]) == 0
    assert "box = 0" in capsys.readouterr().out


def test_gallery_and_cert(tmp_path, capsys):
    bundle = tmp_path / "bundle"
    assert main(["gallery", "counterexample1", "--fn", "h1", "--s", "2",
                 "--sn", "3", "--n", "6", "--N", "40", "--seed", "3",
                 "-o", str(bundle)]) == 0
    for name in ("product.json", "transformed.json", "limit.json", "map.json", "bundle.json"):
        assert (bundle / name).exists()
    meta = json.loads((bundle / "bundle.json").read_text())
    assert meta["limit_distance"] == pytest.approx(1.0, abs=1e-9)

    assert main(["cert", "--source", str(bundle / "transformed.json"),
                 "--target", str(bundle / "limit.json"),
                 "--map", str(bundle / "map.json"), "--budget", "600"]) == 0
    assert "overall=" in capsys.readouterr().out


def test_battery_cli(tmp_path, capsys):
    csv = tmp_path / "rows.csv"
    assert main(["battery", "prok_le_ky", "--trials", "5", "--csv", str(csv)]) == 0
    assert "0 failures" in capsys.readouterr().out
    assert csv.read_text().startswith("index,lhs,rhs,pass")


def test_experiment_deterministic_csv(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    args = ["experiment", "box_convergence", "--seed", "5"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    c1 = (out1 / "box_convergence.csv").read_bytes()
    c2 = (out2 / "box_convergence.csv").read_bytes()
    assert c1 == c2


def test_sphere_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("MML_CACHE_DIR", str(tmp_path / "cache"))
    from mm_lab.gallery import sample_sphere
    a = sample_sphere(3, 1.0, 30, seed=2)
    assert any((tmp_path / "cache").iterdir())
    b = sample_sphere(3, 1.0, 30, seed=2)
    assert np.array_equal(a.space.dist, b.space.dist)
