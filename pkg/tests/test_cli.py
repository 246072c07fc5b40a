import json
import os

import numpy as np
import pytest

from ebeam_mdp.cli import main
from ebeam_mdp.formats import read_pfm, read_shots, write_pfm
from ebeam_mdp.toys import cross_target, rectangle_target


@pytest.fixture
def shot_file(tmp_path):
    p = tmp_path / "shots.csv"
    p.write_text("id,x,y,w,h,d,q\n0,48,48,32,32,1,1\n")
    return p


@pytest.fixture
def rect_target(tmp_path):
    p = tmp_path / "rect.pfm"
    write_pfm(p, rectangle_target())
    return p


def test_simulate_writes_rasters(tmp_path, shot_file):
    out = tmp_path / "sim"
    assert main(["simulate", "--shots", str(shot_file), "--out", str(out), "--set", "grid=128"]) == 0
    for stem in ("energy", "resist"):
        assert (out / f"{stem}.pfm").exists() and (out / f"{stem}.pgm").exists()
    e = read_pfm(out / "energy.pfm")
    # one centered shot gives a single symmetric plateau
    assert np.allclose(e, e.T) and np.allclose(e, e[::-1, ::-1], atol=1e-6)


def test_simulate_fast_vs_exact(tmp_path, shot_file):
    args = ["simulate", "--shots", str(shot_file), "--set", "grid=128"]
    assert main(args + ["--out", str(tmp_path / "f"), "--forward", "fast"]) == 0
    assert main(args + ["--out", str(tmp_path / "e"), "--forward", "exact"]) == 0
    f, e = read_pfm(tmp_path / "f/energy.pfm"), read_pfm(tmp_path / "e/energy.pfm")
    assert np.max(np.abs(f - e)) / e.max() <= 1e-3


def test_simulate_empty_shots(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("id,x,y,w,h,d,q\n")
    assert main(["simulate", "--shots", str(p), "--out", str(tmp_path / "o"), "--set", "grid=32"]) == 0
    assert not read_pfm(tmp_path / "o/energy.pfm").any()
    assert read_pfm(tmp_path / "o/resist.pfm").max() < 1e-10


def test_mdp_outputs_and_determinism(tmp_path, rect_target):
    args = ["mdp", "--target", str(rect_target), "--set", "opt.epochs=8"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    names = ["shots.csv", "trace.csv", "before_resist.pfm", "after_resist.pfm", "after_resist.pgm"]
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = (tmp_path / "a/trace.csv").read_text().splitlines()
    assert rows[0] == "epoch,total,l2,pvb,sparsity,dose,overlap,lr" and len(rows) == 9
    assert all(r.split(",")[3] == "" for r in rows[1:])
    assert len(read_shots(tmp_path / "a/shots.csv", 128)) >= 1


def test_mdp_with_initial_shots(tmp_path, rect_target):
    shots = tmp_path / "init.csv"
    shots.write_text("id,x,y,w,h,d,q\n0,42,50,40,30,1.25,1\n")
    assert main(["mdp", "--target", str(rect_target), "--shots", str(shots), "--out",
                 str(tmp_path / "m"), "--set", "opt.epochs=5", "--forward", "exact"]) == 0
    trace = (tmp_path / "m/trace.csv").read_text().splitlines()[1:]
    l2 = [float(r.split(",")[2]) for r in trace]
    assert min(l2) <= l2[0]


def test_ilt_outputs(tmp_path):
    target = tmp_path / "cross.pfm"
    write_pfm(target, cross_target())
    out = tmp_path / "ilt"
    assert main(["ilt", "--target", str(target), "--out", str(out), "--set", "opt.epochs=4",
                 "--set", "opt.lr=0.2"]) == 0
    inner, nominal, outer = (read_pfm(out / f"print_{c}.pfm") for c in ("inner", "nominal", "outer"))
    assert inner.shape == (64, 64)
    assert np.all(inner <= nominal) and np.all(nominal <= outer)
    rows = (out / "trace.csv").read_text().splitlines()[1:]
    assert len(rows) == 4 and all(float(r.split(",")[3]) >= 0 for r in rows)


def test_ilt_zero_dose_delta(tmp_path):
    target = tmp_path / "cross.pfm"
    write_pfm(target, cross_target())
    assert main(["ilt", "--target", str(target), "--out", str(tmp_path / "o"),
                 "--set", "opt.epochs=3", "--set", "ol.dose_delta=0"]) == 0
    rows = (tmp_path / "o/trace.csv").read_text().splitlines()[1:]
    assert all(float(r.split(",")[3]) == 0.0 for r in rows)


def test_bench_csv(tmp_path, capsys):
    assert main(["bench", "--counts", "1,4", "--trials", "1", "--set", "grid=64"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n_shots,exact_ms,fast_ms"
    assert [l.split(",")[0] for l in lines[1:]] == ["1", "4"]
    assert all(float(v) > 0 for l in lines[1:] for v in l.split(",")[1:])
    out = tmp_path / "b.csv"
    assert main(["bench", "--counts", "2", "--trials", "1", "--set", "grid=64", "--out", str(out)]) == 0
    assert out.read_text().startswith("n_shots,exact_ms,fast_ms\n2,")


def test_fracture_command(tmp_path, rect_target):
    out = tmp_path / "f.csv"
    assert main(["fracture", "--target", str(rect_target), "--out", str(out)]) == 0
    assert out.read_text() == "id,x,y,w,h,d,q\n0,40,48,48,32,1.25,1\n"


def test_config_dump(tmp_path, capsys):
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({"ebl": {"eta": 0.4}}))
    assert main(["config-dump", "--config", str(cfgfile), "--set", "opt.seed=7"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["ebl"]["eta"] == 0.4 and d["opt"]["seed"] == 7 and d["grid"] == 512


@pytest.mark.parametrize("argv, code", [
    (["config-dump", "--set", "ebl.nope=1"], 2),
    (["config-dump", "--set", "noequals"], 2),
    (["config-dump", "--set", "ebl.sigma_b=1"], 3),
    (["config-dump", "--set", "bounds.w_min=0"], 3),
    (["simulate"], 2),
])
def test_exit_codes(argv, code):
    assert main(argv) == code


def test_parse_errors_on_bad_files(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,shot,file\n")
    assert main(["simulate", "--shots", str(bad), "--out", str(tmp_path)]) == 2
    cfg = tmp_path / "bad.json"
    cfg.write_text("{")
    assert main(["config-dump", "--config", str(cfg)]) == 2
    assert main(["mdp", "--target", str(tmp_path / "t.png")]) == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as err:
        main(["warp"])
    assert err.value.code == 2


def test_fracture_failure_is_validation_error(tmp_path):
    t = np.zeros((16, 16), np.float32)
    t[4, 2:9] = 1
    write_pfm(tmp_path / "thin.pfm", t)
    assert main(["fracture", "--target", str(tmp_path / "thin.pfm"), "--set", "bounds.h_min=2",
                 "--out", str(tmp_path / "s.csv")]) == 3


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numerical_failure_exit_4(tmp_path, rect_target):
    assert main(["mdp", "--target", str(rect_target), "--out", str(tmp_path / "x"),
                 "--set", "opt.epochs=4", "--set", "opt.lr=1e308",
                 "--set", "bounds.d_max=1e308"]) == 4


def test_threads_env(monkeypatch, tmp_path, shot_file):
    monkeypatch.setenv("EBEAM_MDP_THREADS", "2")
    assert main(["simulate", "--shots", str(shot_file), "--out", str(tmp_path), "--set", "grid=64"]) == 0
    monkeypatch.setenv("EBEAM_MDP_THREADS", "many")
    assert main(["simulate", "--shots", str(shot_file), "--out", str(tmp_path), "--set", "grid=64"]) == 2
