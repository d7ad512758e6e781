"""End-to-end command-line runs on small fixtures."""

import subprocess
import sys

import numpy as np
import numpy.testing as npt
import pytest

from bordernet import cli, datasets, nn, report, vision


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


# ---------------------------------------------------------------------------
# geodesics

def test_geodesics_fan_files(tmp_path):
    out = tmp_path / "fan.csv"
    svg = tmp_path / "fan.svg"
    assert run_cli("geodesics", "--fan", 3, "--t-end", 0.5, "--dt", 0.01,
                   "--out", out, "--svg", svg) == 0
    files = sorted(tmp_path.glob("fan_*.csv"))
    assert [f.name for f in files] == ["fan_00.csv", "fan_01.csv", "fan_02.csv"]
    header = files[0].read_text().splitlines()[0]
    assert header == "t,x,y,theta,gamma,gammadot"
    assert svg.exists()


def test_geodesics_explicit_gammas_single_file(tmp_path):
    out = tmp_path / "curve.csv"
    assert run_cli("geodesics", "--gammas", "2.0", "--energy", 2.0,
                   "--t-end", 0.2, "--dt", 0.01, "--system", "full",
                   "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x,y,theta"
    assert len(lines) == 22


# ---------------------------------------------------------------------------
# occlude / orientation / filters

def test_occlude_produces_valid_idx(tmp_path, rng):
    images = rng.integers(0, 256, size=(6, 28, 28)).astype(np.uint8)
    src = tmp_path / "in.idx"
    datasets.write_idx_images(src, images)
    dst = tmp_path / "out.idx"
    preview = tmp_path / "previews"
    assert run_cli("occlude", "--in", src, "--kind", "stripes",
                   "--w", 3, "--s", 3, "--out", dst,
                   "--png-preview", preview, "--preview-count", 2) == 0
    back = datasets.load_idx_images(dst)
    mask = vision.occlusion_mask(28, 28, vision.OcclusionSpec(vision.STRIPES, 3, 3))
    for i in range(6):
        npt.assert_array_equal(back[i], np.where(mask, 0, images[i]))
    assert len(list(preview.glob("*.pgm"))) == 2
    first = vision.read_pgm(preview / "occluded_000.pgm")
    npt.assert_array_equal(first, back[0])


def test_orientation_csv(tmp_path, rng):
    pixels = rng.integers(0, 256, size=(28, 28)).astype(np.uint8)
    src = tmp_path / "img.pgm"
    vision.write_pgm(src, pixels)
    out = tmp_path / "theta.csv"
    assert run_cli("orientation", "--in", src, "--bins", 90, "--out", out) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "row,col,theta"
    assert len(lines) == 1 + 28 * 28


def test_filters_dump(tmp_path):
    assert run_cli("filters", "--dump", tmp_path / "kernels") == 0
    made = sorted(p.name for p in (tmp_path / "kernels").iterdir())
    assert made == ["diag_anti.csv", "diag_anti.pgm", "diag_main.csv",
                    "diag_main.pgm", "horizontal.csv", "horizontal.pgm",
                    "vertical.csv", "vertical.pgm"]
    rows = (tmp_path / "kernels" / "horizontal.csv").read_text().strip().splitlines()
    assert rows[2] == "1,1,1,1,1,1,1"


# ---------------------------------------------------------------------------
# train / eval / bench on a fixture dataset

@pytest.fixture
def fixture_data(tmp_path):
    data = datasets.synthetic(96, seed=12)
    test = datasets.synthetic(40, seed=13)
    sub = tmp_path / "mnist"
    sub.mkdir(parents=True)
    datasets.write_idx_images(sub / "train-images-idx3-ubyte", data.images)
    datasets.write_idx_labels(sub / "train-labels-idx1-ubyte", data.labels)
    datasets.write_idx_images(sub / "t10k-images-idx3-ubyte", test.images)
    datasets.write_idx_labels(sub / "t10k-labels-idx1-ubyte", test.labels)
    return tmp_path


def test_train_then_eval(tmp_path, fixture_data):
    ckpt = tmp_path / "model.npz"
    assert run_cli("train", "--model", "lenet5", "--dataset", "mnist",
                   "--data-dir", fixture_data, "--epochs", 1,
                   "--train-limit", 64, "--seed", 3, "--out", ckpt) == 0
    assert ckpt.exists()
    model = nn.load_checkpoint(ckpt)
    assert model.num_parameters() == 61_706
    assert run_cli("eval", "--model-file", ckpt, "--dataset", "mnist",
                   "--data-dir", fixture_data) == 0
    assert run_cli("eval", "--model-file", ckpt, "--dataset", "mnist",
                   "--data-dir", fixture_data, "--occlusion", "grid,2,4") == 0


def test_train_bordernet_cascade(tmp_path, fixture_data):
    ckpt = tmp_path / "b.npz"
    assert run_cli("train", "--model", "bordernet", "--mode", "cascade",
                   "--dataset", "mnist", "--data-dir", fixture_data,
                   "--epochs", 1, "--train-limit", 32, "--out", ckpt) == 0
    model = nn.load_checkpoint(ckpt)
    assert model.spec.name == "bordernet-cascade"
    assert model.num_parameters(trainable_only=True) == 61_706


def test_bench_writes_reports(tmp_path, fixture_data):
    out_dir = tmp_path / "bench"
    assert run_cli("bench", "--dataset", "mnist", "--data-dir", fixture_data,
                   "--cells", "1,1;3,3", "--cycles", 1, "--epochs", 1,
                   "--train-limit", 48, "--resamples", 50,
                   "--out", out_dir) == 0
    rows = report.read_results_csv(out_dir / "results.csv")
    assert [(r["w"], r["s"]) for r in rows] == [(1, 1), (3, 3)]
    assert all(r["cycles"] == 1 for r in rows)
    assert (out_dir / "improvement.svg").exists()


def test_bench_config_file_merge(tmp_path, fixture_data):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# benchmark settings\n"
        "dataset = mnist\n"
        "cells = 1,1\n"
        "cycles = 2\n"
        "epochs = 1\n"
        "train-limit = 32\n"
        "resamples = 40\n"
        f"data-dir = {fixture_data}\n"
        f"out = {tmp_path / 'cfg_out'}\n")
    # flag overrides the config's cycles=2
    assert run_cli("bench", "--config", cfg, "--cycles", 1) == 0
    rows = report.read_results_csv(tmp_path / "cfg_out" / "results.csv")
    assert rows[0]["cycles"] == 1


def test_bench_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("gpu = yes\n")
    with pytest.raises(SystemExit):
        run_cli("bench", "--config", cfg)


def test_bench_fails_nonzero_without_data(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run_cli("bench", "--dataset", "mnist", "--data-dir", empty,
                   "--cells", "1,1", "--cycles", 1, "--epochs", 1,
                   "--out", tmp_path / "x") == 1


def test_bad_cell_strings_rejected(tmp_path):
    with pytest.raises(SystemExit):
        run_cli("bench", "--cells", "1-2", "--data-dir", tmp_path,
                "--out", tmp_path / "y")


def test_occlusion_flag_parsing():
    spec = cli._parse_occlusion("stripes,3,4")
    assert (spec.kind, spec.w, spec.s) == ("stripes", 3, 4)
    assert cli._parse_occlusion(None) is None
    with pytest.raises(SystemExit):
        cli._parse_occlusion("stripes,3")


def test_console_script_installed(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "bordernet.cli",
                           "filters", "--dump", str(tmp_path / "k")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "4 kernels" in proc.stdout
