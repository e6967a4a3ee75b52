import json
import subprocess
import sys

import numpy as np
import pytest

from rmtzeta.cli import main, replay


def _run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main(["--out", str(out), *argv])
    return code, out


def _csv(path):
    return np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding=None)


def test_sample_writes_rows(tmp_path):
    code, out = _run(tmp_path, "sample", "--class", "U", "--dim", "4", "--count", "2")
    assert code == 0
    lines = (out / "angles.csv").read_text().splitlines()
    assert lines[0].startswith("#") and len(lines) == 4
    assert all(len(l.split(",")) == 4 for l in lines[1:])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "sample" and manifest["outputs"] == ["angles.csv"]
    assert {"argv", "params", "seed", "versions", "wall_time_s"} <= manifest.keys()


def test_sample_is_byte_identical(tmp_path):
    args = ["--seed", "5", "sample", "--class", "USp", "--dim", "6", "--count", "7"]
    _, a = _run(tmp_path, *args, name="a")
    _, b = _run(tmp_path, *args, name="b")
    assert (a / "angles.csv").read_bytes() == (b / "angles.csv").read_bytes()


def test_so_odd_rows_contain_zero(tmp_path):
    _, out = _run(tmp_path, "sample", "--class", "SO-odd", "--dim", "5", "--count", "5")
    for line in (out / "angles.csv").read_text().splitlines()[2:]:
        assert 0.0 in [float(v) for v in line.split(",")]


def test_predict_one_level(tmp_path):
    _, out = _run(tmp_path, "predict", "--statistic", "one-level", "--symmetry", "U")
    assert np.all(_csv(out / "curve.csv")["smooth_value"] == 1.0)
    _, out = _run(tmp_path, "predict", "--statistic", "one-level", "--symmetry", "O", name="o")
    assert json.loads((out / "atoms.json").read_text())["atoms"] == [[0.0, 0.5]]


def test_predict_spacing_integrates_to_one(tmp_path):
    _, out = _run(tmp_path, "predict", "--statistic", "spacing", "--grid", "0:5:0.01")
    from scipy.integrate import simpson
    data = _csv(out / "curve.csv")
    assert abs(simpson(data["smooth_value"], x=data["x"]) - 1) < 1e-3


def test_stats_from_angles(tmp_path):
    _, src = _run(tmp_path, "sample", "--class", "U", "--dim", "10", "--count", "50", name="s")
    code, out = _run(tmp_path, "stats", "--angles", str(src / "angles.csv"),
                     "--statistic", "spacing")
    assert code == 0
    data = _csv(out / "spacing.csv")
    assert data["count"].sum() > 0


def test_compare_spacing_u40(tmp_path):
    code, out = _run(tmp_path, "--seed", "7", "compare", "--sample", "U:40:2000",
                     "--statistic", "spacing")
    report = json.loads((out / "report.json").read_text())
    assert code == 0 and report["pass"] and report["distance"] < 0.03
    assert report["tolerance"] == 0.03 and report["n_samples"] == 2000


def test_compare_lowest_usp(tmp_path):
    code, out = _run(tmp_path, "compare", "--sample", "USp:40:1000", "--statistic", "lowest")
    report = json.loads((out / "report.json").read_text())
    assert code == 0 and report["symmetry"] == "Sp" and report["distance"] < 0.05


def test_compare_zeros_pair_correlation(tmp_path):
    code, out = _run(tmp_path, "compare", "--zeros-T", "500", "--statistic",
                     "pair-correlation")
    report = json.loads((out / "report.json").read_text())
    assert code == 0 and report["tolerance"] == 0.25 and report["pass"]


def test_compare_failure_exit_code(tmp_path):
    code, out = _run(tmp_path, "compare", "--sample", "USp:20:300", "--statistic", "lowest",
                     "--symmetry", "O+")
    assert code == 2
    assert not json.loads((out / "report.json").read_text())["pass"]


def test_moments_table(tmp_path):
    _, out = _run(tmp_path, "moments", "--class", "U", "--dims", "1-20", "--s", "1")
    data = _csv(out / "moments.csv")
    assert np.allclose(data["closed_form"], data["dim"] + 1, rtol=1e-12)


def test_moments_with_monte_carlo(tmp_path):
    _, out = _run(tmp_path, "moments", "--class", "SO-even", "--dims", "2,4", "--s", "1",
                  "--mc-count", "200")
    data = _csv(out / "moments.csv")
    assert "mc_stderr" in data.dtype.names


def test_arith_table(tmp_path):
    _, out = _run(tmp_path, "arith", "--family", "zeta", "--k", "1-4", "--prime-cutoff", "1e4")
    data = _csv(out / "arith.csv")
    assert data["a_k"][0] == pytest.approx(1.0, abs=1e-12)
    assert len(_csv(out / "conjecture.csv")) == 8
    assert "note" in json.loads((out / "manifest.json").read_text())


def test_zeros_file(tmp_path):
    _, out = _run(tmp_path, "zeros", "--T", "200")
    assert len((out / "zeros.txt").read_text().splitlines()) == 79


@pytest.mark.parametrize("argv", [
    ["sample", "--class", "GL", "--dim", "3", "--count", "2"],
    ["sample", "--class", "USp", "--dim", "3", "--count", "2"],
    ["compare", "--sample", "U:4", "--statistic", "spacing"],
    ["stats", "--zeros", "/nonexistent/zeros.txt", "--statistic", "spacing"],
])
def test_input_errors_exit_3(tmp_path, argv):
    assert main(["--out", str(tmp_path / "x"), *argv]) == 3


def test_usage_error_exits_3(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["--out", str(tmp_path / "x"), "frobnicate"])
    assert exc.value.code == 3


def test_replay_reproduces_outputs(tmp_path):
    _, out = _run(tmp_path, "--seed", "3", "sample", "--class", "SO-even", "--dim", "8",
                  "--count", "5")
    assert replay(out / "manifest.json", tmp_path / "again") == 0
    assert (out / "angles.csv").read_bytes() == (tmp_path / "again" / "angles.csv").read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "rmtzeta", "--out", str(tmp_path / "m"),
                          "predict", "--statistic", "pair-correlation"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "m" / "curve.csv").exists()
