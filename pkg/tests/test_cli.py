import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from spindec import cli

UM = 1e-6


def run(args, tmp_path):
    out = io.StringIO()
    code = cli.main(list(args) + ["--set", f"output.directory={tmp_path}"], out=out)
    return code, out.getvalue()


def read_table(path):
    lines = path.read_text().splitlines()
    comments = [x for x in lines if x.startswith("#")]
    rows = list(csv.reader(x for x in lines if not x.startswith("#")))
    return comments, rows[0], np.array(rows[1:], dtype=float) if len(rows) > 1 else np.empty((0,))


def test_rate_fig1(tmp_path):
    code, msg = run(["rate", "--jobs", "1"], tmp_path)
    assert code == 0 and "rate.csv" in msg
    comments, header, data = read_table(tmp_path / "rate.csv")
    assert any(c.startswith("# units:") for c in comments)
    assert header[:2] == ["d", "gamma12"]
    np.testing.assert_array_equal(data[:, 0], [5, 10, 20])
    assert np.all(np.isfinite(data[:, 1])) and np.all(data[:, 1] > 0)
    np.testing.assert_allclose(data[:, 1], data[:, 3], rtol=1e-5)


def test_rate_vacuum_stack_gives_zero(tmp_path):
    code, _ = run(["rate", "--jobs", "1", "--set", "stack=[{model: vacuum}]"], tmp_path)
    assert code == 0
    _, header, data = read_table(tmp_path / "rate.csv")
    assert np.all(data[:, header.index("gamma12")] == 0)
    assert np.all(data[:, header.index("delta_omega")] == 0)


def test_rate_niobium_preset(tmp_path):
    code, _ = run(["rate", "--jobs", "1", "--set", "preset=niobium-9K"], tmp_path)
    assert code == 0
    _, _, data = read_table(tmp_path / "rate.csv")
    assert np.all(data[:, 1] > 0)


def test_coherence_fig1(tmp_path):
    code, _ = run(["coherence", "--jobs", "1", "--set", "geometry.t_s=[0, 0.5]"], tmp_path)
    assert code == 0
    curves = {}
    for d in (5, 10, 20):
        comments, header, data = read_table(tmp_path / f"fig1_d{d}.csv")
        assert header == ["l", "S", "S_expansion", "rho12_t0", "rho12_t0.5"]
        assert data[0, 1] == 1.0
        assert np.all(np.diff(data[:, 1]) < 0)
        np.testing.assert_array_equal(data[:, 3], 1.0)
        curves[d] = data[:, 1]
        small = data[:, 0] <= d / 10
        assert np.all(np.abs(data[small, 1] - data[small, 2]) <= 1e-3)
    assert np.all(curves[20][1:] > curves[10][1:])
    assert np.all(curves[10][1:] > curves[5][1:])


def test_coherence_zero_separation_column(tmp_path):
    code, _ = run(["coherence", "--jobs", "1", "--set", "geometry.l_um=[0]"], tmp_path)
    assert code == 0
    text = (tmp_path / "fig1_d10.csv").read_text().splitlines()
    assert text[-1].split(",")[1] == "1"


def test_halfwidth_single_row(tmp_path):
    code, _ = run(["halfwidth", "--jobs", "1", "--set", "preset=fig2", "--set", "geometry.h_um=[5]",
                   "--set", "halfwidth.delta_um=[50]"], tmp_path)
    assert code == 0
    _, header, data = read_table(tmp_path / "fig2_delta50.csv")
    assert header == ["h", "l_half", "l_half_over_d"]
    assert data.shape == (1, 3)
    assert data[0, 2] == pytest.approx(data[0, 1] / 50, rel=1e-10)


def test_halfwidth_empty_h_is_config_error(tmp_path):
    code, _ = run(["halfwidth", "--set", "preset=fig2", "--set", "geometry.h_um=[]"], tmp_path)
    assert code == 1


def test_halfwidth_needs_one_height(tmp_path):
    code, _ = run(["halfwidth", "--set", "preset=fig2", "--set", "geometry.d_um=[10, 20]"], tmp_path)
    assert code == 1


@pytest.mark.parametrize("args", [
    ["rate", "--set", "geometry.d_um=[-1]"],
    ["rate", "--set", "geometry.d_um=[]"],
    ["rate", "--set", "stack=[]"],
    ["coherence", "--set", "geometry.l_um=[]"],
    ["rate", "--config", "/nonexistent/run.yaml"],
    ["rate", "--jobs", "0"],
])
def test_config_errors_exit_1(args, tmp_path, capsys):
    code, _ = run(args, tmp_path)
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_numerical_failure_exits_2(tmp_path, monkeypatch, capsys):
    from spindec import rates_coherence as rc
    from spindec.errors import BracketError

    def broken(*a, **k):
        raise BracketError("S stays above 1/2", bracket=(0.0, 1.0), values=(0.4, 0.4))

    monkeypatch.setattr(rc, "half_coherence_length", broken)
    code, _ = run(["halfwidth", "--jobs", "1", "--set", "preset=fig2", "--set", "geometry.h_um=[5]",
                   "--set", "halfwidth.delta_um=[50]"], tmp_path)
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err


def test_deterministic_output_and_json_mirror(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for target, jobs in ((a, "1"), (b, "2")):
        code, _ = run(["coherence", "--no-timestamp", "--json", "--jobs", jobs,
                       "--set", "geometry.d_um=[10]", "--set", "geometry.l_um=[0, 5, 20]"], target)
        assert code == 0
    text = (a / "fig1_d10.csv").read_text()
    assert text == (b / "fig1_d10.csv").read_text()
    assert not text.startswith("# generated")
    mirror = json.loads((a / "fig1_d10.json").read_text())
    assert mirror["columns"] == ["l", "S", "S_expansion"]
    assert mirror["units"]["l"] == "um"
    _, _, data = read_table(a / "fig1_d10.csv")
    np.testing.assert_allclose(np.array(mirror["rows"]), data, rtol=1e-11)


def test_timestamp_line_is_the_only_difference(tmp_path):
    code, _ = run(["rate", "--jobs", "1"], tmp_path)
    first = (tmp_path / "rate.csv").read_text().splitlines()
    assert first[0].startswith("# generated:")
    run(["rate", "--jobs", "1", "--no-timestamp"], tmp_path)
    assert (tmp_path / "rate.csv").read_text().splitlines() == first[1:]


def test_init_round_trip(tmp_path):
    path = tmp_path / "run.yaml"
    out = io.StringIO()
    assert cli.main(["init", "--preset", "fig2", "--config", str(path)], out=out) == 0
    assert path.read_text().startswith("# spindec")
    code, _ = run(["halfwidth", "--jobs", "1", "--config", str(path), "--set", "geometry.h_um=[5]",
                   "--set", "halfwidth.delta_um=[100]"], tmp_path)
    assert code == 0
    out = io.StringIO()
    cli.main(["init"], out=out)
    assert "frequency_hz: 560000.0" in out.getvalue()


def test_verify_clean_build():
    out = io.StringIO()
    assert cli.main(["verify"], out=out) == 0
    lines = out.getvalue().splitlines()
    assert lines and all(x.startswith("PASS") for x in lines)


def test_verify_tightened_tier():
    out = io.StringIO()
    assert cli.main(["verify", "--tol", "1e-9"], out=out) == 0


def test_verify_detects_tm_sign_flip():
    out = io.StringIO()
    assert cli.main(["verify", "--inject-tm-flip"], out=out) == 3
    assert "FAIL fresnel_identity" in out.getvalue()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "spindec", "--version"], capture_output=True,
                         text=True, check=True)
    assert res.stdout.startswith("spindec ")
