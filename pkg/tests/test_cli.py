import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crosstalk import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_dispersion_band_edges(capsys):
    code, out, _ = run(capsys, "dispersion", "--resolution", "8")
    assert code == 0
    rows = parse(out)
    edges = {r["kind"]: float(r["omega"]) for r in rows if r["kind"].startswith("band")}
    assert edges == {"band_min": 1.0, "band_max": 2.0}
    assert all(r["kind"] != "contour" for r in rows)
    code, out, _ = run(capsys, "dispersion", "--symmetry", "triangular", "--g", "0.165",
                       "--resolution", "4")
    edges = {r["kind"]: float(r["omega"]) for r in parse(out) if r["kind"].startswith("band")}
    assert edges["band_max"] == pytest.approx(1.992, abs=1e-3)


def test_dispersion_contours(capsys):
    code, out, _ = run(capsys, "dispersion", "--resolution", "4", "--omegas", "1.2,1.5",
                       "--contour-resolution", "32")
    contour = [r for r in parse(out) if r["kind"] == "contour"]
    assert {r["target"] for r in contour} == {"1.2", "1.5"}


def test_single_separation_row(capsys):
    code, out, _ = run(capsys, "crosstalk", "--dimension", "1", "--g", "0.75", "--omega", "1.3",
                       "--r-max", "0")
    rows = parse(out)
    assert code == 0 and len(rows) == 1 and float(rows[0]["normalized"]) == 1.0


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "crosstalk", "--dimension", "5")[0] == 2
    assert run(capsys, "crosstalk", "--omega", "3.0")[0] == 2
    assert run(capsys, "crosstalk", "--omega", "abc")[0] == 2
    assert run(capsys, "preset", "fig9")[0] == 2
    code, _, err = run(capsys, "crosstalk", "--dimension", "1", "--g", "0.75", "--omega", "1.3",
                       "--time", "1000", "--resolution", "64")
    assert code == 3 and "try resolution" in err
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"params": {"unknown_field": 1}}))
    assert run(capsys, "crosstalk", "--config", str(bad))[0] == 2


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"subcommand": "crosstalk",
                               "params": {"dimension": 1, "g": 0.75, "omega": 1.3, "r_max": 5}}))
    code, out, _ = run(capsys, "crosstalk", "--config", str(cfg), "--r-max", "2")
    assert code == 0 and len(parse(out)) == 3
    head = [ln for ln in out.splitlines() if ln.startswith(cli.CONFIG_PREFIX)][0]
    params = json.loads(head[len(cli.CONFIG_PREFIX):])["params"]
    assert params["r_max"] == 2.0 and params["omega"] == 1.3


def test_round_trip_bit_identical(capsys, tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert run(capsys, "crosstalk", "--omega", "1.95", "--mode", "map", "--r-max", "4",
               "--output", str(first), "--sidecar")[0] == 0
    assert run(capsys, "crosstalk", "--config", str(first), "--output", str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()
    meta = json.loads((tmp_path / "a.csv.json").read_text())
    assert meta["n_rows"] == 25 and "normalized" in meta["columns"]


def test_threads_do_not_change_output(capsys, monkeypatch):
    argv = ["crosstalk", "--dimension", "1", "--g", "0.75", "--omega", "1.3", "--time", "300",
            "--r-max", "10"]
    a = run(capsys, *argv, "--threads", "1")[1]
    monkeypatch.setenv("CROSSTALK_THREADS", "4")
    b = run(capsys, *argv)[1]
    assert a == b


def test_schema(capsys):
    code, out, _ = run(capsys, "correlation", "--schema")
    assert code == 0 and "normalized" in json.loads(out)
    code, out, _ = run(capsys, "preset", "fig4", "--schema")
    assert set(json.loads(out)) == {"correlation"}


def test_chain_and_overlay(capsys):
    code, out, _ = run(capsys, "crosstalk", "--dimension", "1", "--g", "0.75", "--omega", "1.3",
                       "--delta", "0.05", "--n-sites", "400", "--time", "100", "--r-max", "20")
    rows = parse(out)
    assert code == 0 and len(rows) == 21 and rows[0]["n0"] != ""
    code, out, _ = run(capsys, "crosstalk", "--omega", "1.01", "--r-max", "6")
    rows = parse(out)
    assert max(abs(float(r["normalized"]) - float(r["analytic"])) for r in rows) < 0.05


def test_correlation_and_dynamics(capsys):
    code, out, _ = run(capsys, "correlation", "--dimension", "1", "--g", "0.75", "--r-max", "6",
                       "--crosstalk-omega", "1.3")
    rows = parse(out)
    assert code == 0 and float(rows[1]["normalized"]) == pytest.approx(0.16912, abs=1e-5)
    code, out, _ = run(capsys, "correlation", "--mode", "map", "--r-max", "4")
    kinds = {r["kind"] for r in parse(out)}
    assert kinds == {"value", "contour"}
    code, out, _ = run(capsys, "dynamics", "--dimension", "1", "--g", "0.75", "--omega", "1.3",
                       "--regime", "sb", "--mode", "trace", "--t-final", "100",
                       "--n-times", "3", "--alpha", "0.5")
    rows = parse(out)
    assert code == 0 and len(rows) == 3
    assert all(float(r["min_symplectic"]) >= 0.5 - 1e-8 for r in rows)


@pytest.mark.parametrize("name", ["fig2c", "fig4c", "appxD"])
def test_panel_presets(capsys, tmp_path, name):
    assert run(capsys, "preset", name, "--output", str(tmp_path))[0] == 0
    files = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert files and all(f.endswith(".csv") for f in files)


@given(st.floats(1.05, 1.95), st.integers(0, 6))
def test_canonical_config_stable(omega, r_max):
    p = cli.normalize_config("crosstalk", {"omega": omega, "r_max": r_max})
    text = cli.canonical("crosstalk", p)
    again = json.loads(text)
    assert cli.canonical("crosstalk", cli.normalize_config("crosstalk", again["params"])) == text
