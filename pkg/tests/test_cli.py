import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from zeno_ifm.analysis import EvConfig, ev_efficiency
from zeno_ifm.cli import main

RECIPES = Path(__file__).parents[1] / "recipes"


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_ev_curve(tmp_path):
    out = tmp_path / "ev.csv"
    assert main(["ev-curve", "--points", "101", "--output", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["R", "eta", "p_ifm", "p_abs"]
    assert len(rows) == 101
    by_r = {round(float(r["R"]), 6): r for r in rows}
    assert float(by_r[0.0]["p_ifm"]) == 0.0
    for r in rows:
        rep = ev_efficiency(EvConfig.matched(float(r["R"])))
        assert float(r["p_ifm"]) == pytest.approx(rep.p_L, abs=1e-14)
        assert float(r["p_abs"]) == pytest.approx(rep.p_abs, abs=1e-14)
    assert (tmp_path / "ev.csv.manifest.json").exists()


def test_ev_curve_half_point(tmp_path):
    out = tmp_path / "ev.csv"
    main(["ev-curve", "--r-min", "0.5", "--r-max", "0.5", "--points", "1", "--output", str(out)])
    (row,) = read_csv(out)
    # complementary couplers at R=0.5 are the balanced case
    assert float(row["eta"]) == pytest.approx(1 / 3, abs=1e-14)


def test_zeno_curve(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["zeno-curve", "--n", "5,10,20", "--loss", "0", "--output", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["N", "p_L", "p_U", "p_abs", "p_loss", "eta"]
    assert float(rows[1]["p_L"]) == pytest.approx(0.7805460697811408, abs=1e-13)


def test_zeno_curve_lossy(tmp_path):
    out = tmp_path / "z.csv"
    main(["zeno-curve", "--n", "5-10", "--loss", "0.074", "--output", str(out)])
    rows = read_csv(out)
    assert [int(r["N"]) for r in rows] == list(range(5, 11))
    assert float(rows[-1]["eta"]) == pytest.approx(0.7045086940883544, abs=1e-12)


def test_zeno_curve_empty_and_invalid(tmp_path, capsys):
    out = tmp_path / "z.csv"
    assert main(["zeno-curve", "--n", "", "--output", str(out)]) == 0
    assert out.read_text().strip() == "N,p_L,p_U,p_abs,p_loss,eta"
    assert main(["zeno-curve", "--n", "1,5", "--output", str(out)]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and json.loads(err[0])["error"] == "ValueError"


def test_spectrum_recipe(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["spectrum", "--config", str(RECIPES / "ev_spectrum_open.ini"), "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "lambda_nm,p_upper,p_lower,p_absorbed,p_lost"
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape == (4001, 5)
    manifest = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert manifest["summary"]["visibility"] > 0.998
    assert manifest["command"] == "spectrum"


def test_spectrum_absorber_flat(tmp_path):
    out = tmp_path / "s.csv"
    main(["spectrum", "--config", str(RECIPES / "zeno10_spectrum_absorbers.ini"), "--output", str(out)])
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert np.ptp(data[:, 2]) < 1e-12


def test_spectrum_single_wavelength(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[circuit]\nkind = ev\nr_bs1 = 0.5\n\n[sweep]\nlambda_min_nm = 1550\nlambda_max_nm = 1550\nstep_nm = 0.01\n")
    out = tmp_path / "s.csv"
    assert main(["spectrum", "--config", str(cfg), "--output", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 2


def test_count(tmp_path, capsys):
    out = tmp_path / "c.json"
    args = ["count", "--config", str(RECIPES / "zeno10_count_lossy.ini"), "--gates", "200000", "--seed", "3"]
    assert main([*args, "--output", str(out)]) == 0
    first = json.loads(capsys.readouterr().out)
    assert main(args) == 0
    second = json.loads(capsys.readouterr().out)
    assert first == second == json.loads(out.read_text())
    for key in ("c_T", "c_L", "c_U", "explosions", "multi_photon_gates", "gates", "seed"):
        assert key in first
    assert first["gates"] == 200000
    assert set(first["estimates"]) == {"eta_ev", "eta_zeno", "eta_conclusive"}


def test_design_coupler(capsys):
    assert main(["design-coupler", "--target-r", "0.9938", "--length-um", "20", "--bend-um", "2"]) == 0
    line = capsys.readouterr().out.strip()
    assert "\n" not in line
    rec = json.loads(line)
    assert set(rec) == {"gap_nm", "length_um", "bend_correction_um", "l_c_um", "R", "T"}
    assert rec["R"] == pytest.approx(0.9938, abs=1e-6)
    assert 500 <= rec["gap_nm"] <= 650


def test_design_coupler_unreachable(capsys):
    assert main(["design-coupler", "--target-r", "0.99999999"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "UnreachableTarget"


def test_missing_config(tmp_path, capsys):
    assert main(["spectrum", "--config", str(tmp_path / "nope.ini"), "--output", str(tmp_path / "x.csv")]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"


def test_module_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "zeno_ifm", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("ev-curve", "zeno-curve", "spectrum", "count", "design-coupler"):
        assert cmd in res.stdout
    assert "nm" in res.stdout and "um" in res.stdout
