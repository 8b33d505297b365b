import json
import math

import numpy as np
import pytest

from curieweiss.cli import main

REFERENCE = """\
n_spins      = 100000
coupling_j   = 1.0
coupling_g   = 0.09
delta_g      = 0.0
temperature  = 0.34
gamma        = 1e-3
debye_cutoff = 50.0
r_uu         = 0.5
re_r_ud      = 0.5
im_r_ud      = 0.0
"""


@pytest.fixture()
def cfg_path(tmp_path):
    path = tmp_path / "ref.cfg"
    path.write_text(REFERENCE)
    return path


def write_cfg(tmp_path, **overrides):
    base = {
        "n_spins": 100000, "coupling_j": 1.0, "coupling_g": 0.09, "delta_g": 0.0,
        "temperature": 0.34, "gamma": 1e-3, "debye_cutoff": 50.0,
        "r_uu": 0.5, "re_r_ud": 0.5, "im_r_ud": 0.0,
    }
    base.update(overrides)
    path = tmp_path / "case.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in base.items()))
    return path


def load_manifest(out_dir):
    with open(out_dir / "manifest.json") as fh:
        return json.load(fh)


def test_statics_command(cfg_path, tmp_path, capsys):
    out = tmp_path / "statics"
    assert main(["statics", "--config", str(cfg_path), "--out", str(out)]) == 0
    m = load_manifest(out)
    assert m["critical_g"] == pytest.approx(0.08, abs=0.005)
    assert m["curie_temperature"] == pytest.approx(0.36, abs=0.01)
    assert m["m_ferromagnetic"] == pytest.approx(0.996, abs=1e-3)
    assert (out / "landscape.csv").exists()
    assert (out / "stationary_up.csv").exists()
    assert (out / "stationary_down.csv").exists()
    assert (out / "landscape_up.dat").exists()
    header = (out / "landscape.csv").read_text().splitlines()[0]
    assert header == "m,F_up,F_down"


def test_statics_spinodal_recorded(tmp_path):
    cfg = write_cfg(tmp_path, temperature=0.75, coupling_g=0.0)
    out = tmp_path / "statics75"
    assert main(["statics", "--config", str(cfg), "--out", str(out)]) == 0
    m = load_manifest(out)
    assert m["critical_g"] is None
    assert "SpinodalUndefined" in m["critical_g_error"]


def test_statics_two_ferro_minima_at_zero_field(tmp_path):
    cfg = write_cfg(tmp_path, coupling_g=0.0)
    out = tmp_path / "statics0"
    assert main(["statics", "--config", str(cfg), "--out", str(out)]) == 0
    rows = (out / "stationary_up.csv").read_text().splitlines()[1:]
    minima = [r for r in rows if ",minimum," in r]
    ferro = [r for r in minima if "ferro" in r]
    assert len(ferro) == 2


def test_collapse_command_recurrence_visible(tmp_path):
    cfg = write_cfg(tmp_path, gamma=0.0, t_max=40.0, spacing="linear", samples=2001)
    out = tmp_path / "collapse"
    assert main(["collapse", "--config", str(cfg), "--out", str(out)]) == 0
    m = load_manifest(out)
    assert m["timescales"]["tau_red"] == pytest.approx(0.0248452, abs=1e-6)
    rows = (out / "offdiag.csv").read_text().splitlines()[1:]
    data = np.array([[float(x) for x in r.split(",")] for r in rows])
    t, log10_abs = data[:, 0], data[:, 3]
    t1 = math.pi / (2 * 0.09)
    near_peak = np.abs(t - t1) < 0.05
    assert near_peak.sum() >= 3
    assert log10_abs[near_peak].max() > -3.0       # revived peak
    mid = (t > 0.3) & (t < 15.0)
    assert log10_abs[mid].min() < -300.0           # dead between peaks


def test_collapse_bath_suppression_logged(cfg_path, tmp_path):
    out = tmp_path / "collapse_bath"
    assert main(["collapse", "--config", str(cfg_path), "--out", str(out)]) == 0
    m = load_manifest(out)
    assert m["timescales"]["tau_2"] == pytest.approx(0.2360145, abs=1e-6)
    assert m["timescales"]["log10_recurrence_bath"] == pytest.approx(
        -2.99057e7 / math.log(10.0), rel=1e-4
    )


def test_collapse_echo_run(tmp_path):
    cfg = write_cfg(tmp_path, gamma=0.0, delta_g=0.005, n_spins=1000,
                    t_max=30.0, spacing="linear", samples=601)
    out = tmp_path / "echo"
    assert main(["collapse", "--config", str(cfg), "--out", str(out),
                 "--echo-at", "7.5"]) == 0
    m = load_manifest(out)
    assert m["pulse_time"] == 7.5
    assert abs(m["echo_revival_log10"] - math.log10(0.5)) < 1e-6
    assert (out / "echo.csv").exists()


def test_register_command(cfg_path, tmp_path):
    out = tmp_path / "register"
    assert main(["register", "--config", str(cfg_path), "--out", str(out)]) == 0
    m = load_manifest(out)
    assert m["m_final_up"] == pytest.approx(0.996, abs=1e-3)
    assert m["m_final_down"] == pytest.approx(-0.996, abs=1e-3)
    assert m["terminal_up"] == "converged_ferro"
    assert m["tail_rate_fitted"] == pytest.approx(1e-3, rel=0.25)
    rows_up = (out / "registration_up.csv").read_text().splitlines()[1:]
    rows_down = (out / "registration_down.csv").read_text().splitlines()[1:]
    m_up = [float(r.split(",")[1]) for r in rows_up]
    m_down = [float(r.split(",")[1]) for r in rows_down]
    assert np.allclose(m_up, [-v for v in m_down], atol=1e-9)  # antisymmetric


def test_register_failure_outcome(tmp_path):
    cfg = write_cfg(tmp_path, coupling_g=0.05)
    out = tmp_path / "register_fail"
    assert main(["register", "--config", str(cfg), "--out", str(out)]) == 0
    m = load_manifest(out)
    assert m["terminal_up"] == "trapped_paramagnetic"


def test_scenario_command_exit_codes(cfg_path, tmp_path):
    out = tmp_path / "scn"
    assert main(["scenario", "--config", str(cfg_path), "--out", str(out)]) == 0
    m = load_manifest(out)
    assert m["status"] == "completed"
    assert m["final_state"]["branches"][0]["weight"] == 0.5
    assert m["entropy"]["delta_total"] > 0

    cfg_fail = write_cfg(tmp_path, coupling_g=0.05)
    assert main(["scenario", "--config", str(cfg_fail), "--out",
                 str(tmp_path / "scnf")]) == 2

    cfg_nom = write_cfg(tmp_path, coupling_g=0.0)
    assert main(["scenario", "--config", str(cfg_nom), "--out",
                 str(tmp_path / "scnn")]) == 3


def test_scenario_manifest_checksums(cfg_path, tmp_path):
    import hashlib

    out = tmp_path / "scn2"
    main(["scenario", "--config", str(cfg_path), "--out", str(out)])
    m = load_manifest(out)
    assert m["files"], "manifest must list the run artifacts"
    for entry in m["files"]:
        blob = (out / entry["name"]).read_bytes()
        assert hashlib.sha256(blob).hexdigest() == entry["sha256"]
        assert len(blob) == entry["bytes"]


def test_validate_command(cfg_path, tmp_path, capsys):
    out = tmp_path / "val"
    assert main(["validate", "--config", str(cfg_path), "--out", str(out)]) == 0
    m = load_manifest(out)
    assert m["regime"]["overall_valid"] is True
    printed = capsys.readouterr().out
    assert "overall_valid = True" in printed


def test_validate_margin_flag(tmp_path, capsys):
    cfg = write_cfg(tmp_path, n_spins=50)
    out = tmp_path / "val50"
    main(["validate", "--config", str(cfg), "--out", str(out), "--margin", "100"])
    m = load_manifest(out)
    checks = {c["name"]: c for c in m["regime"]["checks"]}
    assert checks["n_large"]["passed"] is False  # 50 < 100 at margin 100
    assert m["regime"]["margin"] == 100.0


def test_sweep_coupling_through_critical(tmp_path):
    cfg = write_cfg(tmp_path, n_spins=10000)
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(cfg), "--out", str(out),
                 "--sweep", "coupling_g=0.05:0.11:7"]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("coupling_g,outcome")
    outcomes = [(float(r.split(",")[0]), r.split(",")[1]) for r in rows[1:]]
    for g, outcome in outcomes:
        if g < 0.08:
            assert outcome.startswith("failed")
        elif g > 0.082:
            assert outcome.startswith("registered")


def test_sweep_temperature_at_zero_coupling(tmp_path):
    cfg = write_cfg(tmp_path, coupling_g=0.0, n_spins=1000)
    out = tmp_path / "sweepT"
    assert main(["sweep", "--config", str(cfg), "--out", str(out),
                 "--sweep", "temperature=0.30:0.42:7"]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()[1:]
    for r in rows:
        cells = r.split(",")
        temp, m_final = float(cells[0]), float(cells[-1])
        if temp < 0.36:
            assert abs(m_final) > 0.9   # ferromagnetic global minimum
        if temp > 0.37:
            assert abs(m_final) < 0.2   # paramagnet wins above the transition


def test_sweep_requires_axis(cfg_path, tmp_path, capsys):
    assert main(["sweep", "--config", str(cfg_path), "--out",
                 str(tmp_path / "x")]) == 1
    assert "sweep" in capsys.readouterr().err


def test_sweep_rejects_bad_axis(cfg_path, tmp_path):
    assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "x"),
                 "--sweep", "coupling_g=banana"]) == 1
    assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "x"),
                 "--sweep", "hbar=1:2:3"]) == 1


def test_cli_determinism_byte_identical(cfg_path, tmp_path):
    for sub in ("r1", "r2"):
        assert main(["scenario", "--config", str(cfg_path), "--out",
                     str(tmp_path / sub), "--seed", "5"]) == 0
    a, b = tmp_path / "r1", tmp_path / "r2"
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_cli_error_reporting(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("n_spins = 10\n")
    assert main(["scenario", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "error:" in capsys.readouterr().err
