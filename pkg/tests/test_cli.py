import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icesync.cli import RECIPE_IDS, main
from icesync.config import ConfigError, RunConfig
from icesync.forcing import load_csv
from icesync.integrator import IntegratorConfig
from icesync.oscillator import OscillatorParams
from icesync.provenance import read_csv, read_json, read_provenance


def run(*argv):
    return main([str(a) for a in argv])


def test_empty_config_lists_required_fields(tmp_path, capsys):
    cfg = tmp_path / "empty.ini"
    cfg.write_text("")
    assert run("trajectory", "--config", cfg, "--out", tmp_path / "t.csv") == 2
    err = capsys.readouterr().err
    for f in ("model.alpha", "model.beta", "model.gamma", "model.tau", "forcing.spec"):
        assert f in err


def test_bad_values_exit_with_config_error(tmp_path, capsys):
    assert run("trajectory", "--tau", "-1", "--out", tmp_path / "t.csv") == 2
    assert "tau" in capsys.readouterr().err
    assert run("trajectory", "--forcing", "square", "--out", tmp_path / "t.csv") == 2
    assert run("nosuchcommand") == 2
    assert run("trajectory", "--h", "0.05", "--gsr-interval", "0.01") == 2


def test_divergence_exit_code(tmp_path):
    assert run("trajectory", "--alpha", 100, "--tau", 1, "--y0", 1e4, "--t0", 0, "--t1", 10,
               "--h", 0.5, "--forcing", "zero", "--out", tmp_path / "t.csv", "--no-figure") == 3


def test_config_round_trip(tmp_path):
    cfg = RunConfig(params=OscillatorParams(alpha=11.11, beta=0.25, gamma=0.75, tau=43.86),
                    forcing="sine:41:2", integrator=IntegratorConfig(h=0.01, seed=99),
                    options={"note": "x"}, outputs={"csv": "a.csv"})
    cfg.save(tmp_path / "c.ini")
    assert RunConfig.load(tmp_path / "c.ini") == cfg
    with pytest.raises(ConfigError) as e:
        RunConfig.from_ini("[model]\nalpha = 1\n")
    assert e.value.field == "model.beta"
    with pytest.raises(ConfigError):
        RunConfig.from_ini("[model]\nalpha=a\nbeta=0\ngamma=0\ntau=1\n[forcing]\nspec=zero\n")


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 100), st.floats(-3, 3), st.floats(0, 10), st.floats(0.1, 100),
       st.floats(0.001, 1), st.integers(0, 2 ** 63))
def test_config_round_trip_lossless(alpha, beta, gamma, tau, h, seed):
    cfg = RunConfig(params=OscillatorParams(alpha=alpha, beta=beta, gamma=gamma, tau=tau),
                    forcing="insol", integrator=IntegratorConfig(h=h, gsr_interval=max(1.0, h),
                                                                 seed=seed))
    assert RunConfig.from_ini(cfg.to_ini()) == cfg


def test_config_file_with_flag_override(tmp_path):
    cfg = RunConfig(params=OscillatorParams(gamma=3.33), forcing="sine:41")
    cfg.save(tmp_path / "c.ini")
    out = tmp_path / "t.csv"
    assert run("trajectory", "--config", tmp_path / "c.ini", "--tau", 40, "--t1", -400,
               "--out", out, "--no-figure") == 0
    prov = read_provenance(out)
    assert prov["run"]["model"]["tau"] == 40.0
    assert prov["run"]["model"]["gamma"] == 3.33


def test_unforced_trajectory_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["trajectory", "--gamma", 0, "--forcing", "zero", "--every", 20, "--no-figure"]
    assert run(*args, "--out", a) == 0
    assert run(*args, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    header, rows = read_csv(a)
    assert header == ["t", "x", "y"]
    first = [float(v) for v in rows[0]]
    assert first == [-500.0, -0.24, -0.27]
    y = np.array([float(r[2]) for r in rows])
    assert y.min() < -1.5 and y.max() > 1.5  # relaxation cycle visits both branches
    prov = read_provenance(a)
    assert {"tool", "version", "config_hash", "seed"} <= set(prov)


def test_tangent_columns_and_figure(tmp_path):
    out = tmp_path / "t.csv"
    assert run("trajectory", "--tangent", "--t1", -400, "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["t", "x", "y", "lognorm1", "lognorm2"]
    assert out.with_suffix(".png").exists()


def test_overlay_does_not_change_computation(tmp_path):
    proxy = tmp_path / "proxy.csv"
    proxy.write_text("t,delta18O\n-500,4.1\n-250,3.2\n0,4.9\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("trajectory", "--every", 50, "--out", a, "--no-figure") == 0
    assert run("trajectory", "--every", 50, "--overlay", proxy, "--out", b) == 0
    ha, ra = read_csv(a)
    hb, rb = read_csv(b)
    assert hb == ha + ["delta18O"]
    assert [r[:3] for r in rb] == ra
    assert float(rb[0][3]) == 4.1


def test_forcing_outputs(tmp_path):
    out = tmp_path / "f.csv"
    assert run("forcing", "--model", "insol", "--from", -10, "--to", 0, "--dt", 0.5, "--out", out,
               "--no-figure") == 0
    header, rows = read_csv(out)
    assert header == ["t", "F"] and len(rows) == 21
    tab = tmp_path / "table.csv"
    assert run("forcing", "--model", "insol-wm2", "--table", "--out", tab) == 0
    assert load_csv(tab) == load_csv()
    assert read_provenance(tab) is not None
    spec = tmp_path / "spec.csv"
    assert run("forcing", "--model", "insol-wm2", "--spectrum", "--out", spec) == 0
    assert len(read_csv(spec)[1]) == 35
    assert run("forcing", "--model", "sine", "--spectrum", "--out", spec) == 2


def test_clusters_exit_codes(tmp_path):
    rep = tmp_path / "r.json"
    assert run("clusters", "--forcing", "zero", "--t0", -500, "--out", rep, "--no-figure") == 4
    assert run("clusters", "--forcing", "sine:41", "--gamma", 3.33, "--random", 70, "--t0", 0,
               "--t", 550, "--h", 0.01, "--out", rep) == 0
    d = read_json(rep)
    assert d["N"] == 2 and len(d["clusters"]) == 2
    assert rep.with_suffix(".png").exists()


def test_lyapunov_record(tmp_path):
    out = tmp_path / "rec.json"
    assert run("lyapunov", "--forcing", "zero", "--t-total", 800, "--transient", 200, "--out", out,
               "--no-figure") == 0
    rec = read_json(out)["record"]
    assert abs(rec["spectrum"][0]) < 5e-3
    assert rec["sum"] == pytest.approx(rec["trace_average"], rel=1e-3)


def test_basins_and_sweep_artifacts(tmp_path):
    d = tmp_path / "b"
    assert run("basins", "--forcing", "sine:41", "--gamma", 3.33, "--grid", "11x7", "--frames", 2,
               "--t0-step", 41, "--out", d) == 0
    csvs = sorted(d.glob("*.csv"))
    assert len(csvs) == 2 and all(p.with_suffix(".json").exists() for p in csvs)
    assert all(p.with_suffix(".png").exists() for p in csvs)
    s = tmp_path / "s.csv"
    assert run("sweep", "count", "--forcing", "sine:41", "--x", "tulc:100,120", "--y", "gamma:3.33",
               "--workers", 1, "--out", s) == 0
    assert [r[3] for r in read_csv(s)[1]] == ["ok", "ok"]
    assert run("sweep", "count", "--x", "omega:1:2:3", "--out", s) == 2


def test_jumps_command(tmp_path):
    out = tmp_path / "j.csv"
    assert run("jumps", "--forcing", "insol", "--gamma", 0.75, "--tau", 35.09, "--paths", 2,
               "--b", 0.0, "--out", out, "--no-figure") == 0
    meta = read_json(out.with_suffix(".json"))
    assert meta["paths_with_jump"] == 0 and len(meta["at_points_t0"]) == 2


def test_repro_ids_and_fig4(tmp_path, capsys):
    assert set(RECIPE_IDS) >= {"fig3", "fig4", "fig5a", "fig5b", "fig5c", "fig5d", "fig7", "fig9",
                               "fig12", "fig14", "fig15", "appE"}
    assert run("repro", "fig4", "--quick", "--no-figure", "--out", tmp_path) == 0
    assert read_json(tmp_path / "fig4_sine.json")["N"] == 2
    assert read_json(tmp_path / "fig4_astro.json")["N"] == 3
    assert read_json(tmp_path / "fig4_unforced.json")["N"] == 6
    assert json.dumps(read_json(tmp_path / "fig4_astro.json")["provenance"])
