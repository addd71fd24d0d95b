import json
from dataclasses import replace

import numpy as np
import pytest

from delaylv.dde import write_csv
from delaylv.model import FIG1, FIG2, PartitionLabel, coexistence
from delaylv.scenario import (Analyses, InitialCondition, ReproductionMismatch, ScenarioConfig,
                              ScenarioError, build_history, decide, preset, presets, reproduce, run,
                              tau_autocorrelation)


def small(cfg, **kw):
    return replace(cfg, t_end=kw.pop("t_end", 60.0), steps_per_delay=kw.pop("steps_per_delay", 32),
                   analyses=kw.pop("analyses", Analyses()), **kw)


def test_presets_defined():
    ps = presets()
    assert set(ps) == {"fig1", "fig2", "fig3"}
    assert ps["fig1"].params == FIG1 and ps["fig2"].params == FIG2 == ps["fig3"].params
    assert ps["fig3"].initial.kind == "orbit"
    with pytest.raises(ValueError):
        preset("fig4")


def test_config_round_trip(tmp_path):
    cfg = preset("fig2")
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ScenarioConfig.load(path) == cfg


def test_config_relative_csv_path(tmp_path):
    write_csv(tmp_path / "h.csv", ("a", "value"), (np.linspace(0, 3, 17), np.full(17, 2.0)))
    d = {"name": "c", "params": FIG1.to_dict(), "t_end": 30.0,
         "initial": {"kind": "history_csv", "path": "h.csv", "y": 1.0}}
    (tmp_path / "c.json").write_text(json.dumps(d))
    cfg = ScenarioConfig.load(tmp_path / "c.json")
    hs = build_history(cfg.params, cfg.initial, 64)
    assert np.allclose(hs.phi, 2.0) and hs.y_tau == pytest.approx(coexistence(FIG1).y_star)


@pytest.mark.parametrize("kw", [
    dict(t_end=1.0), dict(steps_per_delay=2),
    dict(initial=InitialCondition("history_csv", path="/no/such/file.csv")),
    dict(analyses=Analyses(pde_crossval=True)),
])
def test_config_validation(kw):
    with pytest.raises((ValueError, FileNotFoundError)):
        ScenarioConfig("x", FIG1, **kw)


def test_initial_condition_validation():
    with pytest.raises(ValueError):
        InitialCondition("spiral")
    with pytest.raises(ValueError):
        InitialCondition("profile_csv")
    with pytest.raises(ValueError):
        InitialCondition("constant", x=-1.0)


def test_indicator_history_is_s2_only():
    ic = InitialCondition("indicator", x=1.0, y=1.0, lo=0.5, hi=1.0)
    hs = build_history(FIG1, ic, 64)
    assert hs.phi[0] == 0.0 and hs.phi[-1] > 0
    from delaylv.model import classify
    assert classify(hs) == PartitionLabel.S2_ONLY


def test_orbit_initial_condition_shift():
    e = coexistence(FIG2)
    h0 = build_history(FIG2, InitialCondition("orbit", shift=0.0), 128)
    h1 = build_history(FIG2, InitialCondition("orbit", shift=0.1), 128)
    assert h1.y_tau - h0.y_tau == pytest.approx(0.1 * (e.y_star - h0.y_tau))
    with pytest.raises(ValueError):
        build_history(FIG1, InitialCondition("orbit"), 128)


def test_run_writes_files(tmp_out):
    rep = run(small(preset("fig2"), analyses=Analyses(spectrum=True, orbit=True)))
    names = sorted(p.split("/")[-1] for p in rep.files)
    assert names == ["energy.csv", "orbit.csv", "orbit.json", "report.json", "spectrum.json", "trajectory.csv"]
    d = json.loads((tmp_out / "fig2" / "report.json").read_text())
    for k in ("params", "thresholds", "equilibria", "periodicity_index", "partition", "verdict", "distances", "files"):
        assert k in d
    assert d["partition"] == "S3"


def test_run_without_writing(tmp_out):
    rep = run(small(preset("fig1")), write=False)
    assert rep.files == [] and not any(tmp_out.iterdir())


def test_deterministic_outputs(tmp_path):
    outs = []
    for k in range(2):
        cfg = small(preset("fig3"), outputs=str(tmp_path / f"r{k}"), analyses=Analyses(orbit=True))
        run(cfg)
        # the report lists absolute paths, so it differs by directory name
        outs.append({f.name: f.read_bytes() for f in sorted((tmp_path / f"r{k}").iterdir())
                     if f.name != "report.json"})
    assert len(outs[0]) == 4 and outs[0] == outs[1]


def test_crossval_stage(tmp_out):
    ic = InitialCondition("bump", x=1.0, y=1.0)
    cfg = ScenarioConfig("pde", FIG1, ic, t_end=30.0, steps_per_delay=64, pde_cells_per_delay=256,
                         analyses=Analyses(pde_crossval=True))
    rep = run(cfg)
    assert rep.pde_crossval["max_scaled_error"] < 5e-3
    assert any(f.endswith("pde_series.csv") for f in rep.files)


def test_stage_errors_are_named(tmp_out):
    cfg = ScenarioConfig("bad", FIG1.with_(beta0=3000.0, mu0=0.01), InitialCondition("constant", 1.0, 0.0, relative=False),
                         t_end=3000.0, steps_per_delay=8)
    with pytest.raises(ScenarioError) as err:
        run(cfg)
    assert err.value.stage == "integrate"


@pytest.mark.parametrize("args,verdict", [
    ((PartitionLabel.BOUNDARY_S0, 4.0, 5.0, 1.0, None, None), "extinction"),
    ((PartitionLabel.BOUNDARY_S2_CAP_S0, 4.0, 5.0, 1e9, None, None), "prey_explosion"),
    ((PartitionLabel.BOUNDARY_S2_CAP_S0, 0.5, None, 1e-9, None, None), "extinction"),
    ((PartitionLabel.S3, 4.0, 1e-4, 5.0, 1e-9, 0.99), "to_E_star"),
    ((PartitionLabel.S3, 4.0, 1e-4, 5.0, 1e-5, 0.9), "undecided"),
    ((PartitionLabel.S3, 4.0, 1.0, 5.0, 30.0, 0.9999), "near_periodic"),
    ((PartitionLabel.S3, 0.5, None, 1e-5, None, None), "extinction"),
    ((PartitionLabel.S2_ONLY, 4.0, 0.5, 5.0, 1.0, 0.5), "undecided"),
])
def test_verdict_rules(args, verdict):
    assert decide(*args) == verdict


def test_autocorrelation():
    N = 50
    t = np.arange(20 * N) / N
    assert tau_autocorrelation(np.sin(2 * np.pi * t), N) == pytest.approx(1.0)
    assert tau_autocorrelation(np.sin(2 * np.pi * t / 2), N) == pytest.approx(-1.0)
    assert tau_autocorrelation(np.ones(20 * N), N) is None
    assert tau_autocorrelation(np.ones(5), N) is None


def test_boundary_verdicts(tmp_out):
    cfg = ScenarioConfig("b0", FIG1, InitialCondition("constant", 0.0, 1.0), t_end=30.0, steps_per_delay=32)
    assert run(cfg, write=False).verdict == "extinction"
    cfg = ScenarioConfig("b2", FIG1, InitialCondition("constant", 1.0, 0.0), t_end=30.0, steps_per_delay=32)
    rep = run(cfg, write=False)
    assert rep.partition == "S1_only"
    assert rep.verdict == "undecided"


def test_near_periodic_on_orbit(tmp_out):
    cfg = ScenarioConfig("orb", FIG2, InitialCondition("orbit"), t_end=150.0, steps_per_delay=256)
    rep = run(cfg, write=False)
    assert rep.verdict == "near_periodic"
    assert rep.distances["tau_autocorrelation"] > 0.999


def test_reproduce_mismatch_carries_report(tmp_out, monkeypatch):
    import delaylv.scenario as sc
    monkeypatch.setitem(sc.REFERENCE_INDEX, "fig1", 0.95)
    monkeypatch.setattr(sc, "preset", lambda name: small(presets()[name], outputs=str(tmp_out / name)))
    with pytest.raises(ReproductionMismatch) as err:
        reproduce("fig1")
    assert err.value.report is not None
