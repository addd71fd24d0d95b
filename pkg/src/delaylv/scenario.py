"""Config-driven scenarios: initial condition -> trajectory -> analyses -> report."""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import lyapunov, pde, planar, spectral
from .dde import AgeProfile, HistoryState, integrate, prelude_from_pde
from .model import (FIG1, FIG2, EquilibriumKind, ModelParams, PartitionLabel, classify, coexistence, equilibria,
                    periodicity_index, thresholds)

OUTPUT_ROOT_ENV = "DELAYLV_OUTPUT_ROOT"

# verdict thresholds
DIST_TOL = 1e-3
ENERGY_TOL = 1e-6
AUTOCORR_MIN = 0.999
AUTOCORR_DELAYS = 10

HISTORY_KINDS = ("constant", "indicator", "orbit", "history_csv")
PROFILE_KINDS = ("bump", "e2", "constant_profile", "profile_csv")

PRESET_NAMES = ("fig1", "fig2", "fig3")
REFERENCE_INDEX = {"fig1": 0.89, "fig2": 1.34, "fig3": 1.34}
INDEX_TOL = 0.005


class ScenarioError(RuntimeError):
    def __init__(self, stage, err):
        super().__init__(f"stage '{stage}' failed: {err}")
        self.stage = stage


class ReproductionMismatch(AssertionError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class InitialCondition:
    """Named initial data.

    History kinds act on the delayed system directly: ``constant`` (phi = x),
    ``indicator`` (phi = x on [lo, hi] * tau, 0 elsewhere), ``orbit`` (the
    tau-periodic orbit with y_tau moved a fraction ``shift`` of the way to
    y*), ``history_csv``. Profile kinds are age profiles pushed through the
    prelude: ``bump`` (height x, centred at ``center`` * tau, half-width
    ``width`` * tau), ``e2``, ``constant_profile``, ``profile_csv``.

    With ``relative`` set, x is in units of X* and y in units of y*.
    """

    kind: str = "constant"
    x: float = 1.5
    y: float = 0.5
    relative: bool = True
    lo: float = 0.0
    hi: float = 1.0
    center: float = 1.0
    width: float = 0.75
    shift: float = 0.0
    path: Optional[str] = None
    a_max: float = 20.0

    def __post_init__(self):
        if self.kind not in HISTORY_KINDS + PROFILE_KINDS:
            raise ValueError(f"unknown initial condition kind {self.kind!r}")
        if self.kind.endswith("csv") and not self.path:
            raise ValueError(f"{self.kind} needs a path")
        if self.x < 0 or self.y < 0:
            raise ValueError("initial densities must be nonnegative")

    @property
    def is_profile(self) -> bool:
        return self.kind in PROFILE_KINDS


@dataclass
class Analyses:
    lyapunov: bool = True
    spectrum: bool = False
    orbit: bool = False
    pde_crossval: bool = False


@dataclass
class ScenarioConfig:
    name: str
    params: ModelParams
    initial: InitialCondition = field(default_factory=InitialCondition)
    t_end: float = 500.0
    steps_per_delay: int = 128
    outputs: str = "out"
    analyses: Analyses = field(default_factory=Analyses)
    history_nodes: int = 512
    pde_cells_per_delay: int = 512
    crossval_t_end: float = 100.0

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end > self.params.tau):
            raise ValueError("t_end must exceed tau")
        if self.steps_per_delay < 8 or self.history_nodes < 8 or self.pde_cells_per_delay < 2:
            raise ValueError("grids too coarse")
        if self.initial.path is not None and not Path(self.initial.path).is_file():
            raise FileNotFoundError(self.initial.path)
        if self.analyses.pde_crossval and not self.initial.is_profile:
            raise ValueError("pde_crossval needs an age-profile initial condition")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "ScenarioConfig":
        d = dict(d)
        d["params"] = ModelParams.from_dict(d["params"])
        ic = dict(d.get("initial", {}))
        if ic.get("path") and base_dir is not None and not os.path.isabs(ic["path"]):
            ic["path"] = str(Path(base_dir) / ic["path"])
        d["initial"] = InitialCondition(**ic)
        d["analyses"] = Analyses(**d.get("analyses", {}))
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), base_dir=path.parent)

    def output_dir(self) -> Path:
        out = Path(self.outputs)
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root and not out.is_absolute():
            out = Path(root) / out
        return out


def presets() -> dict:
    """The three reference scenarios. Horizons are 3000: the slowest mode of
    the beta0 = 10 linearisation decays like e^{-0.00315 t}."""
    def make(name, params, ic):
        return ScenarioConfig(name, params, ic, t_end=3000.0, steps_per_delay=256, outputs=name,
                              analyses=Analyses(spectrum=True, orbit=True))

    return {
        "fig1": make("fig1", FIG1, InitialCondition("constant", 1.5, 0.5)),
        "fig2": make("fig2", FIG2, InitialCondition("constant", 1.5, 0.5)),
        "fig3": make("fig3", FIG2, InitialCondition("orbit", shift=0.1)),
    }


def preset(name: str) -> ScenarioConfig:
    try:
        return presets()[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(presets())}") from None


def _scales(params, ic):
    if not ic.relative:
        return 1.0, 1.0
    eq = coexistence(params)
    return eq.x_star, eq.y_star


def build_profile(params: ModelParams, ic: InitialCondition, n: int = 20000) -> AgeProfile:
    if ic.kind == "profile_csv":
        return AgeProfile.from_csv(ic.path)
    if ic.kind == "e2":
        return AgeProfile.e2(params, ic.a_max, n)
    xs, _ = _scales(params, ic)
    if ic.kind == "bump":
        return AgeProfile.bump(ic.center * params.tau, ic.width * params.tau, ic.x * xs, ic.a_max, n)
    return AgeProfile.constant(ic.x * xs, ic.a_max, n)


def profile_y0(params, ic) -> float:
    if ic.kind == "e2":
        return coexistence(params).y_star
    return ic.y * _scales(params, ic)[1]


def build_history(params: ModelParams, ic: InitialCondition, n: int) -> HistoryState:
    tau = params.tau
    if ic.is_profile:
        return prelude_from_pde(params, build_profile(params, ic), profile_y0(params, ic), n)
    if ic.kind == "history_csv":
        return HistoryState.from_csv(ic.path, tau, ic.y * _scales(params, ic)[1])
    if ic.kind == "orbit":
        orbit = planar.find_periodic_orbit(params, samples=n)
        if orbit is None:
            raise ValueError("no tau-periodic orbit for these parameters")
        q0 = float(orbit.q[0])
        return orbit.history(y_tau=q0 + ic.shift * (coexistence(params).y_star - q0))
    xs, ys = _scales(params, ic)
    if ic.kind == "constant":
        return HistoryState.constant(ic.x * xs, tau, n, ic.y * ys)
    # indicator: exact zero outside [lo, hi] tau, so no smoothing of the edges
    lo, hi = ic.lo * tau, ic.hi * tau
    grid = np.linspace(0.0, tau, n + 1)
    phi = np.where((grid >= lo) & (grid <= hi), ic.x * xs, 0.0)
    return HistoryState(tau, phi, np.zeros_like(phi), ic.y * ys)


def tau_autocorrelation(X: np.ndarray, steps_per_delay: int, delays: int = AUTOCORR_DELAYS) -> Optional[float]:
    """Pearson correlation of X(t) with X(t - tau) over the last ``delays`` delays."""
    N = steps_per_delay
    m = delays * N
    if X.size < m + N + 1:
        return None
    a, b = X[-m:], X[-m - N:-N]
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        return None
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def final_energy(params, traj) -> Optional[float]:
    N = traj.steps_per_delay
    X = traj.X[-N - 1:]
    if np.any(X <= 0) or traj.y[-1] <= 0:
        return None
    return lyapunov.evaluate(params, HistoryState(params.tau, X, traj.dX[-N - 1:], float(traj.y[-1]))).total


def decide(partition, r0, dist_star, dist_zero, f_end, autocorr) -> str:
    """Deterministic verdict from computed quantities."""
    if partition == PartitionLabel.BOUNDARY_S0:
        return "extinction"
    if partition == PartitionLabel.BOUNDARY_S2_CAP_S0:
        return "prey_explosion" if r0 > 1 else "extinction"
    if dist_star is not None and dist_star <= DIST_TOL and f_end is not None and f_end < ENERGY_TOL:
        return "to_E_star"
    if r0 <= 1 and dist_zero <= DIST_TOL:
        return "extinction"
    if autocorr is not None and autocorr > AUTOCORR_MIN and (dist_star is None or dist_star > DIST_TOL):
        return "near_periodic"
    return "undecided"


@dataclass
class ScenarioReport:
    name: str
    params: dict
    thresholds: dict
    equilibria: list
    periodicity_index: Optional[float]
    partition: str
    verdict: str
    distances: dict
    lyapunov: dict = field(default_factory=dict)
    spectrum: Optional[dict] = None
    orbit: Optional[dict] = None
    pde_crossval: Optional[dict] = None
    files: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        if ev is not None and not isinstance(ev, (ScenarioError, KeyboardInterrupt)):
            raise ScenarioError(self.name, ev) from ev
        return False


def run(config: ScenarioConfig, write: bool = True) -> ScenarioReport:
    params = config.params
    out = config.output_dir()
    files = []

    def save(name, writer):
        if write:
            path = out / name
            writer(path)
            files.append(str(path))

    th = thresholds(params)
    eqs = equilibria(params)
    star = next((e for e in eqs if e.kind == EquilibriumKind.COEXISTENCE), None)
    index = periodicity_index(params) if star is not None else None

    with _Stage("initial"):
        history = build_history(params, config.initial, config.history_nodes)
        partition = classify(history)
    with _Stage("integrate"):
        traj = integrate(params, history, config.t_end, config.steps_per_delay)
        save("trajectory.csv", traj.to_csv)

    Xe, ye = float(traj.X[-1]), float(traj.y[-1])
    distances = {"t": traj.t_end, "to_E0": math.hypot(Xe, ye),
                 "to_E_star": math.hypot(Xe - star.x_star, ye - star.y_star) if star else None}
    autocorr = tau_autocorrelation(traj.X, traj.steps_per_delay)
    distances["tau_autocorrelation"] = autocorr

    lyap = {}
    f_end = None
    if star is not None:
        with _Stage("lyapunov"):
            f_end = final_energy(params, traj)
            lyap["F_end"] = f_end
            if np.all(history.phi > 0) and history.y_tau > 0:
                lyap["F_initial"] = lyapunov.evaluate(params, history).total
            if config.analyses.lyapunov and partition == PartitionLabel.S3 and traj.t.size > 2 * traj.steps_per_delay:
                es = lyapunov.energy_series(params, traj)
                lyap["nonincreasing"] = lyapunov.is_nonincreasing(es)
                lyap["derivative_error"] = lyapunov.derivative_check(params, traj)
                save("energy.csv", es.to_csv)

    spec = None
    if config.analyses.spectrum and star is not None:
        with _Stage("spectrum"):
            rep = spectral.roots_in_rectangle(spectral.QuasiPolynomial.from_params(params))
            spec = rep.to_dict()
            save("spectrum.json", rep.to_json)

    orb = None
    if config.analyses.orbit and star is not None:
        with _Stage("orbit"):
            o = planar.find_periodic_orbit(params)
            orb = {"exists": o is not None}
            if o is not None:
                orb.update(energy=o.energy, planar_energy=o.planar_energy, period=o.period,
                           closure_residual=o.closure_residual)
                save("orbit.csv", o.to_csv)
                if write:
                    files.append(str((out / "orbit.csv").with_suffix(".json")))

    cross = None
    if config.analyses.pde_crossval:
        with _Stage("pde_crossval"):
            cross = crossval(config)
            save("pde_series.csv", cross.pop("run").series_to_csv)

    verdict = decide(partition, th.r0, distances["to_E_star"], distances["to_E0"], f_end, autocorr)
    report = ScenarioReport(
        name=config.name, params=params.to_dict(), thresholds=asdict(th),
        equilibria=[e.to_dict() for e in eqs], periodicity_index=index,
        partition=partition.value, verdict=verdict, distances=distances, lyapunov=lyap,
        spectrum=spec, orbit=orb, pde_crossval=cross, files=files,
        notes=["checks are qualitative: verdicts and index values only"])
    if write:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json())
        report.files.append(str(out / "report.json"))
    return report


def crossval(config: ScenarioConfig) -> dict:
    """X from the PDE against X from prelude + delayed system on [tau, crossval_t_end]."""
    params = config.params
    M = config.pde_cells_per_delay
    prof = build_profile(params, config.initial)
    y0 = profile_y0(params, config.initial)
    t_end = min(config.crossval_t_end, config.t_end)
    state = pde.PdeState.from_profile(params, prof, y0, M)
    run_ = pde.simulate(params, state, t_end)
    hist = prelude_from_pde(params, prof, y0, M)
    traj = integrate(params, hist, t_end, M)
    Xp = run_.X[M:M + traj.t.size]
    scale = max(1.0, coexistence(params).x_star) if thresholds(params).r0 > 1 else 1.0
    err = float(np.max(np.abs(Xp - traj.X)) / scale)
    return {"t_end": t_end, "cells_per_delay": M, "max_scaled_error": err, "run": run_}


def reproduce(name: str, write: bool = True, output_root=None) -> ScenarioReport:
    """Run a preset and check its periodicity index, orbit existence and verdict."""
    cfg = preset(name)
    if output_root is not None:
        cfg = replace(cfg, outputs=str(Path(output_root) / cfg.outputs))
    report = run(cfg, write=write)
    problems = []
    ref = REFERENCE_INDEX[name]
    if report.periodicity_index is None or abs(report.periodicity_index - ref) > INDEX_TOL:
        problems.append(f"periodicity index {report.periodicity_index} vs reference {ref} +- {INDEX_TOL}")
    if name == "fig1" and report.orbit and report.orbit["exists"]:
        problems.append("a tau-periodic orbit was found below the threshold")
    if name != "fig1" and not (report.orbit and report.orbit["exists"]):
        problems.append("no tau-periodic orbit above the threshold")
    if report.verdict != "to_E_star":
        problems.append(f"verdict {report.verdict}, expected to_E_star")
    if problems:
        raise ReproductionMismatch("; ".join(problems), report)
    return report
