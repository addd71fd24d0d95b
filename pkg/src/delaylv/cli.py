"""Command line entry point: ``delaylv <verb> ...``.

Exit codes: 0 success, 2 reproduction mismatch, 1 any other error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import pde, planar, spectral
from .model import ModelParams, coexistence
from .scenario import (PRESET_NAMES, Analyses, InitialCondition, ReproductionMismatch, ScenarioConfig,
                       build_profile, preset, profile_y0, reproduce, run)


def _print(obj):
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _config(args) -> ScenarioConfig:
    if args.config:
        cfg = ScenarioConfig.load(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ValueError("give --config or --preset")
    kw = {}
    if getattr(args, "t_end", None) is not None:
        kw["t_end"] = args.t_end
    if getattr(args, "steps_per_delay", None) is not None:
        kw["steps_per_delay"] = args.steps_per_delay
    if getattr(args, "out", None):
        kw["outputs"] = args.out
    return replace(cfg, **kw) if kw else cfg


def _params(args) -> ModelParams:
    if args.params:
        return ModelParams.from_dict(json.loads(Path(args.params).read_text()))
    return preset(args.preset or "fig2").params


def cmd_analyze(args):
    cfg = _config(args)
    cfg = replace(cfg, analyses=Analyses(lyapunov=True, spectrum=True, orbit=True,
                                         pde_crossval=cfg.initial.is_profile))
    _print(run(cfg).to_dict())


def cmd_simulate_dde(args):
    cfg = replace(_config(args), analyses=Analyses(lyapunov=not args.no_lyapunov))
    _print(run(cfg).to_dict())


def cmd_simulate_pde(args):
    cfg = _config(args)
    if not cfg.initial.is_profile:
        cfg = replace(cfg, initial=InitialCondition("bump", x=1.0, y=1.0))
    params = cfg.params
    M = cfg.pde_cells_per_delay
    state = pde.PdeState.from_profile(params, build_profile(params, cfg.initial), profile_y0(params, cfg.initial), M)
    out = cfg.output_dir()
    state.to_csv(out / "profile_initial.csv")
    r = pde.simulate(params, state, cfg.t_end)
    r.series_to_csv(out / "pde_series.csv")
    r.final.to_csv(out / "profile_final.csv")
    files = [str(out / f) for f in ("profile_initial.csv", "pde_series.csv", "profile_final.csv")]
    summary = {"t_end": r.final.t, "X": r.X[-1], "Z": r.Z[-1], "y": r.y[-1], "files": files}
    try:
        e2 = pde.equilibrium_e2(params, M, state.a_max)
        summary["sup_error_to_E2"] = float(abs(r.final.x - e2.profile).max() / e2.x2_at_zero)
    except ValueError:
        pass
    _print(summary)


def cmd_find_orbit(args):
    params = _params(args)
    orbit = planar.find_periodic_orbit(params, samples=args.samples)
    if orbit is None:
        _print({"exists": False})
        return
    files = []
    if args.out:
        path = Path(args.out) / "orbit.csv"
        orbit.to_csv(path)
        files = [str(path), str(path.with_suffix(".json"))]
    _print({"exists": True, "energy": orbit.energy, "planar_energy": orbit.planar_energy,
            "period": orbit.period, "closure_residual": orbit.closure_residual,
            "p_tau": float(orbit.p[0]), "q_tau": float(orbit.q[0]), "files": files})


def cmd_spectrum(args):
    params = _params(args)
    coexistence(params)
    rep = spectral.roots_in_rectangle(spectral.QuasiPolynomial.from_params(params),
                                      tuple(args.re), tuple(args.im))
    d = rep.to_dict()
    d["det_b"] = [abs(spectral.pde_det_b(params, z)) for z in rep.roots]
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        rep.to_json(Path(args.out) / "spectrum.json")
    _print(d)


def cmd_reproduce(args):
    try:
        rep = reproduce(args.name, output_root=args.out)
    except ReproductionMismatch as err:
        if err.report is not None:
            _print(err.report.to_dict())
        sys.stderr.write(f"reproduction mismatch: {err}\n")
        return 2
    _print(rep.to_dict())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="delaylv", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    def scenario_args(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--config", help="scenario JSON")
        g.add_argument("--preset", choices=PRESET_NAMES)
        p.add_argument("--t-end", type=float)
        p.add_argument("--steps-per-delay", type=int)
        p.add_argument("--out", help="output directory")

    def param_args(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--params", help="JSON with mu0, beta0, gamma0, tau, alpha, delta")
        g.add_argument("--preset", choices=PRESET_NAMES)

    p = sub.add_parser("analyze", help="full pipeline with every analysis")
    scenario_args(p)
    p.set_defaults(fn=cmd_analyze)
    p = sub.add_parser("simulate-dde", help="integrate the delayed system")
    scenario_args(p)
    p.add_argument("--no-lyapunov", action="store_true")
    p.set_defaults(fn=cmd_simulate_dde)
    p = sub.add_parser("simulate-pde", help="integrate the age-structured model")
    scenario_args(p)
    p.set_defaults(fn=cmd_simulate_pde)
    p = sub.add_parser("find-orbit", help="tau-periodic orbit")
    param_args(p)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_find_orbit)
    p = sub.add_parser("spectrum", help="characteristic roots in a rectangle")
    param_args(p)
    p.add_argument("--re", type=float, nargs=2, default=(-0.01, 5.0))
    p.add_argument("--im", type=float, nargs=2, default=(-50.0, 50.0))
    p.add_argument("--out")
    p.set_defaults(fn=cmd_spectrum)
    p = sub.add_parser("reproduce", help="run a reference scenario and check it")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--out", help="output root")
    p.set_defaults(fn=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args) or 0
    except Exception as err:  # noqa: BLE001 - surfaced as exit code 1
        sys.stderr.write(f"error: {type(err).__name__}: {err}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
