"""Classical planar Lotka-Volterra model, its period function, and the
tau-periodic orbit of the delayed system.

    x' = a x - b x y,   y' = c x y - d y

A tau-periodic solution of the delayed system is a solution of this planar
system with a = beta0 e^{-mu0 tau} - mu0, b = gamma0, c = alpha gamma0,
d = delta whose period equals tau.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .dde import HistoryState, write_csv
from .hermite import hermite_eval
from .lyapunov import evaluate, g
from .model import ModelParams, coexistence, periodicity_index

STEPS_PER_PERIOD = 4096
# event location tolerance in time
EVENT_TOL = 1e-12
PERIOD_TOL = 1e-10
ENERGY_CAP = 1e6
# periodicity index within this of 1 is the degenerate boundary case
INDEX_TOL = 1e-10


class OrbitError(RuntimeError):
    pass


@dataclass(frozen=True)
class PlanarParams:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for k in ("a", "b", "c", "d"):
            v = getattr(self, k)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{k} must be positive, got {v}")

    @classmethod
    def from_model(cls, params: ModelParams) -> "PlanarParams":
        coexistence(params)  # R0 > 1 required
        return cls(params.recruitment - params.mu0, params.gamma0,
                   params.alpha * params.gamma0, params.delta)

    @property
    def center(self):
        return self.d / self.c, self.a / self.b

    @property
    def small_period(self) -> float:
        """Limit of the period as the energy goes to zero."""
        return 2 * math.pi / math.sqrt(self.a * self.d)

    def field(self, x, y):
        return x * (self.a - self.b * y), y * (self.c * x - self.d)


def energy(pp: PlanarParams, x, y):
    """Conserved quantity d g(c x / d) + a g(b y / a)."""
    return pp.d * g(pp.c * np.asarray(x) / pp.d) + pp.a * g(pp.b * np.asarray(y) / pp.a)


@dataclass(frozen=True)
class PlanarRun:
    h: float
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dx: np.ndarray
    dy: np.ndarray

    def energy_drift(self, pp: PlanarParams) -> float:
        e = energy(pp, self.x, self.y)
        return float(np.max(np.abs(e - e[0])) / e[0])


def _rk4(pp, x, y, h):
    a, b, c, d = pp.a, pp.b, pp.c, pp.d
    k1x, k1y = x * (a - b * y), y * (c * x - d)
    x2, y2 = x + 0.5 * h * k1x, y + 0.5 * h * k1y
    k2x, k2y = x2 * (a - b * y2), y2 * (c * x2 - d)
    x3, y3 = x + 0.5 * h * k2x, y + 0.5 * h * k2y
    k3x, k3y = x3 * (a - b * y3), y3 * (c * x3 - d)
    x4, y4 = x + h * k3x, y + h * k3y
    k4x, k4y = x4 * (a - b * y4), y4 * (c * x4 - d)
    return (x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
            y + h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y))


def integrate_planar(pp: PlanarParams, x0: float, y0: float, h: float, n_steps: int) -> PlanarRun:
    xs, ys = [x0], [y0]
    x, y = x0, y0
    for _ in range(n_steps):
        x, y = _rk4(pp, x, y, h)
        xs.append(x)
        ys.append(y)
    x, y = np.array(xs), np.array(ys)
    dx, dy = pp.field(x, y)
    return PlanarRun(h, h * np.arange(n_steps + 1), x, y, dx, dy)


def _locate(h, t0, v0, m0, v1, m1, level):
    """Root of the Hermite cubic through (v0, m0), (v1, m1) minus level, by bisection."""
    lo, hi = 0.0, h
    f_lo = v0 - level
    vals = np.array([v0, v1])
    slopes = np.array([m0, m1])
    while hi - lo > EVENT_TOL:
        mid = 0.5 * (lo + hi)
        f_mid = hermite_eval(0.0, h, vals, slopes, mid) - level
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return t0 + 0.5 * (lo + hi)


def section_point(pp: PlanarParams, energy_level: float) -> tuple:
    """Point (x0, a/b) with x0 > d/c on the orbit of the given energy."""
    if not energy_level > 0:
        raise ValueError("energy level must be positive")
    # d g(1 + w) = E for w > 0, with g(1 + w) = w - log1p(w)
    f = lambda w: pp.d * (w - math.log1p(w)) - energy_level
    hi = max(1.0, 2 * math.sqrt(2 * energy_level / pp.d))
    while f(hi) <= 0:
        hi *= 2
    w = brentq(f, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return pp.d / pp.c * (1.0 + w), pp.a / pp.b


def period(pp: PlanarParams, energy_level: float, steps_per_period: int = STEPS_PER_PERIOD,
           max_periods: float = 1000.0) -> float:
    """Return time of the orbit with the given energy to the section y = a/b, x > d/c.

    The step is small_period / steps_per_period, a lower bound of the true
    period over the number of steps, so larger orbits get more steps.
    """
    x, y = section_point(pp, energy_level)
    h = pp.small_period / steps_per_period
    ysec = pp.a / pp.b
    xc = pp.d / pp.c
    max_steps = int(max_periods * steps_per_period)
    s_prev = 0.0
    for k in range(max_steps):
        xn, yn = _rk4(pp, x, y, h)
        s_new = yn - ysec
        if k > 0 and s_prev < 0 <= s_new and xn > xc:
            _, m0 = pp.field(x, y)
            _, m1 = pp.field(xn, yn)
            return _locate(h, k * h, y, m0, yn, m1, ysec)
        x, y, s_prev = xn, yn, s_new
    raise OrbitError(f"no return to the section within {max_periods} small periods")


@dataclass(frozen=True)
class PeriodicOrbit:
    """One period of the tau-periodic solution, sampled on [tau, 2 tau].

    Phase fixed by p(tau) = X* and q(tau) < y*. ``energy`` is the value of
    the Lyapunov functional on the orbit window; ``planar_energy`` the
    conserved Lotka-Volterra energy of the orbit.
    """

    params: ModelParams
    t: np.ndarray
    p: np.ndarray
    q: np.ndarray
    dp: np.ndarray
    dq: np.ndarray
    energy: float
    planar_energy: float
    period: float
    closure_residual: float

    @property
    def samples(self) -> int:
        return self.t.size - 1

    def __call__(self, t):
        """(p, q) at arbitrary t >= 0, extended tau-periodically."""
        tau = self.params.tau
        s = np.mod(np.asarray(t, dtype=float) - tau, tau)
        h = tau / self.samples
        return (hermite_eval(0.0, h, self.p, self.dp, s),
                hermite_eval(0.0, h, self.q, self.dq, s))

    def history(self, n: Optional[int] = None, y_tau: Optional[float] = None) -> HistoryState:
        """The orbit as an initial condition: phi(s) = p(s + tau), y_tau = q(tau)."""
        hs = HistoryState(self.params.tau, self.p, self.dp, self.q[0] if y_tau is None else y_tau)
        return hs if n is None or n == self.samples else hs.resampled(n)

    def to_csv(self, path):
        path = Path(path)
        write_csv(path, ("t", "p", "q"), (self.t, self.p, self.q))
        side = {"energy": self.energy, "planar_energy": self.planar_energy,
                "period": self.period, "closure_residual": self.closure_residual}
        path.with_suffix(".json").write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")


def _bracket(pp, tau):
    lo = 1e-8 * pp.d
    if period(pp, lo) >= tau:
        raise OrbitError("period at vanishing energy already exceeds tau")
    hi = max(2 * lo, 1e-3 * pp.d)
    while period(pp, hi) <= tau:
        lo = hi
        hi *= 2
        if hi > ENERGY_CAP:
            raise OrbitError(f"bracket expansion reached energy {ENERGY_CAP}")
    return lo, hi


def find_periodic_orbit(params: ModelParams, samples: int = 512,
                        steps_per_period: int = STEPS_PER_PERIOD) -> Optional[PeriodicOrbit]:
    """The tau-periodic orbit, or None when the periodicity index is <= 1."""
    idx = periodicity_index(params)
    if idx <= 1 + INDEX_TOL:
        return None
    tau = params.tau
    pp = PlanarParams.from_model(params)
    lo, hi = _bracket(pp, tau)
    e_star = brentq(lambda e: period(pp, e, steps_per_period) - tau, lo, hi,
                    xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    miss = abs(period(pp, e_star, steps_per_period) - tau)
    if miss > PERIOD_TOL:
        raise OrbitError(f"|T - tau| = {miss} after root solve")

    # one period from the section, then move the phase to p = X*, q < y*
    h = tau / steps_per_period
    x0, y0 = section_point(pp, e_star)
    run = integrate_planar(pp, x0, y0, h, steps_per_period)
    xc, yc = pp.center
    s = run.x - xc
    hits = np.nonzero((s[:-1] < 0) & (s[1:] >= 0) & (run.y[:-1] < yc))[0]
    if hits.size == 0:
        raise OrbitError("orbit never crosses x = X* below y*")
    k = int(hits[0])
    ts = _locate(h, run.t[k], run.x[k], run.dx[k], run.x[k + 1], run.dx[k + 1], xc)
    q0 = float(hermite_eval(0.0, h, run.y, run.dy, ts))

    fine = integrate_planar(pp, xc, q0, h, steps_per_period)
    closure = float(math.hypot(fine.x[-1] - fine.x[0], fine.y[-1] - fine.y[0]))
    grid = np.linspace(0.0, tau, samples + 1)
    p = hermite_eval(0.0, h, fine.x, fine.dx, grid)
    q = hermite_eval(0.0, h, fine.y, fine.dy, grid)
    dp, dq = pp.field(p, q)
    hs = HistoryState(tau, p, dp, q[0])
    return PeriodicOrbit(params, tau + grid, p, q, dp, dq, evaluate(params, hs).total,
                         float(e_star), tau, closure)
