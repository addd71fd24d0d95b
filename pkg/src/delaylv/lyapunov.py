"""Volterra-type Lyapunov functional for the delayed system.

    L*(phi, y) = alpha X* g(phi(tau)/X*) + y* g(y/y*)
                 + alpha K X* int_0^tau g(phi(s)/X*) ds,      K = beta0 e^{-mu0 tau}

with g(x) = x - ln x - 1. Along solutions dF/dt = -alpha K X* g(X(t-tau)/X(t)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dde import HistoryState, Trajectory, write_csv
from .model import ModelParams, coexistence

# below this g is not evaluated: the functional blows up at the boundary
G_FLOOR = 1e-300


def g(x):
    """x - ln(x) - 1 on (0, inf), written to avoid cancellation near x = 1."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > G_FLOOR)):
        raise ValueError("g is defined on (0, inf) only")
    u = arr - 1.0
    out = u - np.log1p(u)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LyapunovValue:
    v1: float
    v2: float
    v3: float

    @property
    def total(self) -> float:
        return self.v1 + self.v2 + self.v3


def _consts(params):
    eq = coexistence(params)
    return eq.x_star, eq.y_star, params.alpha * params.recruitment * eq.x_star


def _g_slope(X, dX, xs):
    # d/dt g(X/X*) = (1 - X*/X) X' / X*
    return (1.0 - xs / X) * dX / xs


def _window_integral(G, dG, h):
    """Trapezoid with the Euler-Maclaurin endpoint correction (fourth order)."""
    return float(np.trapezoid(G, dx=h) - h * h / 12.0 * (dG[-1] - dG[0]))


def evaluate(params: ModelParams, history: HistoryState) -> LyapunovValue:
    xs, ys, c3 = _consts(params)
    phi = history.phi
    if np.any(phi <= 0) or history.y_tau <= 0:
        raise ValueError("L* needs phi > 0 and y > 0")
    v1 = params.alpha * xs * g(phi[-1] / xs)
    v2 = ys * g(history.y_tau / ys)
    v3 = c3 * _window_integral(g(phi / xs), _g_slope(phi, history.dphi, xs), history.h)
    return LyapunovValue(v1, v2, v3)


@dataclass(frozen=True)
class EnergySeries:
    t: np.ndarray
    F: np.ndarray
    analytic_dF: np.ndarray

    def to_csv(self, path):
        write_csv(path, ("t", "F", "analytic_dF"), (self.t, self.F, self.analytic_dF))


def energy_series(params: ModelParams, traj: Trajectory) -> EnergySeries:
    """F(t) at every node t >= 2 tau.

    The window integral uses the trajectory nodes with the endpoint-corrected
    trapezoid rule; the plain rule's O(h^2) wobble is large enough to make F
    tick upward by ~1e-8 where dF/dt is near zero.
    """
    xs, ys, c3 = _consts(params)
    N = traj.steps_per_delay
    if traj.t.size <= N:
        raise ValueError("trajectory shorter than 2 tau")
    X, y = traj.X, traj.y
    if np.any(X <= 0) or np.any(y[N:] <= 0):
        raise ValueError("trajectory touches zero; F undefined")
    G = g(X / xs)
    # cumulative trapezoid: C[k] = int_{t_0}^{t_k} G
    C = np.concatenate(([0.0], np.cumsum(0.5 * traj.h * (G[1:] + G[:-1]))))
    dG = _g_slope(X, traj.dX, xs)
    window = C[N:] - C[:-N] - traj.h ** 2 / 12.0 * (dG[N:] - dG[:-N])
    F = params.alpha * xs * G[N:] + ys * g(y[N:] / ys) + c3 * window
    dF = -c3 * g(X[:-N] / X[N:])
    return EnergySeries(traj.t[N:], F, dF)


def derivative_check(params: ModelParams, traj: Trajectory) -> float:
    """Max deviation of the centered difference of F from the analytic dF/dt.

    Five-point centered stencil, used only where it does not straddle a
    multiple of tau (derivatives of F jump there). Normalised by the sup of
    |analytic dF/dt| over the same nodes, since the analytic side passes
    through zero whenever X(t - tau) = X(t).
    """
    es = energy_series(params, traj)
    N = traj.steps_per_delay
    F = es.F
    fd = (F[:-4] - 8 * F[1:-3] + 8 * F[3:-1] - F[4:]) / (12 * traj.h)
    an = es.analytic_dF[2:-2]
    # F starts at 2 tau = node 0 of the series; kinks at every multiple of N
    r = (np.arange(2, F.size - 2)) % N
    keep = (r >= 2) & (r <= N - 2)
    fd, an = fd[keep], an[keep]
    scale = np.max(np.abs(an))
    err = np.max(np.abs(fd - an))
    return float(err / scale) if scale > 0 else float(err)


def is_nonincreasing(es: EnergySeries, rel_slack: float = 1e-8) -> bool:
    slack = rel_slack * max(1.0, float(es.F[0]))
    return bool(np.all(np.diff(es.F) <= slack))
