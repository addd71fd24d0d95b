"""Age-structured prey / unstructured predator model with constant mortality
and birth/predation restricted to ages >= tau:

    x_t + x_a = -(mu0 + gamma0 1[a >= tau] y) x,     x(t, 0) = beta0 int_tau^inf x(t, a) da
    y'        = alpha gamma0 y int_tau^inf x(t, a) da - delta y

Solved along characteristics with da = dt.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dde import NEG_TOL, AgeProfile, HistoryState, write_csv
from .model import ModelParams, PreconditionError, coexistence, thresholds


class PdeError(RuntimeError):
    pass


def default_a_max(params: ModelParams, cells_per_delay: int) -> float:
    """tau + 30/(mu0 + gamma0 y*) rounded up to the grid; e^{-30} tail of E2."""
    rate = params.mu0
    if thresholds(params).r0 > 1:
        rate += params.gamma0 * coexistence(params).y_star
    da = params.tau / cells_per_delay
    span = max(params.tau + 30.0 / rate, 2 * params.tau)
    return math.ceil(span / da - 1e-9) * da


@dataclass(frozen=True)
class PdeState:
    """Prey density on ages k*da, k = 0..n, predator density y at time t.

    When the initial profile does not satisfy the birth condition at a = 0,
    the solution jumps across the characteristic a = t. The node on it holds
    the newborn-side value; ``corner`` is the older-side limit at node
    ``corner_at`` (None once it has left the grid or for compatible data).
    """

    params: ModelParams
    cells_per_delay: int
    x: np.ndarray
    y: float
    t: float = 0.0
    corner: Optional[float] = None
    corner_at: int = 0

    def __post_init__(self):
        if self.cells_per_delay < 2:
            raise ValueError("need at least two age cells per delay")
        x = np.asarray(self.x, dtype=float)
        if (x.size - 1) < 2 * self.cells_per_delay:
            raise ValueError("a_max must be at least 2 tau")
        if not np.all(np.isfinite(x)) or not math.isfinite(self.y):
            raise PdeError("non-finite state")
        if np.any(x < 0) or self.y < 0:
            raise ValueError("state must be nonnegative")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def da(self) -> float:
        return self.params.tau / self.cells_per_delay

    @property
    def ages(self) -> np.ndarray:
        return self.da * np.arange(self.x.size)

    @property
    def a_max(self) -> float:
        return self.da * (self.x.size - 1)

    def _jump_fix(self, adult: bool) -> float:
        # the cell right of the corner node starts from the older-side limit
        k = self.corner_at
        if self.corner is None or k >= self.x.size - 1 or (k >= self.cells_per_delay) != adult:
            return 0.0
        return 0.5 * self.da * (self.corner - self.x[k])

    def adult_mass(self) -> float:
        """X = int_tau^a_max x da (trapezoid)."""
        return _trap(self.x[self.cells_per_delay:], self.da) + self._jump_fix(True)

    def juvenile_mass(self) -> float:
        """Z = int_0^tau x da (trapezoid)."""
        return _trap(self.x[: self.cells_per_delay + 1], self.da) + self._jump_fix(False)

    def to_csv(self, path):
        write_csv(path, ("a", "x"), (self.ages, self.x))

    @classmethod
    def from_profile(cls, params: ModelParams, profile: AgeProfile, y0: float,
                     cells_per_delay: int, a_max: Optional[float] = None) -> "PdeState":
        if a_max is None:
            a_max = max(default_a_max(params, cells_per_delay), profile.a_max)
        da = params.tau / cells_per_delay
        n = int(math.ceil(a_max / da - 1e-9))
        x = profile(da * np.arange(n + 1))
        births = params.beta0 * _trap(x[cells_per_delay:], da)
        if births == x[0]:
            return cls(params, cells_per_delay, x, float(y0))
        corner = float(x[0])
        x[0] = births
        return cls(params, cells_per_delay, x, float(y0), corner=corner, corner_at=0)


def _trap(v, h):
    return float(h * (v.sum() - 0.5 * (v[0] + v[-1])))


def step(params: ModelParams, state: PdeState) -> PdeState:
    """Advance by dt = da.

    Transport is exact along characteristics with the predator frozen at a
    midpoint estimate; then the boundary value from the transported profile;
    then Heun for the predator.
    """
    M = state.cells_per_delay
    dt = state.da
    x, y = state.x, state.y
    mu0, g0, ag0, dl = params.mu0, params.gamma0, params.alpha * params.gamma0, params.delta
    I0 = state.adult_mass()
    y_mid = y * math.exp(0.5 * dt * (ag0 * I0 - dl))

    new = np.empty_like(x)
    # cell i receives from i-1; predation acts on ages a_{i-1} >= tau
    young = math.exp(-mu0 * dt)
    old = math.exp(-(mu0 + g0 * y_mid) * dt)
    new[1:M + 1] = x[:M] * young
    new[M + 1:] = x[M:-1] * old
    corner, k = state.corner, state.corner_at + 1
    if corner is not None:
        corner = corner * (young if k <= M else old) if k < x.size else None
    I1 = _trap(new[M:], dt)
    if corner is not None and M <= k < x.size - 1:
        I1 += 0.5 * dt * (corner - new[k])
    new[0] = params.beta0 * I1

    k1 = y * (ag0 * I0 - dl)
    yp = y + dt * k1
    k2 = yp * (ag0 * I1 - dl)
    y_new = y + 0.5 * dt * (k1 + k2)
    if not (math.isfinite(y_new) and np.all(np.isfinite(new))):
        raise PdeError(f"non-finite state at t={state.t + dt}")
    if y_new < 0:
        if y_new < -NEG_TOL:
            raise PdeError(f"negative predator density {y_new} at t={state.t + dt}")
        y_new = 0.0
    return PdeState(params, M, new, y_new, state.t + dt, corner, k)


@dataclass(frozen=True)
class PdeRun:
    """Scalar series on t_k = k dt plus x(t_k, tau) and the final state."""

    t: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    y: np.ndarray
    x_at_tau: np.ndarray
    final: PdeState

    def series_to_csv(self, path):
        write_csv(path, ("t", "X", "Z", "y"), (self.t, self.X, self.Z, self.y))


def simulate(params: ModelParams, state: PdeState, t_end: float, snapshots=(), on_snapshot=None) -> PdeRun:
    """Repeated ``step`` up to the first grid time >= t_end."""
    M = state.cells_per_delay
    n = int(math.ceil((t_end - state.t) / state.da - 1e-9))
    t = [state.t]
    X = [state.adult_mass()]
    Z = [state.juvenile_mass()]
    Y = [state.y]
    xt = [float(state.x[M])]
    snap_steps = {int(round((s - state.t) / state.da)): s for s in snapshots}
    for k in range(1, n + 1):
        state = step(params, state)
        t.append(state.t)
        X.append(state.adult_mass())
        Z.append(state.juvenile_mass())
        Y.append(state.y)
        xt.append(float(state.x[M]))
        if on_snapshot is not None and k in snap_steps:
            on_snapshot(snap_steps[k], state)
    return PdeRun(np.array(t), np.array(X), np.array(Z), np.array(Y), np.array(xt), state)


@dataclass(frozen=True)
class PdeEquilibrium:
    ages: np.ndarray
    profile: np.ndarray
    y2: float
    x2_at_zero: float


def equilibrium_e2(params: ModelParams, cells_per_delay: int, a_max: Optional[float] = None) -> PdeEquilibrium:
    """x2(a) = beta0 X* e^{-mu0 a - gamma0 y* (a - tau)+}, y2 = y*."""
    eq = coexistence(params)
    if a_max is None:
        a_max = default_a_max(params, cells_per_delay)
    da = params.tau / cells_per_delay
    ages = da * np.arange(int(math.ceil(a_max / da - 1e-9)) + 1)
    x0 = params.beta0 * eq.x_star
    prof = x0 * np.exp(-params.mu0 * ages - params.gamma0 * eq.y_star * np.maximum(ages - params.tau, 0.0))
    return PdeEquilibrium(ages, prof, eq.y_star, x0)


def e2_state(params: ModelParams, cells_per_delay: int, a_max=None) -> PdeState:
    e2 = equilibrium_e2(params, cells_per_delay, a_max)
    return PdeState(params, cells_per_delay, e2.profile, e2.y2)


def reduce_to_dde(params: ModelParams, run: PdeRun, n: Optional[int] = None) -> HistoryState:
    """History for the delayed system: X on [0, tau] and y(tau) from a PDE run started at t = 0.

    Slopes come from X' = x(t, tau) - (mu0 + gamma0 y) X. ``n`` (grid
    intervals of the history) must divide the PDE cells per delay.
    """
    M = run.final.cells_per_delay
    if abs(run.t[0]) > 1e-12:
        raise ValueError("PDE run must start at t = 0")
    if run.t.size < M + 1:
        raise ValueError("PDE run does not cover [0, tau]")
    n = M if n is None else n
    if M % n:
        raise ValueError(f"history grid {n} must divide the PDE grid {M}")
    X = run.X[: M + 1]
    y = run.y[: M + 1]
    dX = run.x_at_tau[: M + 1] - (params.mu0 + params.gamma0 * y) * X
    stride = M // n
    return HistoryState(params.tau, X[::stride], dX[::stride], float(y[M]))
