"""Method-of-steps RK4 integrator for the delayed system, with Hermite dense
output, plus the prelude ODE that turns an age profile into a DDE history."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .hermite import fd_slopes, hermite_eval, hermite_slope
from .model import ModelParams, coexistence, vector_field

MIN_NODES = 8
# undershoot below zero that is treated as roundoff and clamped
NEG_TOL = 1e-10


class IntegrationError(RuntimeError):
    pass


def _uniform_spacing(grid, span, what):
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ValueError(f"{what}: need at least two grid points")
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    if not np.allclose(np.diff(grid), h, rtol=1e-9, atol=1e-12):
        raise ValueError(f"{what}: grid must be uniform")
    if abs(grid[0] - span[0]) > 1e-12 or (span[1] is not None and abs(grid[-1] - span[1]) > 1e-9 * max(1.0, span[1])):
        raise ValueError(f"{what}: grid must span {span}")
    return h


def _read_two_columns(path, names, alt_second=()):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] and not _is_number(rows[0][0]):
        header = [c.strip() for c in rows[0]]
        if header[:1] != [names[0]] or len(header) < 2 or header[1] not in (names[1], *alt_second):
            raise ValueError(f"{path}: expected header {','.join(names)}, got {','.join(header)}")
        rows = rows[1:]
    data = np.array([[float(r[0]), float(r[1])] for r in rows if r], dtype=float)
    return data[:, 0], data[:, 1]


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def fmt(v: float) -> str:
    # shortest repr that round-trips; identical across platforms
    return repr(float(v))


@dataclass(frozen=True)
class HistoryState:
    """Initial condition X = phi on [0, tau], y(tau) = y_tau.

    ``phi`` holds N + 1 samples on the uniform grid over [0, tau] and
    ``dphi`` the slopes used by the Hermite dense output. ``psi`` is the
    juvenile mass from the prelude ODE, kept only for diagnostics.
    """

    tau: float
    phi: np.ndarray
    dphi: np.ndarray
    y_tau: float
    psi: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        dphi = np.asarray(self.dphi, dtype=float)
        if phi.ndim != 1 or phi.size < MIN_NODES + 1:
            raise ValueError(f"history needs at least {MIN_NODES + 1} samples, got {phi.size}")
        if dphi.shape != phi.shape:
            raise ValueError("phi and dphi must have the same shape")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(dphi)) and math.isfinite(self.y_tau)):
            raise ValueError("history must be finite")
        if np.any(phi < 0) or self.y_tau < 0:
            raise ValueError("history must be nonnegative")
        phi.setflags(write=False)
        dphi.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "dphi", dphi)
        object.__setattr__(self, "y_tau", float(self.y_tau))

    @property
    def n(self) -> int:
        return self.phi.size - 1

    @property
    def h(self) -> float:
        return self.tau / self.n

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.tau, self.n + 1)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.any(theta < -1e-12) or np.any(theta > self.tau * (1 + 1e-12)):
            raise ValueError("history evaluated outside [0, tau]")
        return hermite_eval(0.0, self.h, self.phi, self.dphi, theta)

    def slope(self, theta):
        return hermite_slope(0.0, self.h, self.phi, self.dphi, theta)

    def resampled(self, n: int) -> "HistoryState":
        grid = np.linspace(0.0, self.tau, n + 1)
        phi = np.maximum(self(grid), 0.0)
        return HistoryState(self.tau, phi, self.slope(grid), self.y_tau)

    @classmethod
    def from_samples(cls, tau, phi, y_tau, dphi=None) -> "HistoryState":
        phi = np.asarray(phi, dtype=float)
        if dphi is None:
            dphi = fd_slopes(phi, tau / (phi.size - 1))
        return cls(tau, phi, dphi, y_tau)

    @classmethod
    def from_function(cls, fn: Callable, tau: float, n: int, y_tau: float,
                      dfn: Optional[Callable] = None) -> "HistoryState":
        grid = np.linspace(0.0, tau, n + 1)
        phi = np.asarray(fn(grid), dtype=float) * np.ones_like(grid)
        dphi = None if dfn is None else np.asarray(dfn(grid), dtype=float) * np.ones_like(grid)
        return cls.from_samples(tau, phi, y_tau, dphi)

    @classmethod
    def constant(cls, value: float, tau: float, n: int, y_tau: float) -> "HistoryState":
        return cls(tau, np.full(n + 1, float(value)), np.zeros(n + 1), y_tau)

    @classmethod
    def from_csv(cls, path, tau: float, y_tau: float) -> "HistoryState":
        a, v = _read_two_columns(path, ("a", "value"))
        _uniform_spacing(a, (0.0, tau), f"history {path}")
        return cls.from_samples(tau, v, y_tau)


@dataclass(frozen=True)
class AgeProfile:
    """Initial prey age density sampled on a uniform grid over [0, a_max].

    Values between samples are linear; beyond a_max the density is zero.
    """

    ages: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ages = np.asarray(self.ages, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if ages.shape != values.shape or ages.ndim != 1:
            raise ValueError("ages and values must be 1-d arrays of equal length")
        _uniform_spacing(ages, (0.0, None), "age profile")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("age profile must be finite and nonnegative")
        object.__setattr__(self, "ages", ages)
        object.__setattr__(self, "values", values)

    @property
    def a_max(self) -> float:
        return float(self.ages[-1])

    def __call__(self, a):
        return np.interp(a, self.ages, self.values, left=0.0, right=0.0)

    def integral(self, lo: float, hi: float = math.inf) -> float:
        """Exact integral of the piecewise-linear profile over [lo, hi]."""
        lo = max(lo, 0.0)
        hi = min(hi, self.a_max)
        if hi <= lo:
            return 0.0
        inner = (self.ages > lo) & (self.ages < hi)
        a = np.concatenate(([lo], self.ages[inner], [hi]))
        return float(np.trapezoid(self(a), a))

    def to_csv(self, path):
        write_csv(path, ("a", "x"), (self.ages, self.values))

    @classmethod
    def from_function(cls, fn: Callable, a_max: float, n: int) -> "AgeProfile":
        ages = np.linspace(0.0, a_max, n + 1)
        return cls(ages, np.asarray(fn(ages), dtype=float) * np.ones_like(ages))

    @classmethod
    def from_csv(cls, path) -> "AgeProfile":
        # profile snapshots are written as a,x; accept them back
        a, v = _read_two_columns(path, ("a", "value"), alt_second=("x",))
        return cls(a, v)

    @classmethod
    def constant(cls, value, a_max, n):
        return cls.from_function(lambda a: np.full_like(a, value), a_max, n)

    @classmethod
    def indicator(cls, lo, hi, a_max, n, height=1.0):
        return cls.from_function(lambda a: height * ((a >= lo) & (a <= hi)), a_max, n)

    @classmethod
    def bump(cls, center, width, height, a_max, n):
        """Smooth compactly supported bump height * exp(1 - 1/(1 - r^2)), r = (a - center)/width."""
        def fn(a):
            r = (a - center) / width
            out = np.zeros_like(a)
            m = np.abs(r) < 1
            out[m] = height * np.exp(1.0 - 1.0 / (1.0 - r[m] ** 2))
            return out
        return cls.from_function(fn, a_max, n)

    @classmethod
    def e2(cls, params: ModelParams, a_max, n):
        """The age-structured coexistence profile (see pde.equilibrium_e2)."""
        eq = coexistence(params)
        x0 = params.beta0 * eq.x_star
        def fn(a):
            return x0 * np.exp(-params.mu0 * a - params.gamma0 * eq.y_star * np.maximum(a - params.tau, 0.0))
        return cls.from_function(fn, a_max, n)


@dataclass(frozen=True)
class Trajectory:
    """Solution nodes t_k = tau + k h with states and slopes; Hermite in between."""

    params: ModelParams
    history: HistoryState
    h: float
    t: np.ndarray
    X: np.ndarray
    y: np.ndarray
    dX: np.ndarray
    dy: np.ndarray

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def steps_per_delay(self) -> int:
        return int(round(self.params.tau / self.h))

    def sample_state(self, t):
        t = np.asarray(t, dtype=float)
        tol = 1e-9 * self.h
        if np.any(t < self.t0 - tol) or np.any(t > self.t_end + tol):
            raise ValueError(f"t outside [{self.t0}, {self.t_end}]")
        X = hermite_eval(self.t0, self.h, self.X, self.dX, t)
        y = hermite_eval(self.t0, self.h, self.y, self.dy, t)
        return X, y

    def X_at(self, t):
        """X on [0, t_end]: the history below tau, the trajectory above."""
        t = np.asarray(t, dtype=float)
        below = t < self.t0
        out = np.where(below, self.history(np.clip(t, 0.0, self.params.tau)),
                       hermite_eval(self.t0, self.h, self.X, self.dX, np.maximum(t, self.t0)))
        return out[()] if np.ndim(out) == 0 else out

    def to_csv(self, path):
        write_csv(path, ("t", "X", "y", "dX", "dy"), (self.t, self.X, self.y, self.dX, self.dy))


def write_csv(path, header, columns):
    """Deterministic CSV: ',' separator, '.' decimals, LF endings, repr floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(fmt(v) for v in row))
    path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def _check(v, what, t):
    if not math.isfinite(v):
        raise IntegrationError(f"non-finite {what} at t={t}")
    if v < 0:
        if v < -NEG_TOL:
            raise IntegrationError(f"{what} = {v} < 0 at t={t}")
        return 0.0
    return v


def integrate(params: ModelParams, history: HistoryState, t_end: float, steps_per_delay: int) -> Trajectory:
    """March the delayed system from tau to t_end with RK4, h = tau / steps_per_delay.

    Full-step delayed reads hit stored nodes; half-step reads use the cubic
    Hermite interpolant of the history (first delay interval) or of the
    trajectory itself afterwards. The last node is the first one >= t_end.
    """
    tau = params.tau
    if abs(history.tau - tau) > 1e-12 * tau:
        raise ValueError("history span does not match params.tau")
    if steps_per_delay < MIN_NODES:
        raise ValueError(f"steps_per_delay must be >= {MIN_NODES}")
    if not t_end > tau:
        raise ValueError("t_end must exceed tau")
    N = int(steps_per_delay)
    h = tau / N
    n_steps = int(math.ceil((t_end - tau) / h - 1e-9))
    if history.n != N:
        history = history.resampled(N)

    K = params.recruitment
    mu0, g0, ag0, dl = params.mu0, params.gamma0, params.alpha * params.gamma0, params.delta
    hp, hdp = history.phi.tolist(), history.dphi.tolist()

    X = [0.0] * (n_steps + 1)
    Y = [0.0] * (n_steps + 1)
    dX = [0.0] * (n_steps + 1)
    dY = [0.0] * (n_steps + 1)
    x, yv = hp[N], history.y_tau
    X[0], Y[0] = x, yv
    dX[0] = K * hp[0] - (mu0 + g0 * yv) * x
    dY[0] = (ag0 * x - dl) * yv

    half = 0.5 * h
    for n in range(n_steps):
        if n < N:
            d0, m0, d1, m1 = hp[n], hdp[n], hp[n + 1], hdp[n + 1]
        else:
            k = n - N
            d0, m0, d1, m1 = X[k], dX[k], X[k + 1], dX[k + 1]
        dm = 0.5 * (d0 + d1) + 0.125 * h * (m0 - m1)

        k1x = K * d0 - (mu0 + g0 * yv) * x
        k1y = (ag0 * x - dl) * yv
        x2, y2 = x + half * k1x, yv + half * k1y
        k2x = K * dm - (mu0 + g0 * y2) * x2
        k2y = (ag0 * x2 - dl) * y2
        x3, y3 = x + half * k2x, yv + half * k2y
        k3x = K * dm - (mu0 + g0 * y3) * x3
        k3y = (ag0 * x3 - dl) * y3
        x4, y4 = x + h * k3x, yv + h * k3y
        k4x = K * d1 - (mu0 + g0 * y4) * x4
        k4y = (ag0 * x4 - dl) * y4

        t_new = tau + (n + 1) * h
        x = _check(x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x), "X", t_new)
        yv = _check(yv + h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y), "y", t_new)
        X[n + 1], Y[n + 1] = x, yv
        dX[n + 1] = K * d1 - (mu0 + g0 * yv) * x
        dY[n + 1] = (ag0 * x - dl) * yv

    t = tau + h * np.arange(n_steps + 1)
    arrs = [np.array(a) for a in (X, Y, dX, dY)]
    for a in arrs:
        a.setflags(write=False)
    t.setflags(write=False)
    return Trajectory(params, history, h, t, *arrs)


def sample_state(traj: Trajectory, t):
    return traj.sample_state(t)


def prelude_from_pde(params: ModelParams, x0: AgeProfile, y0: float, n: int = 256) -> HistoryState:
    """History (phi on [0, tau], y(tau)) generated by an age profile x0 and predator y0.

    For t in [0, tau] the prey reaching age tau are the survivors of the
    initial juveniles, x(t, tau) = e^{-mu0 t} x0(tau - t), so

        phi' = e^{-mu0 t} x0(tau - t) - mu0 phi - gamma0 phi y
        psi' = beta0 phi - e^{-mu0 t} x0(tau - t) - mu0 psi
        y'   = alpha gamma0 phi y - delta y

    with phi(0) = int_tau^inf x0, psi(0) = int_0^tau x0, y(0) = y0. Solved
    with RK4 at step tau/n; x0 is linearly interpolated.
    """
    tau = params.tau
    if y0 < 0:
        raise ValueError("y0 must be nonnegative")
    if tau > x0.a_max:
        raise ValueError(f"profile ends at a_max={x0.a_max} < tau={tau}")
    if n < MIN_NODES:
        raise ValueError(f"n must be >= {MIN_NODES}")
    h = tau / n
    mu0, g0, b0 = params.mu0, params.gamma0, params.beta0
    ag0, dl = params.alpha * g0, params.delta

    def forcing(t):
        return math.exp(-mu0 * t) * float(x0(tau - t))

    def rhs(t, p, s, y):
        f = forcing(t)
        return (f - (mu0 + g0 * y) * p, b0 * p - f - mu0 * s, (ag0 * p - dl) * y)

    p, s, y = x0.integral(tau), x0.integral(0.0, tau), float(y0)
    phi, psi, dphi = [p], [s], [rhs(0.0, p, s, y)[0]]
    for k in range(n):
        t = k * h
        a = rhs(t, p, s, y)
        b = rhs(t + h / 2, p + h / 2 * a[0], s + h / 2 * a[1], y + h / 2 * a[2])
        c = rhs(t + h / 2, p + h / 2 * b[0], s + h / 2 * b[1], y + h / 2 * b[2])
        d = rhs(t + h, p + h * c[0], s + h * c[1], y + h * c[2])
        p = _check(p + h / 6 * (a[0] + 2 * b[0] + 2 * c[0] + d[0]), "phi", t + h)
        s = _check(s + h / 6 * (a[1] + 2 * b[1] + 2 * c[1] + d[1]), "psi", t + h)
        y = _check(y + h / 6 * (a[2] + 2 * b[2] + 2 * c[2] + d[2]), "y", t + h)
        phi.append(p)
        psi.append(s)
        dphi.append(rhs(t + h, p, s, y)[0])
    return HistoryState(tau, np.array(phi), np.array(dphi), y, psi=np.array(psi))
