"""Parameters, thresholds, equilibria and the vector field of the delayed
predator-prey system

    X'(t) = beta0 exp(-mu0 tau) X(t - tau) - mu0 X(t) - gamma0 X(t) y(t)
    y'(t) = alpha gamma0 X(t) y(t) - delta y(t)

together with the classifier for initial conditions (phi, y_tau).
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

FIELDS = ("mu0", "beta0", "gamma0", "tau", "alpha", "delta")

# integral predicate threshold for "prey mass is positive"
MASS_EPS = 1e-14


class ParameterError(ValueError):
    pass


class PreconditionError(ValueError):
    """Raised when an operation is called outside its domain (e.g. R0 <= 1)."""


@dataclass(frozen=True)
class ModelParams:
    mu0: float
    beta0: float
    gamma0: float
    tau: float
    alpha: float
    delta: float

    def __post_init__(self):
        for name in FIELDS:
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite number, got {v!r}")
            if v <= 0:
                raise ParameterError(f"{name} must be > 0, got {v}")
            object.__setattr__(self, name, float(v))
        if self.alpha >= 1:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def survival(self) -> float:
        """Fraction of newborns reaching the reproductive age tau."""
        return math.exp(-self.mu0 * self.tau)

    @property
    def recruitment(self) -> float:
        """beta0 exp(-mu0 tau), the coefficient of the delayed term."""
        return self.beta0 * self.survival

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        missing = [k for k in FIELDS if k not in d]
        extra = [k for k in d if k not in FIELDS]
        if missing or extra:
            raise ParameterError(f"bad parameter object: missing={missing} unexpected={extra}")
        return cls(**{k: d[k] for k in FIELDS})

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


# the numerical scenarios of the reference experiments; beta0 is the only knob
FIG1 = ModelParams(mu0=0.5, beta0=10.0, gamma0=0.5, tau=3.0, alpha=0.7, delta=2.0)
FIG2 = FIG1.with_(beta0=20.0)


def imaginary_root_params(mu0=0.5, gamma0=0.5, tau=3.0, alpha=0.7, delta=2.0, k=1) -> ModelParams:
    """Parameters whose periodicity index equals the integer ``k``.

    y* = (2 pi k / tau)^2 / (delta gamma0) and beta0 = (mu0 + gamma0 y*) e^{mu0 tau}.
    """
    y_star = (2 * math.pi * k / tau) ** 2 / (delta * gamma0)
    beta0 = (mu0 + gamma0 * y_star) * math.exp(mu0 * tau)
    return ModelParams(mu0=mu0, beta0=beta0, gamma0=gamma0, tau=tau, alpha=alpha, delta=delta)


@dataclass(frozen=True)
class Thresholds:
    r0: float
    r_minus: float
    a1: float


def thresholds(params: ModelParams) -> Thresholds:
    # with beta and gamma supported on [tau, inf) the lower threshold vanishes
    return Thresholds(r0=params.recruitment / params.mu0, r_minus=0.0, a1=params.tau)


class EquilibriumKind(str, enum.Enum):
    EXTINCTION = "E0"
    COEXISTENCE = "E_star"


@dataclass(frozen=True)
class Equilibrium:
    kind: EquilibriumKind
    x_star: float
    y_star: float

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "x_star": self.x_star, "y_star": self.y_star}


def equilibria(params: ModelParams) -> list[Equilibrium]:
    out = [Equilibrium(EquilibriumKind.EXTINCTION, 0.0, 0.0)]
    if thresholds(params).r0 > 1:
        x = params.delta / (params.alpha * params.gamma0)
        y = (params.recruitment - params.mu0) / params.gamma0
        if y > 0:
            out.append(Equilibrium(EquilibriumKind.COEXISTENCE, x, y))
    return out


def coexistence(params: ModelParams) -> Equilibrium:
    """The coexistence equilibrium E*; raises PreconditionError if R0 <= 1."""
    eqs = equilibria(params)
    if len(eqs) < 2:
        raise PreconditionError(f"no coexistence equilibrium: R0 = {thresholds(params).r0} <= 1")
    return eqs[1]


def vector_field(params: ModelParams, x_delayed, x_now, y_now):
    """Right-hand side (dX, dy). Works elementwise on arrays."""
    dx = params.recruitment * x_delayed - params.mu0 * x_now - params.gamma0 * x_now * y_now
    dy = params.alpha * params.gamma0 * x_now * y_now - params.delta * y_now
    return dx, dy


def periodicity_index(params: ModelParams) -> float:
    """tau sqrt(delta y* gamma0) / (2 pi). A tau-periodic orbit exists iff this exceeds 1."""
    eq = coexistence(params)
    return params.tau * math.sqrt(params.delta * eq.y_star * params.gamma0) / (2 * math.pi)


class PartitionLabel(str, enum.Enum):
    S3 = "S3"
    S2_ONLY = "S2_only"
    S1_ONLY = "S1_only"
    # never emitted: with y_tau >= 0 every point of S0 outside S1 and S2 is
    # already covered by BOUNDARY_S2_CAP_S0; kept so the label set is complete
    S0_ONLY = "S0_only"
    BOUNDARY_S2_CAP_S0 = "boundary_S2_cap_S0"
    BOUNDARY_S0 = "boundary_S0"


def classify_samples(phi: np.ndarray, y_tau: float, tau: float) -> PartitionLabel:
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0) or y_tau < 0 or not np.all(np.isfinite(phi)):
        raise ValueError("history must be finite and nonnegative")
    grid = np.linspace(0.0, tau, phi.size)
    mass = np.trapezoid(phi, grid)
    if mass <= MASS_EPS:
        return PartitionLabel.BOUNDARY_S0
    everywhere = bool(np.all(phi > 0))
    if y_tau > 0:
        return PartitionLabel.S3 if everywhere else PartitionLabel.S2_ONLY
    return PartitionLabel.S1_ONLY if everywhere else PartitionLabel.BOUNDARY_S2_CAP_S0


def classify(history) -> PartitionLabel:
    """Partition label of a HistoryState (anything with phi, y_tau, tau)."""
    return classify_samples(history.phi, history.y_tau, history.tau)
