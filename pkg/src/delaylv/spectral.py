"""Characteristic quasi-polynomial of the linearisation at E*,

    kappa1(l) + kappa2(l) e^{-l tau} = 0,
    kappa1(l) = l^2 + K l + delta gamma0 y*,   kappa2(l) = -K l,   K = beta0 e^{-mu0 tau},

root counting by the argument principle, Newton refinement, the delayed
Malthusian growth rate, and the PDE eigenvalue determinant det(B).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .model import ModelParams, PreconditionError, coexistence, thresholds

POINTS_PER_SIDE = 4096
MAX_POINTS_PER_SIDE = 1 << 20
BOUNDARY_MIN_RESIDUAL = 1e-8
DILATION = 1e-6
MERGE_DIST = 1e-8


class SpectrumError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuasiPolynomial:
    k: float      # beta0 e^{-mu0 tau}
    c: float      # delta gamma0 y*
    tau: float

    @classmethod
    def from_params(cls, params: ModelParams) -> "QuasiPolynomial":
        eq = coexistence(params)
        return cls(params.recruitment, params.delta * params.gamma0 * eq.y_star, params.tau)

    @property
    def kappa1(self):
        """Coefficients of kappa1, highest degree first."""
        return np.array([1.0, self.k, self.c])

    @property
    def kappa2(self):
        return np.array([-self.k, 0.0])

    def __call__(self, lam):
        return char_value(self, lam)

    def derivative(self, lam):
        lam = np.asarray(lam, dtype=complex)
        e = np.exp(-lam * self.tau)
        return 2 * lam + self.k - self.k * e + self.tau * self.k * lam * e


def char_value(qp: QuasiPolynomial, lam):
    lam = np.asarray(lam, dtype=complex)
    out = lam * lam + qp.k * lam + qp.c - qp.k * lam * np.exp(-lam * qp.tau)
    return out[()] if out.ndim == 0 else out


@dataclass
class SpectrumReport:
    re_range: tuple
    im_range: tuple
    count: int
    roots: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)

    @property
    def max_real_part(self) -> Optional[float]:
        return float(np.max(self.roots.real)) if self.roots.size else None

    def imaginary_roots(self, tol=1e-8):
        return self.roots[np.abs(self.roots.real) <= tol]

    def to_dict(self) -> dict:
        return {
            "rectangle": {"re": list(self.re_range), "im": list(self.im_range)},
            "count": self.count,
            "roots": [{"re": float(z.real), "im": float(z.imag), "residual": float(r)}
                      for z, r in zip(self.roots, self.residuals)],
            "max_real_part": self.max_real_part,
        }

    def to_json(self, path):
        with open(path, "w", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _side(z0, z1, n):
    return z0 + (z1 - z0) * np.arange(n) / n


def _contour(re_range, im_range, n):
    a, b = re_range
    c, d = im_range
    corners = [complex(a, c), complex(b, c), complex(b, d), complex(a, d), complex(a, c)]
    return [(corners[i], corners[i + 1]) for i in range(4)]


def winding_number(f, re_range, im_range, n=POINTS_PER_SIDE):
    """Zeros of f inside the rectangle, counted along its counterclockwise boundary.

    Each side starts at ``n`` points and is doubled until no consecutive phase
    jump exceeds pi/2. Returns (count, min |f| on the boundary).
    """
    total = 0.0
    fmin = math.inf
    for z0, z1 in _contour(re_range, im_range, n):
        m = n
        while True:
            z = np.append(_side(z0, z1, m), z1)
            w = f(z)
            dphase = np.angle(w[1:] / w[:-1])
            if np.max(np.abs(dphase)) <= math.pi / 2 or m >= MAX_POINTS_PER_SIDE:
                break
            m *= 2
        fmin = min(fmin, _edge_min(f, z0, z1, m, np.abs(w)))
        total += float(np.sum(dphase))
    return int(round(total / (2 * math.pi))), fmin


def _secant(f, z, iters=60):
    with np.errstate(all="ignore"):
        return _secant_loop(f, z, iters)


def _secant_loop(f, z, iters):
    z0, z1 = complex(z), complex(z) * (1 + 1e-7) + 1e-7
    f0, f1 = complex(f(z0)), complex(f(z1))
    for _ in range(iters):
        if f1 == f0 or not np.isfinite(f1):
            break
        z0, z1 = z1, z1 - f1 * (z1 - z0) / (f1 - f0)
        f0, f1 = f1, complex(f(z1))
        if abs(z1 - z0) <= 1e-15 * (1 + abs(z1)):
            break
    return z1


def _edge_min(f, z0, z1, m, aw, n_candidates=4):
    """Min |f| along a side: the sampled minimum, plus |f| at the projection
    onto the side of any root polished from the smallest local minima (a root
    sitting on the side between samples is missed otherwise)."""
    best = float(aw.min())
    interior = np.nonzero((aw[1:-1] <= aw[:-2]) & (aw[1:-1] <= aw[2:]))[0] + 1
    d = z1 - z0
    for i in interior[np.argsort(aw[interior])][:n_candidates]:
        r = _secant(f, z0 + d * i / m)
        u = ((r - z0) * d.conjugate()).real / abs(d) ** 2
        if np.isfinite(u) and 0.0 <= u <= 1.0:
            with np.errstate(all="ignore"):
                best = min(best, float(abs(f(z0 + d * u))))
    return best


def _residual_ok(qp, z):
    return np.abs(char_value(qp, z)) <= 1e-10 * (1 + np.abs(z) ** 2)


def _newton(qp, seeds, iters=80):
    z = np.asarray(seeds, dtype=complex).copy()
    with np.errstate(all="ignore"):
        for _ in range(iters):
            step = char_value(qp, z) / qp.derivative(z)
            step[~np.isfinite(step)] = 0.0
            z = z - step
    return z


def _merge(roots):
    out = []
    for z in sorted(roots, key=lambda v: (round(v.real, 6), round(v.imag, 6))):
        if all(abs(z - w) > MERGE_DIST for w in out):
            out.append(z)
    return np.array(out, dtype=complex)


def roots_in_rectangle(qp: QuasiPolynomial, re_range=(-0.01, 5.0), im_range=(-50.0, 50.0),
                       grid: int = 24) -> SpectrumReport:
    """Count the roots in the rectangle by winding number and refine them by Newton."""
    re_range, im_range = tuple(map(float, re_range)), tuple(map(float, im_range))
    for _ in range(4):
        count, fmin = winding_number(qp, re_range, im_range)
        if fmin >= BOUNDARY_MIN_RESIDUAL:
            break
        re_range = (re_range[0] - DILATION, re_range[1] + DILATION)
        im_range = (im_range[0] - DILATION, im_range[1] + DILATION)
    else:
        raise SpectrumError("a root sits on the search boundary after 3 dilations")

    roots = np.empty(0, dtype=complex)
    g = grid
    for _ in range(4):
        if count == 0:
            break
        xs = np.linspace(*re_range, g)
        ys = np.linspace(*im_range, g)
        seeds = (xs[:, None] + 1j * ys[None, :]).ravel()
        z = _newton(qp, seeds)
        inside = ((z.real >= re_range[0]) & (z.real <= re_range[1])
                  & (z.imag >= im_range[0]) & (z.imag <= im_range[1]))
        with np.errstate(all="ignore"):
            good = np.isfinite(z) & inside & _residual_ok(qp, z)
        roots = _merge(z[good])
        if roots.size == count:
            break
        g *= 2
    if roots.size != count:
        raise SpectrumError(f"winding number {count} but {roots.size} roots refined")
    order = np.lexsort((roots.imag, -roots.real)) if roots.size else []
    roots = roots[order]
    return SpectrumReport(re_range, im_range, count, roots, np.abs(char_value(qp, roots)))


def malthusian_rate(params: ModelParams, tol: float = 1e-12) -> float:
    """Positive root of l + mu0 = K e^{-l tau} (growth rate of prey without predators)."""
    if thresholds(params).r0 <= 1:
        raise PreconditionError("R0 <= 1: no positive growth rate")
    K, mu0, tau = params.recruitment, params.mu0, params.tau
    f = lambda lam: lam + mu0 - K * math.exp(-lam * tau)
    lo, hi = 0.0, K - mu0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _det_entries(params, lam):
    eq = coexistence(params)
    lam = complex(lam)
    s = params.mu0 + lam + eq.y_star * params.gamma0
    if abs(s) < 1e-14:
        raise ValueError("det(B) has a pole at lambda = -(mu0 + gamma0 y*)")
    e = np.exp(-(params.mu0 + lam) * params.tau)
    b1 = 1 - params.beta0 * e / s
    b2 = params.delta * params.beta0 / (params.alpha * s)
    b3 = params.alpha * eq.y_star * params.gamma0 * e / s
    b4 = -lam - params.delta * eq.y_star * params.gamma0 / s
    return b1, b2, b3, b4


def pde_det_b(params: ModelParams, lam) -> complex:
    """det(B) = b1 b4 - b2 b3 from the closed forms of the age-structured eigenproblem.

    Satisfies det(B) = -char_value(lam) / (mu0 + lam + gamma0 y*).
    """
    b1, b2, b3, b4 = _det_entries(params, lam)
    return complex(b1 * b4 - b2 * b3)


def _cquad(fn, lo, hi):
    re = quad(lambda a: fn(a).real, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-11)[0]
    im = quad(lambda a: fn(a).imag, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-11)[0]
    return complex(re, im)


def det_b_entries_quadrature(params: ModelParams, lam, a_max: Optional[float] = None):
    """b1..b4 from their defining age integrals (slow; validates the closed forms).

    Uses beta = beta0 1[a >= tau], gamma = gamma0 1[a >= tau], mu = mu0 and
    truncates the age axis at a_max.
    """
    eq = coexistence(params)
    lam = complex(lam)
    mu0, b0, g0, tau, al, dl = (params.mu0, params.beta0, params.gamma0, params.tau,
                                params.alpha, params.delta)
    ys = eq.y_star
    if a_max is None:
        a_max = tau + 40.0 / max(mu0 + g0 * ys + lam.real, 1e-3)

    def surv(a, lam_):
        # exp(-int_0^a (mu + lam + y* gamma))
        return np.exp(-(mu0 + lam_) * a - ys * g0 * max(a - tau, 0.0))

    def inner(a):
        # int_0^a gamma(u) e^{-lam (a - u)} du
        if a <= tau:
            return 0.0
        return g0 * _cquad(lambda u: np.exp(-lam * (a - u)), tau, a)

    Gamma = quad(lambda a: g0 * surv(a, 0.0).real, tau, a_max, limit=200)[0]
    b1 = 1 - _cquad(lambda a: b0 * surv(a, lam), tau, a_max)
    b2 = dl / (al * Gamma) * _cquad(lambda a: b0 * surv(a, 0.0) * inner(a), tau, a_max)
    b3 = al * ys * _cquad(lambda a: g0 * surv(a, lam), tau, a_max)
    b4 = -lam - dl * ys / Gamma * _cquad(lambda a: g0 * surv(a, 0.0) * inner(a), tau, a_max)
    return b1, b2, b3, b4, Gamma


def pde_det_b_quadrature(params: ModelParams, lam, a_max=None) -> complex:
    b1, b2, b3, b4, _ = det_b_entries_quadrature(params, lam, a_max)
    return complex(b1 * b4 - b2 * b3)
