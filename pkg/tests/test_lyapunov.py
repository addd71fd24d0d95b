import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from delaylv.dde import HistoryState, integrate
from delaylv.lyapunov import (EnergySeries, derivative_check, energy_series, evaluate, g,
                              is_nonincreasing)
from delaylv.model import FIG1, FIG2, coexistence


def fourier_history(p, rng, n):
    """Random positive smooth history: X* exp(c + a few Fourier modes)."""
    e = coexistence(p)
    k = np.arange(1, 4)
    a, b = rng.normal(0, 0.4, 3) / k, rng.normal(0, 0.4, 3) / k
    c = rng.normal(0, 0.3)
    w = 2 * np.pi * k / p.tau

    def f(s):
        ph = np.outer(w, s)
        return e.x_star * np.exp(c + (a[:, None] * np.sin(ph) + b[:, None] * np.cos(ph)).sum(0))

    def df(s):
        ph = np.outer(w, s)
        return f(s) * (w[:, None] * (a[:, None] * np.cos(ph) - b[:, None] * np.sin(ph))).sum(0)

    return HistoryState.from_function(f, p.tau, n, e.y_star * math.exp(rng.normal(0, 0.5)), dfn=df)


def test_g_values():
    assert g(1.0) == 0.0
    assert g(math.e) == pytest.approx(math.e - 2)
    assert g(0.5) == pytest.approx(0.5 + math.log(2) - 1)
    with pytest.raises(ValueError):
        g(0.0)
    with pytest.raises(ValueError):
        g(np.array([1.0, -2.0]))


def test_g_no_cancellation_near_one():
    assert g(1 + 1e-8) == pytest.approx(0.5e-16, rel=1e-6)


@given(st.floats(1e-6, 1e6))
def test_g_nonnegative_and_convex_minimum(x):
    assert g(x) >= 0
    assert g(x) >= g(1.0)


def test_zero_at_equilibrium():
    e = coexistence(FIG2)
    v = evaluate(FIG2, HistoryState.constant(e.x_star, FIG2.tau, 32, e.y_star))
    assert (v.v1, v.v2, v.v3, v.total) == (0.0, 0.0, 0.0, 0.0)


def test_constant_history_closed_form():
    p = FIG1
    e = coexistence(p)
    v = evaluate(p, HistoryState.constant(2 * e.x_star, p.tau, 16, 3 * e.y_star))
    c3 = p.alpha * p.recruitment * e.x_star
    assert v.v1 == pytest.approx(p.alpha * e.x_star * (1 - math.log(2)))
    assert v.v2 == pytest.approx(e.y_star * (2 - math.log(3)))
    assert v.v3 == pytest.approx(c3 * p.tau * (1 - math.log(2)))


def test_window_integral_fourth_order():
    p = FIG1
    e = coexistence(p)
    f = lambda s: e.x_star * (1.2 + 0.4 * np.sin(1.3 * s))  # noqa: E731
    df = lambda s: e.x_star * 0.52 * np.cos(1.3 * s)  # noqa: E731
    c3 = p.alpha * p.recruitment * e.x_star
    ref = c3 * quad(lambda s: g(f(s) / e.x_star), 0, p.tau, epsabs=1e-14, epsrel=1e-14)[0]
    errs = [abs(evaluate(p, HistoryState.from_function(f, p.tau, n, e.y_star, dfn=df)).v3 - ref)
            for n in (16, 32, 64)]
    assert errs[0] / errs[1] > 12 and errs[1] / errs[2] > 12


def test_requires_positive_state():
    with pytest.raises(ValueError):
        evaluate(FIG1, HistoryState.constant(1.0, 3.0, 16, 0.0))


@pytest.mark.parametrize("p", [FIG1, FIG2])
def test_monotone_along_solutions(p):
    e = coexistence(p)
    tr = integrate(p, HistoryState.constant(1.5 * e.x_star, p.tau, 256, 0.5 * e.y_star), 90.0, 256)
    es = energy_series(p, tr)
    assert es.t[0] == pytest.approx(2 * p.tau)
    assert is_nonincreasing(es)
    assert np.all(es.analytic_dF <= 0)


def test_derivative_identity_converges():
    p = FIG2
    errs = []
    for N in (128, 256, 512):
        hs = fourier_history(p, np.random.default_rng(11), N)
        errs.append(derivative_check(p, integrate(p, hs, 45.0, N)))
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] > 4 and errs[1] / errs[2] > 4


def test_energy_series_csv(tmp_path):
    p = FIG1
    e = coexistence(p)
    es = energy_series(p, integrate(p, HistoryState.constant(e.x_star * 1.1, p.tau, 32, e.y_star), 20.0, 32))
    es.to_csv(tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "t,F,analytic_dF"


def test_energy_series_needs_two_delays():
    p = FIG1
    tr = integrate(p, HistoryState.constant(1.0, p.tau, 16, 1.0), p.tau + 0.5, 16)
    with pytest.raises(ValueError):
        energy_series(p, tr)


def test_nonincreasing_detects_increase():
    t = np.arange(3.0)
    assert not is_nonincreasing(EnergySeries(t, np.array([1.0, 0.5, 0.6]), np.zeros(3)))
    assert is_nonincreasing(EnergySeries(t, np.array([1.0, 0.5, 0.5 + 1e-9]), np.zeros(3)))


@given(st.integers(0, 10_000))
def test_random_histories_monotone(seed):
    p = FIG1
    hs = fourier_history(p, np.random.default_rng(seed), 256)
    assert is_nonincreasing(energy_series(p, integrate(p, hs, 30.0, 256)))
