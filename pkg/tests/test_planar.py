import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from delaylv.dde import integrate
from delaylv.model import FIG1, FIG2, coexistence, imaginary_root_params
from delaylv.planar import (OrbitError, PlanarParams, energy, find_periodic_orbit, integrate_planar,
                            period, section_point)

planar_params = st.builds(PlanarParams, st.floats(0.2, 5.0), st.floats(0.2, 5.0),
                          st.floats(0.2, 5.0), st.floats(0.2, 5.0))


def test_from_model():
    pp = PlanarParams.from_model(FIG2)
    e = coexistence(FIG2)
    assert pp.center == pytest.approx((e.x_star, e.y_star))
    assert pp.a == pytest.approx(FIG2.recruitment - FIG2.mu0)


def test_invalid_planar_params():
    with pytest.raises(ValueError):
        PlanarParams(1.0, 0.0, 1.0, 1.0)


def test_energy_zero_at_center():
    pp = PlanarParams(1.0, 2.0, 3.0, 4.0)
    assert energy(pp, *pp.center) == 0.0


@given(planar_params, st.floats(0.01, 3.0))
def test_section_point_on_level(pp, E):
    x, y = section_point(pp, E)
    assert x > pp.center[0] and y == pp.center[1]
    assert energy(pp, x, y) == pytest.approx(E, rel=1e-12)


@given(planar_params)
def test_small_energy_limit(pp):
    assert period(pp, 1e-8) == pytest.approx(pp.small_period, rel=1e-4)


@given(planar_params)
def test_energy_drift_one_period(pp):
    E = 1.0
    T = period(pp, E)
    x0, y0 = section_point(pp, E)
    run = integrate_planar(pp, x0, y0, T / 4096, 4096)
    assert run.energy_drift(pp) <= 1e-8


def test_period_increasing():
    pp = PlanarParams.from_model(FIG2)
    Es = np.linspace(0.05, 8.0, 30)
    T = [period(pp, E) for E in Es]
    assert np.all(np.diff(T) > 0)


def test_period_values():
    pp = PlanarParams.from_model(FIG1)
    got = [period(pp, E) for E in (0.1, 0.5, 1.0, 2.0, 3.0)]
    assert got == pytest.approx([3.407, 3.530, 3.686, 4.007, 4.336], abs=2e-3)


def test_period_rejects_nonpositive_energy():
    with pytest.raises(ValueError):
        period(PlanarParams(1, 1, 1, 1), 0.0)


def test_no_orbit_below_threshold():
    assert find_periodic_orbit(FIG1) is None


def test_no_orbit_at_boundary():
    assert find_periodic_orbit(imaginary_root_params(k=1)) is None


@pytest.fixture(scope="module")
def orbit():
    return find_periodic_orbit(FIG2)


def test_orbit_properties(orbit):
    e = coexistence(FIG2)
    assert orbit.period == FIG2.tau
    assert orbit.closure_residual <= 1e-8
    assert orbit.p[0] == pytest.approx(e.x_star, abs=1e-9)
    assert orbit.q[0] < e.y_star
    assert orbit.planar_energy == pytest.approx(5.1964, abs=1e-3)
    assert orbit.energy == pytest.approx(82.785, abs=1e-2)
    pp = PlanarParams.from_model(FIG2)
    assert period(pp, orbit.planar_energy) == pytest.approx(FIG2.tau, abs=1e-9)


def test_orbit_periodic_evaluation(orbit):
    t = np.linspace(3.0, 6.0, 11)
    p1, q1 = orbit(t)
    p2, q2 = orbit(t + 3 * FIG2.tau)
    assert np.allclose(p1, p2) and np.allclose(q1, q2)


def test_orbit_tracked_by_delay_integrator(orbit):
    p = FIG2
    tr = integrate(p, orbit.history(), 11 * p.tau, 512)
    P, Q = orbit(tr.t)
    assert max(np.max(np.abs(tr.X - P)), np.max(np.abs(tr.y - Q))) <= 1e-5


def test_orbit_csv(tmp_path, orbit):
    orbit.to_csv(tmp_path / "o.csv")
    assert (tmp_path / "o.csv").read_text().startswith("t,p,q\n")
    assert "closure_residual" in (tmp_path / "o.json").read_text()


def test_period_search_gives_up():
    with pytest.raises(OrbitError):
        period(PlanarParams(1, 1, 1, 1), 1.0, max_periods=0.5)
