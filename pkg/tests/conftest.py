import math

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from delaylv.model import ModelParams

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def model_params(draw, coexist=None):
    """Valid parameter sets; coexist=True forces R0 > 1 (with margin), False forces R0 < 1."""
    mu0 = draw(st.floats(0.05, 2.0))
    tau = draw(st.floats(0.2, 6.0))
    gamma0 = draw(st.floats(0.05, 2.0))
    alpha = draw(st.floats(0.05, 0.95))
    delta = draw(st.floats(0.05, 3.0))
    if coexist is None:
        beta0 = draw(st.floats(0.05, 50.0))
    else:
        r0 = draw(st.floats(1.05, 20.0) if coexist else st.floats(0.05, 0.95))
        beta0 = r0 * mu0 * math.exp(mu0 * tau)
    return ModelParams(mu0=mu0, beta0=beta0, gamma0=gamma0, tau=tau, alpha=alpha, delta=delta)


@pytest.fixture
def tmp_out(tmp_path, monkeypatch):
    monkeypatch.setenv("DELAYLV_OUTPUT_ROOT", str(tmp_path))
    return tmp_path


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = []


def record(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
