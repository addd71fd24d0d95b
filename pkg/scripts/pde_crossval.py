"""Age-structured model against prelude + delayed system, for several age grids."""
import numpy as np

from delaylv.dde import AgeProfile, integrate, prelude_from_pde
from delaylv.model import FIG1, coexistence
from delaylv.pde import PdeState, simulate

p = FIG1
e = coexistence(p)
prof = AgeProfile.bump(p.tau, 0.75 * p.tau, e.x_star, 20.0, 20000)
prev = None
for M in (64, 128, 256, 512):
    r = simulate(p, PdeState.from_profile(p, prof, e.y_star, M), 100.0)
    tr = integrate(p, prelude_from_pde(p, prof, e.y_star, M), 100.0, M)
    err = np.max(np.abs(r.X[M:M + tr.t.size] - tr.X)) / max(1.0, e.x_star)
    ratio = "" if prev is None else f"  ratio {prev / err:.2f}"
    print(f"da = tau/{M:<4d} max |X_pde - X_dde| / max(1, X*) on [tau, 100] = {err:.3e}{ratio}")
    prev = err
