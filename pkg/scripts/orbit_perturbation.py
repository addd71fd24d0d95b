"""Escape from the tau-periodic orbit for several predator offsets toward y*."""
import numpy as np

from delaylv.dde import integrate
from delaylv.model import FIG2, coexistence
from delaylv.planar import find_periodic_orbit

p = FIG2
e = coexistence(p)
orbit = find_periodic_orbit(p)
q0 = float(orbit.q[0])
print(f"orbit: q(tau)={q0:.5f}, y*={e.y_star:.5f}")
for shift in (0.0, 0.01, 0.1, 0.3):
    tr = integrate(p, orbit.history(y_tau=q0 + shift * (e.y_star - q0)), 3000.0, 256)
    d = np.hypot(tr.X - e.x_star, tr.y - e.y_star)
    at = {t: d[np.searchsorted(tr.t, t)] for t in (500, 1000, 2000, 3000)}
    print(f"shift {shift:4.2f}: " + "  ".join(f"t={t}: {v:.2e}" for t, v in at.items()))
