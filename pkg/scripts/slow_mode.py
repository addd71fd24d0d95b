"""Why the beta0 = 10 scenario needs long horizons.

Prints the rightmost characteristic roots and compares their decay rate with
the distance to E* along the fig1 run and along the age-structured run from a
bump profile.
"""
import math

import numpy as np

from delaylv.dde import AgeProfile, HistoryState, integrate
from delaylv.model import FIG1, coexistence
from delaylv.pde import PdeState, equilibrium_e2, simulate
from delaylv.spectral import QuasiPolynomial, roots_in_rectangle

p = FIG1
e = coexistence(p)
rep = roots_in_rectangle(QuasiPolynomial.from_params(p), (-0.5, 5.0), (-50.0, 50.0))
print("rightmost roots:", ", ".join(f"{z.real:+.6f}{z.imag:+.6f}i" for z in rep.roots[:4]))
rate = -rep.max_real_part
print(f"decay e^(-{rate:.5f} t): factor {math.exp(-rate * 500):.3f} by t=500, "
      f"time to shrink 1000x = {math.log(1000) / rate:.0f}")

tr = integrate(p, HistoryState.constant(1.5 * e.x_star, p.tau, 256, 0.5 * e.y_star), 3000.0, 256)
d = np.hypot(tr.X - e.x_star, tr.y - e.y_star)
print("\ndelayed system, phi = 1.5 X*, y = 0.5 y*")
for t in (500, 1000, 1500, 2000, 2500, 3000):
    k = np.searchsorted(tr.t, t)
    print(f"  t={t:5d}  |(X,y)-E*| = {d[k]:.3e}")

M = 256
eq = equilibrium_e2(p, M)
prof = AgeProfile.bump(p.tau, 0.75 * p.tau, e.x_star, 20.0, 20000)
snaps = {}
simulate(p, PdeState.from_profile(p, prof, e.y_star, M, a_max=eq.ages[-1]), 3000.0,
         snapshots=(500, 1000, 2000, 3000),
         on_snapshot=lambda t, s: snaps.setdefault(t, np.max(np.abs(s.x - eq.profile)) / eq.x2_at_zero))
print("\nage-structured model from a bump, sup |x - x2| / x2(0)")
for t, v in snaps.items():
    print(f"  t={t:5d}  {v:.3e}")
