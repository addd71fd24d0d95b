"""Period function of the planar Lotka-Volterra system attached to each scenario."""
import numpy as np

from delaylv.model import FIG1, FIG2, periodicity_index
from delaylv.planar import PlanarParams, find_periodic_orbit, period

for name, p in (("beta0=10", FIG1), ("beta0=20", FIG2)):
    pp = PlanarParams.from_model(p)
    print(f"{name}: a={pp.a:.5f} b={pp.b} c={pp.c} d={pp.d}  T(0+)={pp.small_period:.5f}  "
          f"tau={p.tau}  index={periodicity_index(p):.5f}")
    for E in np.geomspace(1e-3, 10.0, 9):
        print(f"    E={E:9.4f}  T={period(pp, E):.6f}")
    orbit = find_periodic_orbit(p)
    if orbit is None:
        print("    no tau-periodic orbit: T(E) > tau for every E")
    else:
        print(f"    tau-periodic orbit: planar energy {orbit.planar_energy:.6f}, "
              f"functional level {orbit.energy:.4f}, closure {orbit.closure_residual:.1e}")
