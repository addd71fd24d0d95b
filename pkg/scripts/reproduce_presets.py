"""Run the three reference scenarios and print a one-line summary of each.

usage: python3 scripts/reproduce_presets.py [output_root]
"""
import sys

from delaylv.scenario import ReproductionMismatch, reproduce


def main(root="out"):
    status = 0
    for name in ("fig1", "fig2", "fig3"):
        try:
            rep = reproduce(name, output_root=root)
            tag = "ok"
        except ReproductionMismatch as err:
            rep, tag, status = err.report, f"MISMATCH ({err})", 2
        orbit = rep.orbit or {}
        print(f"{name}: index={rep.periodicity_index:.4f} partition={rep.partition} verdict={rep.verdict} "
              f"dist={rep.distances['to_E_star']:.2e}@t={rep.distances['t']:.0f} "
              f"orbit={'yes' if orbit.get('exists') else 'no'} {tag}")
    return status


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
