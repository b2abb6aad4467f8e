"""Rate coefficients across the driving-force grid: the Marcus turnover.

Scans explicit-mode rates over dG in [0, 0.3] and compares against the
low-temperature Franck-Condon theory curve. The maximum sits near the
reorganization energy lambda = A1 (2 A0)^2 = 0.135. Takes a few minutes;
pass a smaller n to go faster.
"""
import sys

import numpy as np

from walshpress import GridSpec, MarcusConfig, rate_scan, reorganization_energy
from walshpress.marcus import fc_rate_curve

n = int(sys.argv[1]) if len(sys.argv) > 1 else 8
config = MarcusConfig(grid=GridSpec(n, 20.0), mu=3.0, a1=0.015, a0=1.5, tau=1.0)
dgs = [0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30]

print(f"lambda = {reorganization_energy(config):.3f} a.u.; scanning {len(dgs)} driving forces")
rows = rate_scan(config, dgs, modes=("explicit",), workers=4)
fc = fc_rate_curve(config, dgs)

print(f"{'dG':>6} {'k (simulated)':>15} {'k_FC (theory shape)':>20}")
for row, k_fc in zip(rows, fc):
    print(f"{row.dG:>6.2f} {row.k:>15.3e} {k_fc:>20.3e}")
ks = [r.k for r in rows]
print(f"\nsimulated maximum at dG = {dgs[int(np.argmax(ks))]}, "
      f"FC maximum at dG = {dgs[int(np.argmax(fc))]}")
