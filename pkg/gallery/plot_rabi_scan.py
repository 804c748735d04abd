"""
Rabi oscillations and photon statistics
=======================================

Scanning the laser pulse area tunes the input light from mostly one photon
(pi) to a mixture with two-photon terms (2pi). The output g2 exceeds the
input g2 except around 2pi.
"""

import math

import matplotlib.pyplot as plt
import numpy as np

from qdcascade.experiments import ExperimentConfig, scan_rows

############################################################
# A coarser area grid than the default keeps this script quick.

config = ExperimentConfig(scan=tuple(k * math.pi / 4 for k in range(1, 17)))
rows = scan_rows(config)

area = np.array([r.area for r in rows]) / math.pi
for r in rows:
    print(f"A = {r.area / math.pi:5.2f} pi   N_in {r.flux_in:.4f}   N_out {r.flux_out:.4f}   "
          f"g2_in {r.g2_in:.4f}   g2_out {r.g2_out:.4f}   delta {r.delta_g2:+.4f}")

############################################################

fig, (top, mid, bottom) = plt.subplots(3, 1, sharex=True, figsize=(5, 8))
top.plot(area, [r.flux_in for r in rows], "o-", label="input")
top.plot(area, [r.flux_out for r in rows], "o-", label="output")
top.set_ylabel("photons")
top.legend()
mid.semilogy(area, [r.g2_in for r in rows], "o-")
mid.semilogy(area, [r.g2_out for r in rows], "o-")
mid.set_ylabel("g2(0)")
bottom.plot(area, [r.delta_g2 for r in rows], "o-", color="k")
bottom.axhline(0, color="0.6")
bottom.set_ylabel("g2_out - g2_in")
bottom.set_xlabel("pulse area (pi)")
plt.show()
