"""
Time-gated photon statistics
============================

Discarding photons detected before a gate start time removes the
re-excitation pairs of the input almost completely once the gate passes the
pulse. In the output, two-photon events survive much later.
"""

import math

import matplotlib.pyplot as plt
import numpy as np

from qdcascade.experiments import ExperimentConfig, gated_rows

config = ExperimentConfig(gate_starts=tuple(float(t) for t in range(0, 625, 25)))
rows = np.array(gated_rows(config))

for t, g_in, g_out, _, _ in rows:
    print(f"t_start {t:5.0f} ps   g2_in {g_in:.3e}   g2_out {g_out:.3e}")

############################################################

fig, ax = plt.subplots()
ax.semilogy(rows[:, 0], rows[:, 1] / rows[0, 1], "o-", label="input")
ax.semilogy(rows[:, 0], rows[:, 2] / rows[0, 2], "o-", label="output")
ax.axvline(config.pulse.t_c + 2 * config.pulse.tau_p, color="0.6")
ax.set_xlabel("gate start (ps)")
ax.set_ylabel("gated g2 / ungated g2")
ax.legend()
plt.show()
