"""
Single-photon scattering in time
================================

A pi pulse makes the first emitter emit one photon. That photon then drives
the second, identical emitter. The light behind the second emitter first
follows the incoming wave packet, then drops to a destructive-interference
minimum, and finally shows the slower re-emission.
"""

import math

import matplotlib.pyplot as plt

from qdcascade import fit_monoexponential
from qdcascade.experiments import ExperimentConfig, detector_level, local_extrema, simulate

############################################################
# Simulate both generations with the default parameters
# (lifetime 227 ps, 25 ps pulse at 200 ps, 5 % reflection).

config = ExperimentConfig()
sim = simulate(config, math.pi, maps=False)
det = detector_level(sim, config)  # 60 ps Gaussian detector jitter

print("photons per pulse in the measured port:")
print(f"  input  {sim.flux_in.integral():.4f}")
print(f"  output {sim.flux_out.integral():.4f}")

############################################################
# The output profile has two maxima around an interference dip.

for kind, t, value in local_extrema(det.flux_out):
    print(f"{kind} at {t:7.2f} ps  ({value:.3e} / ps)")

first = fit_monoexponential(det.flux_out, config.first_peak_window)
second = fit_monoexponential(det.flux_out, config.second_peak_window)
print(f"first-peak decay  {first.tau:6.1f} ps")
print(f"second-peak decay {second.tau:6.1f} ps")

############################################################
# Plot on a log scale, as time-tag histograms are usually shown.

fig, ax = plt.subplots()
ax.semilogy(det.flux_in.times, det.flux_in.values, label="input")
ax.semilogy(det.flux_out.times, det.flux_out.values, label="output")
ax.set_ylim(1e-7, 1e-2)
ax.set_xlabel("t (ps)")
ax.set_ylabel("flux (1/ps)")
ax.legend()
plt.show()
