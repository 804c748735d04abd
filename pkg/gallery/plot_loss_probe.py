"""
How much does the loop transmission matter?
===========================================

The loop transmission eta'_loss sets how much of the first photon reaches
the second emitter. This sweep reports the output g2 and the change in the
shape of the output profile. Nothing here is a pass/fail check.
"""

from qdcascade.experiments import ExperimentConfig, loss_probe_rows

config = ExperimentConfig(loss_sweep=(0.25, 0.5, 0.75, 1.0))
rows = loss_probe_rows(config)
for eta, g2, flux, dist in rows:
    print(f"eta'_loss {eta:4.2f}   g2_out {g2:.4f}   N_out {flux:.4f}   shape distance {dist:.3f}")
