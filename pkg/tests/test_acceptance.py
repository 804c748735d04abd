"""Exit criteria. Each test prints one PASS/FAIL line in the terminal summary."""
import filecmp
import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import expm_propagate
from qdcascade import (
    SystemParams,
    TimeGrid,
    diagonal,
    excited_population,
    fit_monoexponential,
    flux_first,
    flux_second,
    g2_bar,
    g2_bar_gated,
    ground_state,
    indistinguishability,
    liouvillian_cascaded,
    liouvillian_single,
    propagate,
)
from qdcascade.cli import main
from qdcascade.experiments import ExperimentConfig, detector_level, local_extrema, scan_rows, simulate
from qdcascade.observables import band_fraction

LIFETIME = 227.0
# frozen from the A = 2pi default run: raw input-map band fraction 0.0918
INPUT_BAND_THRESHOLD = 0.10


def report(n, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def config():
    return ExperimentConfig()


@pytest.fixture(scope="module")
def sim_pi(config):
    return simulate(config, math.pi)


@pytest.fixture(scope="module")
def sim_2pi(config):
    return simulate(config, 2 * math.pi)


@pytest.fixture(scope="module")
def scan(config):
    return scan_rows(config)


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_01_integrator(config):
    pulse = replace(config.pulse, area=math.pi)
    params = config.system
    worst = 0.0
    for cascaded in (False, True):
        build = liouvillian_cascaded if cascaded else liouvillian_single
        rho0 = ground_state(2 if cascaded else 1)
        traj = propagate(build(params, pulse), rho0, config.grid)
        ref = expm_propagate(params, pulse, cascaded, rho0, 2000.0, 0.1, every=5)
        worst = max(worst, float(np.max(np.abs(traj.states[::2] - ref))))

    coarse = replace(config, grid=TimeGrid(0.0, 2000.0, 0.5))
    conv = 0.0
    for area in (math.pi, 2 * math.pi):
        a, b = simulate(config, area), simulate(coarse, area)
        for x, y in ((a.flux_in.integral(), b.flux_in.integral()),
                     (a.flux_out.integral(), b.flux_out.integral()),
                     (g2_bar(a.map_in, a.flux_in), g2_bar(b.map_in, b.flux_in)),
                     (g2_bar(a.map_out, a.flux_out), g2_bar(b.map_out, b.flux_out))):
            conv = max(conv, _rel(y, x))
        for x, y in ((a.flux_in, b.flux_in), (a.flux_out, b.flux_out)):
            conv = max(conv, float(np.max(np.abs(x.values[::2] - y.values)) / np.max(x.values)))
    report(1, worst <= 1e-8 and conv <= 1e-6,
           f"RK4 vs expm oracle max |d rho| = {worst:.2e} (<= 1e-8); dt-halving change = {conv:.2e} (<= 1e-6)")


def test_02_analytic_limits(config):
    params = config.system
    grid = config.grid
    zero = replace(config.pulse, area=0.0)
    ground = propagate(liouvillian_single(params, zero), ground_state(1), grid)
    stat = float(np.max(np.abs(ground.states - ground_state(1))))

    excited = np.diag([0.0, 1.0]).astype(complex)
    decay = propagate(liouvillian_single(params, zero), excited, grid)
    dec = float(np.max(np.abs(excited_population(decay.states) - np.exp(-params.Gamma * grid.times()))))

    mirror = SystemParams(eta_re=1.0)
    pulse = replace(config.pulse, area=math.pi)
    tr2 = propagate(liouvillian_cascaded(mirror, pulse), ground_state(2), grid)
    tr1 = propagate(liouvillian_single(mirror, pulse), ground_state(1), grid)
    mir = float(np.max(np.abs(flux_second(tr2, mirror).values - flux_first(tr1, mirror).values)))

    cut = SystemParams(eta_re=0.0, eta_loss_prime=0.0)
    trc = propagate(liouvillian_cascaded(cut, pulse), ground_state(2), grid)
    leak = float(np.max(np.abs(excited_population(trc.states, which=2))))

    ok = stat <= 1e-12 and dec <= 1e-8 and mir <= 1e-10 and leak == 0.0
    report(2, ok, f"ground drift {stat:.1e}, decay err {dec:.1e}, mirror err {mir:.1e}, "
                  f"decoupled P_e(2) max {leak:.1e}")


def test_03_output_flux_structure(config, sim_pi):
    out = detector_level(sim_pi, config).flux_out
    ext = local_extrema(out)
    kinds = [e[0] for e in ext]
    first = fit_monoexponential(out, config.first_peak_window)
    second = fit_monoexponential(out, config.second_peak_window)
    ok = kinds == ["max", "min", "max"] and first.tau < LIFETIME < second.tau
    where = ", ".join(f"{k}@{t:.0f}ps" for k, t, _ in ext)
    report(3, ok, f"jittered output flux extrema [{where}]; first-peak tau {first.tau:.1f} ps < 227 < "
                  f"second-peak tau {second.tau:.1f} ps")


def _row(scan, area):
    (r,) = [r for r in scan if abs(r.area - area) < 1e-12]
    return r


def test_04_delta_g2_sign_flip(scan):
    d_pi = _row(scan, math.pi).delta_g2
    d_2pi = _row(scan, 2 * math.pi).delta_g2
    report(4, d_pi > 0 and d_2pi < 0, f"delta g2 at pi = {d_pi:+.4f} (> 0), at 2pi = {d_2pi:+.4f} (< 0)")


def _vertex(x, y, k):
    """Parabola through points k-1, k, k+1: location and value of its vertex."""
    a, b, c = np.polyfit(x[k - 1:k + 2], y[k - 1:k + 2], 2)
    xv = -b / (2 * a)
    return xv, np.polyval([a, b, c], xv)


def test_05_rabi_structure(scan):
    x = np.array([r.area for r in scan]) / math.pi
    y = np.array([r.flux_in for r in scan])
    sel = lambda lo, hi: np.where((x >= lo) & (x <= hi))[0]
    k1 = sel(0.5, 1.5)[np.argmax(y[sel(0.5, 1.5)])]
    k2 = sel(1.5, 2.5)[np.argmin(y[sel(1.5, 2.5)])]
    k3 = sel(2.5, 3.5)[np.argmax(y[sel(2.5, 3.5)])]
    x1, y1 = _vertex(x, y, k1)
    x2, _ = _vertex(x, y, k2)
    x3, y3 = _vertex(x, y, k3)
    global_peak = x[int(np.argmax(y))]
    ok = (abs(x1 - 1) <= 0.1 and abs(x2 - 2) <= 0.2 and y3 < y1
          and abs(global_peak - 1) <= 0.1 and _row(scan, 3 * math.pi).flux_in < _row(scan, math.pi).flux_in)
    report(5, ok, f"input-flux peak at {x1:.3f} pi, minimum at {x2:.3f} pi, "
                  f"3pi peak {y3:.5f} < pi peak {y1:.5f}")


def test_06_stimulated_emission_diagonal(config, sim_2pi):
    fit = fit_monoexponential(diagonal(sim_2pi.map_out), config.diagonal_fit_window)
    ratio = fit.tau / LIFETIME
    report(6, 0.4 <= ratio <= 0.6, f"output-map diagonal tau = {fit.tau:.1f} ps = {ratio:.3f} x 227 ps")


def test_07_input_diagonal_suppression(config, sim_2pi):
    m = sim_2pi.map_in
    diag_max = float(np.max(np.abs(np.diag(m.values))))
    frac_in = band_fraction(m, config.band_half_width)
    frac_out = band_fraction(sim_2pi.map_out, config.band_half_width)
    ok = diag_max <= 1e-12 * np.max(m.values) and frac_in <= INPUT_BAND_THRESHOLD and frac_in < frac_out
    report(7, ok, f"input diag max / map max = {diag_max / np.max(m.values):.1e}; band fraction "
                  f"in {frac_in:.4f} (<= {INPUT_BAND_THRESHOLD}) < out {frac_out:.4f}")


def test_08_gated_statistics(config, sim_pi):
    det = detector_level(sim_pi, config)
    t_lo = config.pulse.t_c - 2 * config.pulse.tau_p
    t_hi = config.pulse.t_c + 2 * config.pulse.tau_p
    drops = []
    for cmap, flux in ((det.map_in, det.flux_in), (det.map_out, det.flux_out)):
        g_lo = g2_bar_gated(cmap, flux, t_lo)
        g_hi = g2_bar_gated(cmap, flux, t_hi)
        drops.append((g_lo - g_hi) / g_lo)
    report(8, drops[0] > drops[1],
           f"relative drop of gated g2 from {t_lo:.0f} to {t_hi:.0f} ps: in {drops[0]:.4f} > out {drops[1]:.4f}")


def test_09_scalar_formulas():
    i_in = indistinguishability(0.900, 0.0173)
    i_out = indistinguishability(0.704, 0.034)
    ok = round(i_in, 4) == 0.9334 and round(i_out, 4) == 0.7640
    report(9, ok, f"I_in = {i_in:.4f} (93.3%), I_out = {i_out:.4f} (76.4%)")


def test_10_determinism(tmp_path):
    same = True
    for command, extra in (("flux", []), ("g2map", ["--area", "2pi"]), ("gated", []),
                           ("probe-loss", []), ("scan", [])):
        outs = []
        for run in ("a", "b"):
            out = tmp_path / run / command
            cfg = tmp_path / f"{command}.json"
            if command == "scan":
                cfg.write_text('{"scan": ["pi/2", "pi", "2pi"]}')
            else:
                cfg.write_text("{}")
            assert main([command, "--config", str(cfg), "--out", str(out), *extra]) == 0
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir() if p.name != "manifest.json")
        match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], names, shallow=False)
        same &= not mismatch and not errors and len(match) == len(names) > 0
    report(10, same, "two runs of flux, g2map, gated, probe-loss and scan produced byte-identical files")
