"""Experiment drivers: flux profiles, pulse-area scans, correlation maps,
time-gated statistics and the loss-parameter probe.

Every driver writes plain CSV/JSON into ``config.output_dir`` and records
the produced files, together with the resolved configuration, in
``manifest.json``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import SIGMA_MINUS, PulseSpec, SystemParams, TimeGrid, collective_jump, ground_state
from .lindblad import correlation_map, liouvillian_cascaded, liouvillian_single, propagate
from .observables import (
    CorrelationMap,
    FluxTrace,
    band_fraction,
    convolve_jitter_1d,
    convolve_jitter_2d,
    diagonal,
    fit_monoexponential,
    flux_first,
    flux_second,
    g2_bar,
    g2_bar_gated,
)

log = logging.getLogger(__name__)

WORKERS_ENV = "QDCASCADE_WORKERS"


def parse_area(value) -> float:
    """Pulse area in radians from a number or a string such as ``"2pi"`` or ``"0.5*pi"``."""
    if isinstance(value, (int, float)):
        return float(value)
    s = str(value).strip().lower().replace(" ", "")
    m = re.fullmatch(r"([0-9.eE+-]*)\*?(pi|π)(?:/([0-9.]+))?", s)
    if m:
        coef = float(m.group(1)) if m.group(1) not in ("", "+") else 1.0
        if m.group(1) == "-":
            coef = -1.0
        div = float(m.group(3)) if m.group(3) else 1.0
        return coef * math.pi / div
    return float(s)


def default_scan() -> list[float]:
    return [k * math.pi / 8 for k in range(33)]


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemParams = field(default_factory=SystemParams)
    pulse: PulseSpec = field(default_factory=PulseSpec)
    grid: TimeGrid = field(default_factory=TimeGrid)
    map_grid: TimeGrid = field(default_factory=lambda: TimeGrid(0.0, 2000.0, 4.0))
    scan: tuple = field(default_factory=lambda: tuple(default_scan()))
    gate_starts: tuple = tuple(float(x) for x in range(0, 625, 25))
    output_dir: str = "out"
    apply_jitter: bool = True
    # fit windows (ps) on the jitter-convolved output flux at the configured area
    first_peak_window: tuple = (260.0, 460.0)
    second_peak_window: tuple = (1200.0, 1800.0)
    diagonal_fit_window: tuple = (300.0, 800.0)
    band_half_width: float = 30.0
    loss_sweep: tuple = (0.25, 0.5, 0.75, 1.0)

    def __post_init__(self):
        if any(a < 0 for a in self.scan):
            raise ValueError("scan areas must be non-negative")
        g, m = self.grid, self.map_grid
        stride = m.dt / g.dt
        if abs(stride - round(stride)) > 1e-9 or round(stride) < 1:
            raise ValueError("map_grid.dt must be a positive multiple of grid.dt")
        if abs(m.t_start - g.t_start) > 1e-9 or m.t_end > g.t_end + 1e-9:
            raise ValueError("map_grid must start with grid and end inside it")
        if m.dt > self.pulse.tau_p:
            raise ValueError("map_grid.dt must not exceed the pulse width")
        for t in self.gate_starts:
            if not m.t_start <= t <= m.t_end:
                raise ValueError(f"gate start {t} ps outside the map grid")

    @property
    def map_stride(self) -> int:
        return int(round(self.map_grid.dt / self.grid.dt))

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        if "system" in d:
            kw["system"] = SystemParams(**d["system"])
        if "pulse" in d:
            p = dict(d["pulse"])
            if "area" in p:
                p["area"] = parse_area(p["area"])
            kw["pulse"] = PulseSpec(**p)
        for name in ("grid", "map_grid"):
            if name in d:
                kw[name] = TimeGrid(**d[name])
        if "scan" in d:
            kw["scan"] = tuple(parse_area(a) for a in d["scan"])
        for name in ("gate_starts", "first_peak_window", "second_peak_window",
                     "diagonal_fit_window", "loss_sweep"):
            if name in d:
                kw[name] = tuple(float(x) for x in d[name])
        for name in ("output_dir", "apply_jitter", "band_half_width"):
            if name in d:
                kw[name] = d[name]
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ScanRow:
    area: float
    flux_in: float
    flux_out: float
    g2_in: float
    g2_out: float

    @property
    def delta_g2(self) -> float:
        return self.g2_out - self.g2_in


@dataclass(frozen=True, eq=False)
class Simulation:
    """Both photon generations for one pulse area."""

    flux_in: FluxTrace
    flux_out: FluxTrace
    map_in: CorrelationMap | None = None
    map_out: CorrelationMap | None = None


def simulate(config: ExperimentConfig, area: float | None = None,
             system: SystemParams | None = None, maps: bool = True) -> Simulation:
    params = system or config.system
    pulse = config.pulse if area is None else replace(config.pulse, area=area)
    weight = params.Gamma ** 2 / 4

    l1 = liouvillian_single(params, pulse)
    l2 = liouvillian_cascaded(params, pulse)
    tr1 = propagate(l1, ground_state(1), config.grid)
    tr2 = propagate(l2, ground_state(2), config.grid)
    sim = Simulation(flux_first(tr1, params), flux_second(tr2, params))
    if not maps:
        return sim

    g = config.grid
    mg = TimeGrid(g.t_start, config.map_grid.t_end, g.dt)
    if mg != g:
        # regression only needs the map span; reuse the stored states on it
        tr1 = type(tr1)(mg, tr1.states[:len(mg)])
        tr2 = type(tr2)(mg, tr2.states[:len(mg)])
    m1 = correlation_map(l1, SIGMA_MINUS, weight, ground_state(1), mg, config.map_stride, tr1)
    m2 = correlation_map(l2, collective_jump(params), weight, ground_state(2), mg,
                         config.map_stride, tr2)
    return replace(sim, map_in=m1, map_out=m2)


def detector_level(sim: Simulation, config: ExperimentConfig,
                   system: SystemParams | None = None) -> Simulation:
    """Apply the Gaussian detector jitter when ``config.apply_jitter`` is set."""
    if not config.apply_jitter:
        return sim
    fwhm = (system or config.system).jitter_fwhm
    return Simulation(
        convolve_jitter_1d(sim.flux_in, fwhm),
        convolve_jitter_1d(sim.flux_out, fwhm),
        None if sim.map_in is None else convolve_jitter_2d(sim.map_in, fwhm),
        None if sim.map_out is None else convolve_jitter_2d(sim.map_out, fwhm),
    )


def _g2_or_nan(cmap, flux) -> float:
    # no light at all (A = 0): the ratio is 0/0
    if not np.any(flux.values):
        return math.nan
    return g2_bar(cmap, flux)


def scan_row(config: ExperimentConfig, area: float) -> ScanRow:
    sim = detector_level(simulate(config, area), config)
    return ScanRow(
        area=float(area),
        flux_in=sim.flux_in.integral(),
        flux_out=sim.flux_out.integral(),
        g2_in=_g2_or_nan(sim.map_in, sim.flux_in),
        g2_out=_g2_or_nan(sim.map_out, sim.flux_out),
    )


def n_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        n = int(value)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be at least 1")
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------- output


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trace(path: Path, trace: FluxTrace) -> None:
    trace = trace.clamped()
    write_csv(path, ["t_ps", "flux_per_ps"], zip(trace.times, trace.values))


def write_map(path: Path, cmap: CorrelationMap) -> None:
    t = cmap.times
    v = cmap.values.copy()
    v[(v < 0) & (v > -1e-12 * max(np.max(np.abs(v)), 1e-300))] = 0.0
    rows = ((t[i], t[j], v[i, j]) for i in range(len(t)) for j in range(len(t)))
    write_csv(path, ["t1_ps", "t2_ps", "g2"], rows)


def _out_dir(config) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def update_manifest(config: ExperimentConfig, command: str, files) -> Path:
    """Record ``files`` for ``command``; a manifest for another config is replaced."""
    out = _out_dir(config)
    path = out / "manifest.json"
    resolved = config.to_dict()
    manifest = {"config": resolved, "commands": {}}
    if path.exists():
        try:
            old = json.loads(path.read_text())
        except json.JSONDecodeError:
            old = {}
        if old.get("config") == json.loads(json.dumps(resolved)):
            manifest["commands"] = old.get("commands", {})
    manifest["commands"][command] = sorted(Path(f).name for f in files)
    write_json(path, manifest)
    return path


# --------------------------------------------------------------- drivers


def local_extrema(trace: FluxTrace, rel_floor: float = 1e-6):
    """Interior local maxima and minima, ignoring the numerically flat tails."""
    v = trace.values
    floor = rel_floor * float(np.max(v))
    out = []
    for i in range(1, len(v) - 1):
        if v[i] <= floor:
            continue
        if v[i] > v[i - 1] and v[i] >= v[i + 1]:
            out.append(("max", float(trace.times[i]), float(v[i])))
        elif v[i] < v[i - 1] and v[i] <= v[i + 1]:
            out.append(("min", float(trace.times[i]), float(v[i])))
    return out


def run_flux(config: ExperimentConfig) -> list[Path]:
    out = _out_dir(config)
    sim = simulate(config, maps=False)
    files = [out / "flux_in.csv", out / "flux_out.csv"]
    write_trace(files[0], sim.flux_in)
    write_trace(files[1], sim.flux_out)
    shown = sim
    if config.apply_jitter:
        shown = detector_level(sim, config)
        files += [out / "flux_in_jitter.csv", out / "flux_out_jitter.csv"]
        write_trace(files[2], shown.flux_in)
        write_trace(files[3], shown.flux_out)

    summary = {
        "area": config.pulse.area,
        "jitter_applied": config.apply_jitter,
        "extrema_out": [list(e) for e in local_extrema(shown.flux_out)],
        "integrated_in": shown.flux_in.integral(),
        "integrated_out": shown.flux_out.integral(),
    }
    for name, window in (("first_peak", config.first_peak_window),
                         ("second_peak", config.second_peak_window)):
        try:
            summary[name] = asdict(fit_monoexponential(shown.flux_out, window))
        except ValueError as exc:
            summary[name] = {"error": str(exc)}
    files.append(out / "flux_fits.json")
    write_json(files[-1], summary)
    update_manifest(config, "flux", files)
    return files


def scan_rows(config: ExperimentConfig) -> list[ScanRow]:
    areas = list(config.scan)
    if not areas:
        raise ValueError("scan list is empty")
    workers = min(n_workers(), len(areas))
    if workers == 1:
        return [scan_row(config, a) for a in areas]
    with ProcessPoolExecutor(workers) as pool:
        # map preserves input order whatever the completion order
        return list(pool.map(scan_row, [config] * len(areas), areas))


def run_scan(config: ExperimentConfig) -> list[Path]:
    out = _out_dir(config)
    rows = scan_rows(config)
    path = out / "rabi_scan.csv"
    write_csv(path, ["area_rad", "flux_in", "flux_out", "g2_in", "g2_out", "delta_g2"],
              ((r.area, r.flux_in, r.flux_out, r.g2_in, r.g2_out, r.delta_g2) for r in rows))
    update_manifest(config, "scan", [path])
    return [path]


def run_g2map(config: ExperimentConfig) -> list[Path]:
    out = _out_dir(config)
    sim = simulate(config)
    files = [out / "g2map_in.csv", out / "g2map_out.csv"]
    write_map(files[0], sim.map_in)
    write_map(files[1], sim.map_out)

    w = config.diagonal_fit_window
    summary = {
        "area": config.pulse.area,
        "window": list(w),
        "fit": asdict(fit_monoexponential(diagonal(sim.map_out), w)),
        "lifetime_ps": 1.0 / config.system.Gamma,
        "band_half_width_ps": config.band_half_width,
        "band_fraction_in": band_fraction(sim.map_in, config.band_half_width),
        "band_fraction_out": band_fraction(sim.map_out, config.band_half_width),
    }
    summary["tau_over_lifetime"] = summary["fit"]["tau"] * config.system.Gamma
    if config.apply_jitter:
        det = detector_level(sim, config)
        files += [out / "g2map_in_jitter.csv", out / "g2map_out_jitter.csv"]
        write_map(files[2], det.map_in)
        write_map(files[3], det.map_out)
        summary["fit_jitter"] = asdict(fit_monoexponential(diagonal(det.map_out), w))
        summary["band_fraction_in_jitter"] = band_fraction(det.map_in, config.band_half_width)
        summary["band_fraction_out_jitter"] = band_fraction(det.map_out, config.band_half_width)
    files.append(out / "diagonal_fit.json")
    write_json(files[-1], summary)
    update_manifest(config, "g2map", files)
    return files


def gated_rows(config: ExperimentConfig):
    sim = detector_level(simulate(config), config)
    rows = []
    for ts in config.gate_starts:
        i0 = int(np.argmin(np.abs(sim.map_in.times - ts)))
        t0 = sim.map_in.times[i0]
        rows.append((
            float(ts),
            g2_bar_gated(sim.map_in, sim.flux_in, ts),
            g2_bar_gated(sim.map_out, sim.flux_out, ts),
            _gated_flux(sim.flux_in, t0, sim.map_in.times[-1]),
            _gated_flux(sim.flux_out, t0, sim.map_out.times[-1]),
        ))
    return rows


def _gated_flux(trace: FluxTrace, t0, t1):
    mask = (trace.times >= t0 - 1e-9) & (trace.times <= t1 + 1e-9)
    return float(np.trapezoid(trace.values[mask], trace.times[mask]))


def run_gated(config: ExperimentConfig) -> list[Path]:
    out = _out_dir(config)
    path = out / "gated_g2.csv"
    write_csv(path, ["t_start", "g2_in_gated", "g2_out_gated", "flux_in_gated", "flux_out_gated"],
              gated_rows(config))
    update_manifest(config, "gated", [path])
    return [path]


def loss_probe_rows(config: ExperimentConfig):
    """g2_out and output-flux shape across the eta'_loss sweep.

    The shape distance compares unit-area output profiles with the one at
    eta'_loss = 1, relative to that profile's peak.
    """
    for e in config.loss_sweep:
        if not 0 < e <= 1:
            raise ValueError(f"eta'_loss values must lie in (0, 1], got {e}")
    ref_params = replace(config.system, eta_loss_prime=1.0)
    ref = detector_level(simulate(config, system=ref_params, maps=False), config).flux_out
    ref_shape = ref.values / ref.integral()
    rows = []
    for e in config.loss_sweep:
        params = replace(config.system, eta_loss_prime=e)
        sim = detector_level(simulate(config, system=params), config, params)
        shape = sim.flux_out.values / sim.flux_out.integral()
        dist = float(np.max(np.abs(shape - ref_shape)) / np.max(ref_shape))
        rows.append((e, g2_bar(sim.map_out, sim.flux_out), sim.flux_out.integral(), dist))
    return rows


def run_probe_loss(config: ExperimentConfig) -> list[Path]:
    out = _out_dir(config)
    rows = loss_probe_rows(config)
    path = out / "loss_probe.csv"
    write_csv(path, ["eta_loss_prime", "g2_out", "flux_out", "shape_distance"], rows)
    g2s = np.array([r[1] for r in rows])
    summary = {
        "area": config.pulse.area,
        "g2_out_relative_spread": float((g2s.max() - g2s.min()) / g2s.mean()),
        "max_shape_distance": float(max(r[3] for r in rows)),
    }
    jpath = out / "loss_probe.json"
    write_json(jpath, summary)
    update_manifest(config, "probe-loss", [path, jpath])
    return [path, jpath]


COMMANDS = {
    "flux": run_flux,
    "scan": run_scan,
    "g2map": run_g2map,
    "gated": run_gated,
    "probe-loss": run_probe_loss,
}
