"""Detector-level quantities computed from trajectories and correlation maps."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .core import FWHM_TO_SIGMA, SIGMA_MINUS, SIGMA_PLUS, SystemParams, collective_jump, embed


@dataclass(frozen=True, eq=False)
class FluxTrace:
    times: np.ndarray  # ps
    values: np.ndarray  # 1/ps (or 1/ps^2 for a map diagonal)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.times))

    def normalized(self) -> "FluxTrace":
        peak = float(np.max(self.values))
        return FluxTrace(self.times, self.values / peak if peak > 0 else self.values.copy())

    def clamped(self) -> "FluxTrace":
        """Copy with convolution round-off below 1e-12 set to zero, for export."""
        v = self.values.copy()
        v[(v < 0) & (v > -1e-12)] = 0.0
        return FluxTrace(self.times, v)


@dataclass(frozen=True, eq=False)
class CorrelationMap:
    times: np.ndarray  # shared t1 / t2 axis, ps
    values: np.ndarray  # G2(t1, t2), 1/ps^2

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def is_symmetric(self, rtol=1e-10) -> bool:
        scale = max(float(np.max(np.abs(self.values))), 1e-300)
        return bool(np.max(np.abs(self.values - self.values.T)) <= rtol * scale)


@dataclass(frozen=True)
class FitResult:
    amplitude: float  # fitted value at the window start
    tau: float  # ps
    rms_residual: float  # of log(values)
    window: tuple[float, float]


def flux_first(traj, params: SystemParams) -> FluxTrace:
    """Photon flux (Gamma/2) <s+ s-> leaving the laser-driven emitter.

    A cascaded trajectory is accepted too; its emitter-1 populations are used.
    """
    n = 1 if traj.dim == 2 else 2
    proj = embed(SIGMA_PLUS @ SIGMA_MINUS, 1, n)
    pop = np.einsum("ij,tji->t", proj, traj.states).real
    return FluxTrace(traj.times, 0.5 * params.Gamma * pop)


def flux_second(traj, params: SystemParams) -> FluxTrace:
    if traj.dim != 4:
        raise ValueError("flux_second needs a cascaded (dim 4) trajectory")
    s = collective_jump(params)
    op = s.conj().T @ s
    vals = np.einsum("ij,tji->t", op, traj.states).real
    return FluxTrace(traj.times, 0.5 * params.Gamma * vals)


def _trap_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _flux_on_span(flux: FluxTrace, t0: float, t1: float) -> float:
    h = flux.dt
    i0 = int(round((t0 - flux.times[0]) / h))
    i1 = int(round((t1 - flux.times[0]) / h))
    if i0 < 0 or i1 >= len(flux.times) or abs(flux.times[i0] - t0) > 1e-9 * max(1, abs(t0)) \
            or abs(flux.times[i1] - t1) > 1e-9 * max(1, abs(t1)):
        raise ValueError(f"flux grid does not contain the map span [{t0}, {t1}]")
    return float(np.trapezoid(flux.values[i0:i1 + 1], dx=h))


def g2_bar_gated(cmap: CorrelationMap, flux: FluxTrace, t_start: float) -> float:
    """Time-integrated g2(0) keeping only photons detected at t >= t_start.

    ``t_start`` snaps to the nearest map grid point. The two-time integral
    over t2 >= t1, doubled, is the full-square integral of the symmetric map.
    """
    t = cmap.times
    i0 = int(np.argmin(np.abs(t - t_start)))
    if len(t) - i0 < 2:
        raise ValueError(f"gate starting at {t_start} ps leaves an empty window")
    h = cmap.dt
    w = _trap_weights(len(t) - i0, h)
    num = float(w @ cmap.values[i0:, i0:] @ w)
    den = _flux_on_span(flux, t[i0], t[-1])
    if den == 0.0:
        raise ValueError("zero integrated flux: undefined statistics")
    return num / den ** 2


def g2_bar(cmap: CorrelationMap, flux: FluxTrace) -> float:
    """Pulse-integrated g2(0): 2 int dt int dtau G2(t, t+tau) / (int N dt)^2."""
    return g2_bar_gated(cmap, flux, cmap.times[0])


def gaussian_kernel(fwhm: float, h: float) -> np.ndarray:
    sigma = fwhm * FWHM_TO_SIGMA
    half = int(math.ceil(8.0 * sigma / h))
    x = h * np.arange(-half, half + 1)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def convolve_jitter_1d(trace: FluxTrace, fwhm: float) -> FluxTrace:
    """Convolve with a unit-sum Gaussian detector response (zero outside the grid)."""
    if fwhm < 0:
        raise ValueError("fwhm must be non-negative")
    if fwhm == 0:
        return FluxTrace(trace.times, trace.values.copy())
    k = gaussian_kernel(fwhm, trace.dt)
    return FluxTrace(trace.times, convolve1d(trace.values, k, mode="constant"))


def convolve_jitter_2d(cmap: CorrelationMap, fwhm: float) -> CorrelationMap:
    if fwhm < 0:
        raise ValueError("fwhm must be non-negative")
    if fwhm == 0:
        return CorrelationMap(cmap.times, cmap.values.copy())
    k = gaussian_kernel(fwhm, cmap.dt)
    v = convolve1d(cmap.values, k, axis=0, mode="constant")
    v = convolve1d(v, k, axis=1, mode="constant")
    return CorrelationMap(cmap.times, v)


def fit_monoexponential(trace: FluxTrace, window) -> FitResult:
    """Least-squares straight line through log(values) on ``window = (t_a, t_b)``."""
    t_a, t_b = window
    mask = (trace.times >= t_a - 1e-9) & (trace.times <= t_b + 1e-9)
    if mask.sum() < 5:
        raise ValueError(f"fit window {window} holds fewer than 5 points")
    t = trace.times[mask]
    y = trace.values[mask]
    if np.any(y <= 0):
        raise ValueError(f"non-positive values in fit window {window}")
    slope, intercept = np.polyfit(t, np.log(y), 1)
    if slope >= 0:
        raise ValueError(f"no decay in fit window {window} (slope {slope:g})")
    resid = np.log(y) - (slope * t + intercept)
    return FitResult(
        amplitude=float(math.exp(intercept + slope * t[0])),
        tau=float(-1.0 / slope),
        rms_residual=float(np.sqrt(np.mean(resid ** 2))),
        window=(float(t_a), float(t_b)),
    )


def diagonal(cmap: CorrelationMap) -> FluxTrace:
    """Equal-time correlations G2(t, t)."""
    return FluxTrace(cmap.times, np.diag(cmap.values).copy())


def band_fraction(cmap: CorrelationMap, half_width: float) -> float:
    """Share of the map integral within ``|t1 - t2| < half_width``."""
    t1, t2 = np.meshgrid(cmap.times, cmap.times, indexing="ij")
    w = _trap_weights(len(cmap.times), cmap.dt)
    ww = np.outer(w, w) * cmap.values
    total = ww.sum()
    if total == 0:
        raise ValueError("map integrates to zero")
    return float(ww[np.abs(t1 - t2) < half_width].sum() / total)


def visibility(a0: float, a1: float) -> float:
    """Raw HOM visibility from the central (a0) and side (a1) peak areas."""
    if not a1 > 0:
        raise ValueError("side-peak area must be positive")
    return 1.0 - a0 / a1


def indistinguishability(v: float, g2: float) -> float:
    """Indistinguishability corrected for multi-photon contributions."""
    if not g2 < 1:
        raise ValueError("g2 must be below 1")
    return (v + g2) / (1.0 - g2)
