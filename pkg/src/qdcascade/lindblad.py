"""Liouvillians of the driven emitter and the cascaded pair, RK4 propagation
and two-time intensity correlations by quantum regression.

Density matrices are vectorised row-major, so ``vec(A @ rho @ B)`` equals
``kron(A, B.T) @ vec(rho)``. A Liouvillian is stored as three constant
superoperators multiplied by 1, Omega(t) and Omega(t)**2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .core import (
    IDENTITY,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    PulseSpec,
    SystemParams,
    TimeGrid,
    embed,
    gaussian_rabi,
)
from .observables import CorrelationMap

TRACE_TOL = 1e-9
POSITIVITY_ABORT = -1e-6


class IntegrationError(RuntimeError):
    """The fixed-step integrator produced an unphysical state."""


def dissipator(x, rho) -> np.ndarray:
    """D[x] rho = x rho x^H - (x^H x rho + rho x^H x) / 2."""
    x = linalg.as_matrix(x)
    rho = linalg.as_matrix(rho)
    if x.shape != rho.shape:
        raise linalg.DimensionError("dissipator", x.shape[0], rho.shape[0])
    xd = x.conj().T
    xdx = xd @ x
    return x @ rho @ xd - 0.5 * (xdx @ rho + rho @ xdx)


def _left(a):
    return linalg.kron(a, np.eye(a.shape[0]))


def _right(b):
    return linalg.kron(np.eye(b.shape[0]), b.T)


def _hamiltonian_super(h):
    return -1j * (_left(h) - _right(h))


def _dissipator_super(x):
    xd = x.conj().T
    xdx = xd @ x
    return linalg.kron(x, xd.T) - 0.5 * (_left(xdx) + _right(xdx))


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Time-dependent generator ``L(t) = static + Omega(t) drive + Omega(t)**2 drive_sq``."""

    params: SystemParams
    pulse: PulseSpec
    dim: int
    static: np.ndarray
    drive: np.ndarray
    drive_sq: np.ndarray

    def rabi(self, t):
        return gaussian_rabi(self.pulse, t)

    def superoperator(self, t: float) -> np.ndarray:
        om = float(self.rabi(t))
        return self.static + om * self.drive + (om * om) * self.drive_sq

    def __call__(self, t: float, rho) -> np.ndarray:
        """d rho / dt for one state or a stack of states of shape (..., dim, dim)."""
        rho = np.asarray(rho, dtype=complex)
        d = self.dim
        if rho.shape[-2:] != (d, d):
            raise linalg.DimensionError("Liouvillian", rho.shape[-1], d)
        v = rho.reshape(rho.shape[:-2] + (d * d,))
        return (v @ self.superoperator(t).T).reshape(rho.shape)


def _emitter_terms(params: SystemParams, which: int, n: int):
    """Undriven generator of one emitter: detuning, decay and pure dephasing."""
    sm = embed(SIGMA_MINUS, which, n)
    sz = embed(SIGMA_Z, which, n)
    out = params.Gamma * _dissipator_super(sm) + params.gamma_d * _dissipator_super(sz)
    if params.delta_L:
        out = out + _hamiltonian_super(0.5 * params.delta_L * sz)
    return out


def _drive_terms(params: SystemParams, n: int):
    sx = embed(SIGMA_PLUS + SIGMA_MINUS, 1, n)
    sz = embed(SIGMA_Z, 1, n)
    return _hamiltonian_super(0.5 * sx), params.B * _dissipator_super(sz)


def liouvillian_single(params: SystemParams, pulse: PulseSpec) -> Liouvillian:
    """Laser-driven emitter with decay, pure dephasing and B*Omega^2 phonon dephasing."""
    drive, drive_sq = _drive_terms(params, 1)
    return Liouvillian(params, pulse, 2, _emitter_terms(params, 1, 1), drive, drive_sq)


def liouvillian_cascaded(params: SystemParams, pulse: PulseSpec) -> Liouvillian:
    """Emitter 1 driven by the laser, emitter 2 driven by emitter 1's output.

    The coupling term ``-(sqrt(eta_loss) Gamma / 2)([s2+, s1- rho] + [rho s1+, s2-])``
    is unidirectional: emitter 2 never acts back on emitter 1.
    """
    drive, drive_sq = _drive_terms(params, 2)
    s1m = embed(SIGMA_MINUS, 1, 2)
    s1p = embed(SIGMA_PLUS, 1, 2)
    s2m = embed(SIGMA_MINUS, 2, 2)
    s2p = embed(SIGMA_PLUS, 2, 2)
    # [s2+, s1- rho] + [rho s1+, s2-]
    coupling = (
        _left(s2p @ s1m) - linalg.kron(s1m, s2p.T)
        + _right(s1p @ s2m) - linalg.kron(s2m, s1p.T)
    )
    static = (
        _emitter_terms(params, 1, 2)
        + _emitter_terms(params, 2, 2)
        - 0.5 * np.sqrt(params.eta_loss) * params.Gamma * coupling
    )
    return Liouvillian(params, pulse, 4, static, drive, drive_sq)


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: TimeGrid
    states: np.ndarray  # (len(grid), dim, dim)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times()

    @property
    def dim(self) -> int:
        return self.states.shape[-1]

    def __len__(self):
        return len(self.states)


def rk4_step_matrix(L: Liouvillian, t: float, h: float) -> np.ndarray:
    """Linear map of one classic RK4 step from t to t + h on vec(rho)."""
    m0 = L.superoperator(t)
    mh = L.superoperator(t + 0.5 * h)
    m1 = L.superoperator(t + h)
    eye = np.eye(m0.shape[0], dtype=complex)
    k1 = m0
    k2 = mh @ (eye + 0.5 * h * k1)
    k3 = mh @ (eye + 0.5 * h * k2)
    k4 = m1 @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _symmetrize(v, d):
    x = v.reshape(v.shape[:-1] + (d, d))
    x = 0.5 * (x + np.swapaxes(x.conj(), -1, -2))
    return x.reshape(v.shape)


def _check_trajectory(states, grid):
    tr = np.trace(states, axis1=1, axis2=2)
    drift = float(np.max(np.abs(tr - 1.0)))
    if drift > TRACE_TOL:
        raise IntegrationError(f"trace drift {drift:.2e} exceeds {TRACE_TOL:g}")
    lam = np.linalg.eigvalsh(states)[:, 0]
    k = int(np.argmin(lam))
    if lam[k] < POSITIVITY_ABORT:
        raise IntegrationError(
            f"negative eigenvalue {lam[k]:.3e} at t = {grid.times()[k]:g} ps; "
            f"dt = {grid.dt:g} ps is too coarse"
        )


def propagate(L: Liouvillian, rho0, grid: TimeGrid) -> Trajectory:
    """Fixed-step RK4 on ``grid``, symmetrising rho after every step."""
    rho0 = linalg.as_matrix(rho0)
    d = L.dim
    if rho0.shape != (d, d):
        raise linalg.DimensionError("propagate", rho0.shape[0], d)
    times = grid.times()
    states = np.empty((len(times), d * d), dtype=complex)
    v = rho0.reshape(-1)
    states[0] = v
    for k in range(grid.n_steps):
        v = _symmetrize(rk4_step_matrix(L, times[k], grid.dt) @ v, d)
        states[k + 1] = v
    states = states.reshape(-1, d, d)
    _check_trajectory(states, grid)
    return Trajectory(grid, states)


def correlation_map(
    L: Liouvillian,
    jump,
    weight: float,
    rho0,
    grid: TimeGrid,
    stride: int = 1,
    trajectory: Trajectory | None = None,
) -> CorrelationMap:
    """G2(t1, t2) = weight * Tr(J^H J U(t2 <- t1)[J rho(t1) J^H]) on every ``stride``-th grid point.

    U is the propagator of the time-dependent generator between absolute
    times. Conditional states are not renormalised. All rows are advanced
    together as one batch, each entering the batch at its own t1.
    """
    jump = linalg.as_matrix(jump)
    d = L.dim
    if jump.shape != (d, d):
        raise linalg.DimensionError("correlation_map", jump.shape[0], d)
    if stride < 1 or grid.n_steps % stride:
        raise ValueError(f"stride {stride} does not divide {grid.n_steps} grid steps")
    if trajectory is None:
        trajectory = propagate(L, rho0, grid)
    elif trajectory.grid != grid:
        raise ValueError("trajectory was computed on a different grid")

    jd = jump.conj().T
    # Tr(J^H J X) = sum_ij (J^H J)^T_ij X_ij, a dot product with vec(X)
    readout = (jd @ jump).T.reshape(-1)
    times = grid.times()
    n_map = grid.n_steps // stride + 1
    values = np.zeros((n_map, n_map))

    batch = np.empty((n_map, d * d), dtype=complex)
    active = 0
    for k in range(grid.n_steps + 1):
        if k % stride == 0:
            rho = trajectory.states[k]
            batch[active] = (jump @ rho @ jd).reshape(-1)
            active += 1
            col = k // stride
            values[:active, col] = (batch[:active] @ readout).real
        if k < grid.n_steps:
            p = rk4_step_matrix(L, times[k], grid.dt)
            batch[:active] = _symmetrize(batch[:active] @ p.T, d)

    upper = np.triu(values)
    values = weight * (upper + upper.T - np.diag(np.diag(upper)))
    return CorrelationMap(times[::stride].copy(), values)
