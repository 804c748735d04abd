"""Operators, parameters and states for one or two cascaded two-level emitters.

Basis convention: ``|g> = index 0``, ``|e> = index 1``; two emitters are
ordered emitter 1 (driven) tensor emitter 2 (fed by emitter 1's output).
Times are in ps and rates in 1/ps throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e|
SIGMA_PLUS = SIGMA_MINUS.conj().T
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)  # |e><e| - |g><g|
IDENTITY = np.eye(2, dtype=complex)

# jitter FWHM -> Gaussian sigma
FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))

LIFETIME_PS = 227.0


@dataclass(frozen=True)
class SystemParams:
    """Physical rates of the emitter(s) and the optical loop.

    ``B`` has units of ps so that ``B * Omega(t)**2`` is a dephasing rate.
    """

    Gamma: float = 1.0 / LIFETIME_PS
    gamma_d: float = 0.035 / LIFETIME_PS
    B: float = 1.3e-4 * LIFETIME_PS
    delta_L: float = 0.0
    eta_re: float = 0.05
    eta_loss_prime: float = 1.0
    jitter_fwhm: float = 60.0

    def __post_init__(self):
        if not self.Gamma > 0:
            raise ValueError(f"Gamma must be positive, got {self.Gamma}")
        if self.gamma_d < 0 or self.B < 0:
            raise ValueError("dephasing rates must be non-negative")
        for name in ("eta_re", "eta_loss_prime"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.jitter_fwhm < 0:
            raise ValueError("jitter_fwhm must be non-negative")

    @property
    def eta_loss(self) -> float:
        """Fraction of emitter-1 light that reaches emitter 2."""
        return (1.0 - self.eta_re) * self.eta_loss_prime


@dataclass(frozen=True)
class PulseSpec:
    area: float = math.pi
    tau_p: float = 25.0
    t_c: float = 200.0

    def __post_init__(self):
        if self.area < 0:
            raise ValueError(f"pulse area must be non-negative, got {self.area}")
        if not self.tau_p > 0:
            raise ValueError(f"tau_p must be positive, got {self.tau_p}")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_start, t_start + dt, ..., t_end``."""

    t_start: float = 0.0
    t_end: float = 2000.0
    dt: float = 0.25

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        n = (self.t_end - self.t_start) / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(f"(t_end - t_start) / dt = {n} is not an integer")

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps + 1)

    def __len__(self):
        return self.n_steps + 1


def embed(op, which: int, n: int) -> np.ndarray:
    """Place a single-emitter operator on factor ``which`` (1-based) of ``n`` emitters."""
    op = linalg.as_matrix(op)
    if op.shape != (2, 2):
        raise linalg.DimensionError("embed", op.shape[0], 2)
    if n not in (1, 2) or not 1 <= which <= n:
        raise IndexError(f"subsystem {which} out of range for {n} subsystem(s)")
    factors = [IDENTITY] * n
    factors[which - 1] = op
    out = factors[0]
    for f in factors[1:]:
        out = linalg.kron(out, f)
    return out


def gaussian_rabi(pulse: PulseSpec, t):
    """Rabi frequency Omega(t) (1/ps) of a Gaussian pulse with time integral ``pulse.area``."""
    t = np.asarray(t, dtype=float)
    norm = math.sqrt(2.0 * math.log(2.0) / (math.pi * pulse.tau_p ** 2))
    return pulse.area * norm * np.exp(-2.0 * math.log(2.0) * (t - pulse.t_c) ** 2 / pulse.tau_p ** 2)


def collective_jump(params: SystemParams) -> np.ndarray:
    """Lowering operator of the measured field behind emitter 2 (dim 4).

    Emitter 1's light that is reflected before entering the cavity interferes
    destructively with what passes through, hence the difference of roots.
    """
    c = math.sqrt(params.eta_loss) - math.sqrt(params.eta_re)
    return c * embed(SIGMA_MINUS, 1, 2) + embed(SIGMA_MINUS, 2, 2)


def ground_state(n: int) -> np.ndarray:
    if n not in (1, 2):
        raise ValueError(f"number of subsystems must be 1 or 2, got {n}")
    rho = np.zeros((2 ** n, 2 ** n), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def excited_population(rho, which: int = 1) -> np.ndarray:
    """<sigma_+ sigma_-> of one emitter for a state or a stack of states."""
    rho = np.asarray(rho)
    n = 1 if rho.shape[-1] == 2 else 2
    proj = embed(SIGMA_PLUS @ SIGMA_MINUS, which, n)
    return np.einsum("ij,...ji->...", proj, rho).real


def check_density_matrix(rho, herm_tol=1e-10, trace_tol=1e-9, pos_tol=1e-9) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and positive."""
    rho = linalg.as_matrix(rho)
    if rho.shape[0] not in (2, 4):
        raise ValueError(f"density matrix must be 2x2 or 4x4, got {rho.shape}")
    asym = float(np.max(np.abs(rho - rho.conj().T)))
    if asym > herm_tol:
        raise ValueError(f"density matrix not Hermitian (asymmetry {asym:.2e})")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"density matrix trace {tr} differs from 1")
    lam = linalg.hermitian_eigenvalues(0.5 * (rho + rho.conj().T))
    if lam[0] < -pos_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam[0]:.3e}")
