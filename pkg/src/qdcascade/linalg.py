"""Dense complex linear algebra for the small operators used here (dim <= 16).

Matrices are plain complex ``numpy.ndarray`` objects. The helpers in this
module add the dimension checks and the two kernels we keep in-house: a
cyclic Jacobi eigenvalue solver for Hermitian matrices and a
scaling-and-squaring Taylor matrix exponential.
"""
from __future__ import annotations

import math

import numpy as np


class DimensionError(ValueError):
    """Raised when two operands have incompatible shapes."""

    def __init__(self, op: str, dim_a, dim_b):
        self.op = op
        self.dim_a = dim_a
        self.dim_b = dim_b
        super().__init__(f"{op}: incompatible dimensions {dim_a} and {dim_b}")


class NotHermitianError(ValueError):
    def __init__(self, asymmetry: float):
        self.asymmetry = asymmetry
        super().__init__(f"matrix is not Hermitian (max |m - m^H| = {asymmetry:.3e})")


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite, square complex matrix."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError("as_matrix", a.shape, "square")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _same_dim(op, a, b):
    if a.shape != b.shape:
        raise DimensionError(op, a.shape[0], b.shape[0])


def add(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_dim("add", a, b)
    return a + b


def scale(a, c: complex) -> np.ndarray:
    return complex(c) * as_matrix(a)


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_dim("matmul", a, b)
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def trace(a) -> complex:
    return complex(np.trace(as_matrix(a)))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_dim("commutator", a, b)
    return a @ b - b @ a


def hermitian_eigenvalues(m, tol: float = 1e-10) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix by cyclic Jacobi rotations."""
    a = as_matrix(m)
    asym = float(np.max(np.abs(a - a.conj().T)))
    if asym > tol:
        raise NotHermitianError(asym)
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    scale_ = max(float(np.max(np.abs(a))), 1e-300)

    for _sweep in range(100):
        off = math.sqrt(float(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2)))
        if off <= 1e-15 * scale_:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                # phase-rotate a[p, q] to a real number, then use a real Jacobi rotation
                phase = apq / abs(apq)
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * math.atan2(2 * abs(apq), aqq - app)
                c, s = math.cos(theta), math.sin(theta)
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s * phase
                rot[q, p] = -s * np.conj(phase)
                a = rot.conj().T @ a @ rot
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a).real)


def expm(m) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a truncated Taylor series.

    The matrix is scaled by ``2**-s`` so that its 1-norm is below 1/2, where an
    18-term Taylor sum is accurate to well below double precision, and the
    result is squared ``s`` times.
    """
    a = as_matrix(m)
    n = a.shape[0]
    norm = float(np.max(np.sum(np.abs(a), axis=0)))
    s = 0
    if norm > 0.5:
        s = int(math.ceil(math.log2(norm / 0.5)))
    x = a / (2.0 ** s)

    # Horner form of sum_k x^k / k!
    eye = np.eye(n, dtype=complex)
    result = eye.copy()
    for k in range(18, 0, -1):
        result = eye + (x @ result) / k
    for _ in range(s):
        result = result @ result
    return result
