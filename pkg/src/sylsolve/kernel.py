"""Dense complex kernels: plane rotations, Householder QR, norm bounds.

Everything in this package works on plain ``numpy`` arrays of dtype
``complex128``.  Storage is column-major (Fortran order) at the solver
boundaries, which matches the column-sweep access pattern of the
triangular back substitution; helpers here accept any layout.

Plane rotations follow the convention ``[[c, s], [-conj(s), c]]`` with
``c`` real and nonnegative, which removes the phase ambiguity and lets
tests pin down signs exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = float(np.finfo(np.float64).eps)


def as_complex_matrix(M, *, name="matrix"):
    """Coerce to a square complex128 array, rejecting non-finite entries."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


@dataclass(frozen=True)
class PlaneRotation:
    """Unitary 2x2 rotation ``[[c, s], [-conj(s), c]]``, ``c`` real >= 0."""

    c: float
    s: complex

    def as_matrix(self):
        return np.array([[self.c, self.s], [-np.conj(self.s), self.c]],
                        dtype=np.complex128)


def make_givens(a, b):
    """Build a plane rotation annihilating the second component.

    Returns ``(rot, r)`` such that ``rot.as_matrix() @ [a, b] == [r, 0]``
    with ``|r| = hypot(|a|, |b|)``.  For ``b == 0`` the rotation is the
    exact identity, so already-zero entries are never perturbed.
    """
    a = complex(a)
    b = complex(b)
    if b == 0:
        return PlaneRotation(1.0, 0j), a
    if a == 0:
        s = np.conj(b) / abs(b)
        return PlaneRotation(0.0, s), complex(abs(b))
    h = np.hypot(abs(a), abs(b))
    c = abs(a) / h
    phase = a / abs(a)
    s = phase * np.conj(b) / h
    return PlaneRotation(float(c), complex(s)), complex(phase * h)


def householder_qr(M):
    """Householder QR of a square complex matrix.

    Returns ``(Q, R)`` with ``Q`` unitary and ``R`` upper triangular
    (diagonal phases are not normalized).  Plain column-by-column
    elimination; no pivoting and no blocking.
    """
    A = as_complex_matrix(M)
    n = A.shape[0]
    R = A.copy()
    Q = np.eye(n, dtype=np.complex128)
    for k in range(n - 1):
        x = R[k:, k]
        normx = np.linalg.norm(x)
        if normx == 0.0:
            continue
        alpha = x[0]
        phase = alpha / abs(alpha) if alpha != 0 else 1.0
        v = x.copy()
        v[0] += phase * normx
        vnorm2 = np.real(np.vdot(v, v))
        if vnorm2 == 0.0:
            continue
        w = 2.0 / vnorm2
        # R <- (I - w v v^H) R ; Q <- Q (I - w v v^H)
        R[k:, k:] -= w * np.outer(v, np.conj(v) @ R[k:, k:])
        Q[:, k:] -= w * np.outer(Q[:, k:] @ v, np.conj(v))
        R[k + 1:, k] = 0.0
    return Q, R


def solve_upper_triangular(R, B):
    """Back substitution for ``R X = B`` with ``R`` upper triangular."""
    n = R.shape[0]
    B = np.atleast_2d(np.asarray(B, dtype=np.complex128))
    squeeze = False
    if B.shape[0] != n:
        B = B.T
        squeeze = True
    X = np.zeros_like(B)
    for i in range(n - 1, -1, -1):
        X[i] = (B[i] - R[i, i + 1:] @ X[i + 1:]) / R[i, i]
    return X[:, 0] if squeeze and X.shape[1] == 1 else X


def qr_solve(A, B):
    """Solve ``A X = B`` by Householder QR (backward stable)."""
    Q, R = householder_qr(A)
    return solve_upper_triangular(R, np.conj(Q.T) @ np.atleast_2d(
        np.asarray(B, dtype=np.complex128)))


def is_numerically_singular(A, tolfac=64.0):
    """Rank test via QR: smallest |R_ii| against ``n * u * ||A||_F * tolfac``."""
    A = as_complex_matrix(A)
    n = A.shape[0]
    if n == 0:
        return False
    _, R = householder_qr(A)
    tol = n * EPS * np.linalg.norm(A) * tolfac
    return bool(np.min(np.abs(np.diag(R))) <= tol)


def two_norm_estimate(M):
    """Overestimate of the spectral norm, within a factor sqrt(n).

    Uses the Frobenius norm: ``||M||_2 <= ||M||_F <= sqrt(rank) ||M||_2``,
    so the returned value always lies in ``[||M||_2, sqrt(n) ||M||_2]``.
    """
    A = np.asarray(M, dtype=np.complex128)
    return float(np.linalg.norm(A))
