"""Numeric policy and small matrix helpers used everywhere else.

All tolerances are relative Frobenius-norm tolerances unless a name says
otherwise. They live in a single mutable policy object so a caller (or the
CLI's --tol flag) can tighten or loosen every check in one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

#: Hard cap on the mode count accepted by constructors. The constructions in
#: this package are low-mode; the cap bounds test cost and catches shape bugs.
MAX_MODES = 8


@dataclass
class NumericPolicy:
    """Global tolerances.

    algebraic_tol: relative tolerance for algebraic matrix identities.
    eigen_tol:     relative tolerance for results of eigen/Schur decompositions.
    psd_floor:     absolute floor on the minimum eigenvalue of Hermitian
                   positive-semidefiniteness checks.
    boundary_tol:  absolute width of the tie band around closed-form
                   inequality boundaries.
    """

    algebraic_tol: float = 1e-10
    eigen_tol: float = 1e-9
    psd_floor: float = 1e-10
    boundary_tol: float = 1e-12


POLICY = NumericPolicy()


def set_tolerance_scale(scale: float) -> None:
    """Rescale every tolerance in the global policy by ``scale`` (> 0)."""
    if not np.isfinite(scale) or scale <= 0:
        raise ValidationError(f"tolerance scale must be positive and finite, got {scale}")
    POLICY.algebraic_tol = 1e-10 * scale
    POLICY.eigen_tol = 1e-9 * scale
    POLICY.psd_floor = 1e-10 * scale
    POLICY.boundary_tol = 1e-12 * scale


def frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, "fro"))


def rel_frob_err(actual: np.ndarray, expected: np.ndarray) -> float:
    """Frobenius distance scaled by the Frobenius norm of ``expected`` (or 1 if zero)."""
    scale = frob(np.asarray(expected, dtype=float))
    if scale == 0.0:
        scale = 1.0
    return frob(np.asarray(actual, dtype=float) - np.asarray(expected, dtype=float)) / scale


def as_square_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    return m


def mode_count(dim: int, name: str = "matrix") -> int:
    """Mode count for a 2n-dimensional quadrature space; validates the cap."""
    if dim % 2 != 0 or dim == 0:
        raise ValidationError(f"{name} dimension must be a positive even number, got {dim}")
    n = dim // 2
    if n > MAX_MODES:
        raise ValidationError(f"mode count {n} exceeds the supported maximum {MAX_MODES}")
    return n


def hermitian_min_eig(sym: np.ndarray, antisym: np.ndarray) -> float:
    """Minimum eigenvalue of the Hermitian matrix ``sym + 1j * antisym``.

    ``sym`` must be real symmetric and ``antisym`` real antisymmetric; the sum
    is then exactly Hermitian and eigvalsh applies.
    """
    herm = sym.astype(complex) + 1j * antisym
    return float(np.linalg.eigvalsh(herm)[0])


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def antisymmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a - a.T)


def sym_sqrt_and_inv(a: np.ndarray, name: str = "matrix") -> tuple[np.ndarray, np.ndarray]:
    """Square root and inverse square root of a symmetric positive-definite matrix."""
    a = as_square_matrix(a, name)
    if frob(a - a.T) > POLICY.algebraic_tol * max(frob(a), 1.0):
        raise ValidationError(f"{name} is not symmetric")
    evals, vecs = np.linalg.eigh(symmetrize(a))
    if evals[0] <= 0.0:
        raise ValidationError(f"{name} is not positive definite (min eigenvalue {evals[0]:.3e})")
    root = (vecs * np.sqrt(evals)) @ vecs.T
    inv_root = (vecs / np.sqrt(evals)) @ vecs.T
    return symmetrize(root), symmetrize(inv_root)
