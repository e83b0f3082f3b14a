"""Symplectic matrix primitives in the (x1..xn, p1..pn) quadrature ordering.

The antisymmetric form is sigma = [[0, I], [-I, 0]]; a matrix M is symplectic
when M^T sigma M = sigma. Everything here is a pure function over plain numpy
arrays, safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .errors import NumericalCheckError, ValidationError
from .numerics import (
    POLICY,
    antisymmetrize,
    as_square_matrix,
    frob,
    mode_count,
    rel_frob_err,
    sym_sqrt_and_inv,
    symmetrize,
)


def symplectic_form(n: int) -> np.ndarray:
    """The 2n x 2n form [[0, I_n], [-I_n, 0]]."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"mode count must be a positive integer, got {n!r}")
    mode_count(2 * n)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def symplecticity_defect(m: np.ndarray) -> float:
    """Relative Frobenius error of M^T sigma M - sigma."""
    m = as_square_matrix(m, "symplectic candidate")
    n = mode_count(m.shape[0])
    sig = symplectic_form(n)
    return frob(m.T @ sig @ m - sig) / frob(sig)


def is_symplectic(m: np.ndarray, tol: float | None = None) -> bool:
    return symplecticity_defect(m) <= (POLICY.algebraic_tol if tol is None else tol)


def assert_symplectic(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    m = as_square_matrix(m, what)
    defect = symplecticity_defect(m)
    if defect > POLICY.algebraic_tol:
        raise ValidationError(f"{what} is not symplectic (defect {defect:.3e})")
    return m


def symplectic_inverse(m: np.ndarray) -> np.ndarray:
    """Inverse via sigma^-1 M^T sigma; exact for symplectic M and cheap."""
    m = as_square_matrix(m)
    sig = symplectic_form(mode_count(m.shape[0]))
    return -sig @ m.T @ sig


def rotation(theta: float) -> np.ndarray:
    """Single-mode phase rotation [[cos, sin], [-sin, cos]]."""
    if not np.isfinite(theta):
        raise ValidationError(f"rotation angle must be finite, got {theta}")
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeezer(gain: float) -> np.ndarray:
    """Single-mode phase-quadrature squeezer diag(sqrt(G)+sqrt(G-1), sqrt(G)-sqrt(G-1)).

    Gains below unity are rejected; an attenuating squeezer is the same object
    rotated by pi/2, available through :func:`squeezer_angled`.
    """
    if not np.isfinite(gain) or gain < 1.0:
        raise ValidationError(f"squeezer gain must be >= 1, got {gain}")
    up = math.sqrt(gain) + math.sqrt(gain - 1.0)
    return np.array([[up, 0.0], [0.0, 1.0 / up]])


def squeezer_angled(gain: float, angle: float) -> np.ndarray:
    """Squeezer with its gain quadrature rotated: R(angle) S(gain) R(angle)^T."""
    r = rotation(angle)
    return r @ squeezer(gain) @ r.T


def two_mode_squeezer(r: float) -> np.ndarray:
    """Two-mode squeezing transform with parameter r, in xxpp ordering."""
    if not np.isfinite(r):
        raise ValidationError(f"two-mode squeezing parameter must be finite, got {r}")
    ch, sh = math.cosh(r), math.sinh(r)
    x_block = np.array([[ch, sh], [sh, ch]])
    p_block = np.array([[ch, -sh], [-sh, ch]])
    out = np.zeros((4, 4))
    out[:2, :2] = x_block
    out[2:, 2:] = p_block
    return out


@dataclass(frozen=True)
class EulerFactors:
    """Factorization M = passive_left @ diag(squeeze, 1/squeeze) @ passive_right.

    Both passive factors are orthogonal symplectic (beamsplitter/phase-shifter
    circuits); ``squeeze`` holds the n per-mode squeezing values, all >= 1,
    sorted descending.
    """

    passive_left: np.ndarray
    squeeze: np.ndarray
    passive_right: np.ndarray

    @property
    def middle(self) -> np.ndarray:
        return np.diag(np.concatenate([self.squeeze, 1.0 / self.squeeze]))

    def reconstruct(self) -> np.ndarray:
        return self.passive_left @ self.middle @ self.passive_right


def _canonical_column_signs(v: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry of each column is positive."""
    out = v.copy()
    for j in range(out.shape[1]):
        k = int(np.argmax(np.abs(out[:, j])))
        if out[k, j] < 0:
            out[:, j] = -out[:, j]
    return out


def _pair_basis(psd_symplectic: np.ndarray, sig: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal symplectic diagonalizer of a symmetric positive-definite symplectic P.

    Returns (B, lam) with B^T P B = diag(lam, 1/lam), lam >= 1 descending. Uses
    the pairing v -> -sigma v between the lam and 1/lam eigenspaces; inside a
    degenerate cluster straddling 1 the partner of a chosen vector lives in the
    same cluster, so candidates are Gram-Schmidt-ed against both members of
    every chosen pair.
    """
    dim = psd_symplectic.shape[0]
    n = dim // 2
    evals, evecs = np.linalg.eigh(symmetrize(psd_symplectic))
    order = np.argsort(-evals, kind="stable")
    chosen: list[np.ndarray] = []
    partners: list[np.ndarray] = []
    lams: list[float] = []
    for idx in order:
        if len(chosen) == n:
            break
        u = evecs[:, idx].copy()
        for v, w in zip(chosen, partners):
            u -= (v @ u) * v
            u -= (w @ u) * w
        norm = np.linalg.norm(u)
        if norm < 0.25:
            continue  # numerically the sigma-partner of an already chosen vector
        u /= norm
        chosen.append(u)
        partners.append(-sig @ u)
        lams.append(float(evals[idx]))
    if len(chosen) != n:
        raise NumericalCheckError("failed to assemble a paired eigenbasis; eigenvalue pairing collapsed")
    v_half = _canonical_column_signs(np.column_stack(chosen))
    w_half = -sig @ v_half
    return np.hstack([v_half, w_half]), np.array(lams)


def euler_decompose(m: np.ndarray) -> EulerFactors:
    """Passive/squeeze/passive factorization of a symplectic matrix.

    Route: polar-decompose M = P O with P = (M M^T)^{1/2} (symmetric
    positive-definite symplectic) and O orthogonal symplectic; diagonalize P
    with a paired orthogonal symplectic basis.
    """
    m = assert_symplectic(m, "input of euler_decompose")
    n = mode_count(m.shape[0])
    sig = symplectic_form(n)
    gram_root, gram_inv_root = sym_sqrt_and_inv(m @ m.T, "M M^T")
    ortho = gram_inv_root @ m
    left, lam = _pair_basis(gram_root, sig)
    right = left.T @ ortho
    factors = EulerFactors(passive_left=left, squeeze=lam, passive_right=right)
    err = rel_frob_err(factors.reconstruct(), m)
    if err > 100 * POLICY.algebraic_tol:
        raise NumericalCheckError(f"euler factor reconstruction error {err:.3e}")
    return factors


@dataclass(frozen=True)
class WilliamsonForm:
    """Symplectic congruence to thermal diagonal form.

    ``transform`` is symplectic with transform^T gamma transform equal to
    diag(eigenvalues, eigenvalues); ``eigenvalues`` are the n symplectic
    eigenvalues sorted descending.
    """

    transform: np.ndarray
    eigenvalues: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(np.concatenate([self.eigenvalues, self.eigenvalues]))


def symplectic_eigenvalues(gamma: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a symmetric positive-definite matrix, descending.

    Computed as the positive eigenvalues of the Hermitian matrix
    i * gamma^{1/2} sigma gamma^{1/2}, whose spectrum is +-nu_j; this equals
    the moduli of the eigenvalues of i sigma gamma but keeps the eigenproblem
    Hermitian and therefore perfectly conditioned.
    """
    gamma = as_square_matrix(gamma, "covariance matrix")
    n = mode_count(gamma.shape[0], "covariance matrix")
    sig = symplectic_form(n)
    root, _ = sym_sqrt_and_inv(gamma, "covariance matrix")
    core = antisymmetrize(root @ sig @ root)
    spectrum = np.linalg.eigvalsh(1j * core.astype(complex))
    nus = np.sort(spectrum[spectrum > 0])[::-1]
    if nus.size != n:
        raise NumericalCheckError(f"expected {n} positive symplectic eigenvalues, found {nus.size}")
    return nus


def _antisymmetric_canonical(core: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal O and positive b with O^T core O = [[0, diag(b)], [-diag(b), 0]].

    ``core`` must be real antisymmetric and nonsingular. The real Schur form
    supplies 2x2 blocks in interleaved order; signs are fixed, blocks sorted by
    descending b, and columns permuted into xxpp ordering.
    """
    dim = core.shape[0]
    n = dim // 2
    t, z = schur(antisymmetrize(core), output="real")
    blocks = []
    for i in range(n):
        b = float(t[2 * i, 2 * i + 1])
        x_col = z[:, 2 * i].copy()
        p_col = z[:, 2 * i + 1].copy()
        if b < 0:
            x_col, p_col = p_col, x_col
            b = -b
        k = int(np.argmax(np.abs(x_col)))
        if x_col[k] < 0:
            x_col, p_col = -x_col, -p_col
        blocks.append((b, x_col, p_col))
    blocks.sort(key=lambda item: -item[0])
    ortho = np.column_stack([blk[1] for blk in blocks] + [blk[2] for blk in blocks])
    return ortho, np.array([blk[0] for blk in blocks])


def williamson(gamma: np.ndarray) -> WilliamsonForm:
    """Williamson normal form of a symmetric positive-definite matrix.

    Square-root construction: bring gamma^{1/2} sigma gamma^{1/2} to its real
    antisymmetric canonical form with an orthogonal transform and assemble the
    symplectic congruence from it. The block values are cross-checked against
    the independent Hermitian-eigenvalue route.
    """
    gamma = as_square_matrix(gamma, "covariance matrix")
    n = mode_count(gamma.shape[0], "covariance matrix")
    if frob(gamma - gamma.T) > POLICY.algebraic_tol * max(frob(gamma), 1.0):
        raise ValidationError("covariance matrix must be symmetric")
    sig = symplectic_form(n)
    root, inv_root = sym_sqrt_and_inv(gamma, "covariance matrix")
    ortho, nus = _antisymmetric_canonical(root @ sig @ root)
    cross = symplectic_eigenvalues(gamma)
    if np.max(np.abs(nus - cross)) > POLICY.eigen_tol * max(1.0, float(cross[0])):
        raise NumericalCheckError("symplectic eigenvalue cross-check failed")
    scale = np.sqrt(np.concatenate([nus, nus]))
    transform = inv_root @ ortho @ np.diag(scale)
    defect = symplecticity_defect(transform)
    if defect > 100 * POLICY.algebraic_tol:
        raise NumericalCheckError(f"assembled Williamson transform is not symplectic (defect {defect:.3e})")
    return WilliamsonForm(transform=transform, eigenvalues=nus)
