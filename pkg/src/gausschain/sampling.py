"""Seeded random generators for states, channels, and symplectic matrices.

Used by the property-test sweeps and the self-check suite; all functions take
an explicit numpy Generator so sweeps are reproducible.
"""

from __future__ import annotations

import numpy as np

from .channels import GaussianChannel, GaussianState
from .errors import ValidationError
from .numerics import symmetrize
from .symplectic import symplectic_form


def random_orthogonal_symplectic(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish orthogonal symplectic matrix via a random n x n unitary."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    x, y = q.real, q.imag
    return np.block([[x, y], [-y, x]])


def random_symplectic(rng: np.random.Generator, n: int, max_squeeze: float = 4.0) -> np.ndarray:
    """Random symplectic matrix as passive * diag(squeeze) * passive."""
    lam = rng.uniform(1.0, max_squeeze, size=n)
    middle = np.diag(np.concatenate([lam, 1.0 / lam]))
    return random_orthogonal_symplectic(rng, n) @ middle @ random_orthogonal_symplectic(rng, n)


def random_state(rng: np.random.Generator, n: int, max_thermal: float = 3.0) -> GaussianState:
    """Random physical state: thermal diagonal conjugated by a random symplectic."""
    nus = rng.uniform(0.5, max_thermal, size=n)
    diag = np.diag(np.concatenate([nus, nus]))
    m = random_symplectic(rng, n, max_squeeze=2.0)
    cov = symmetrize(m.T @ diag @ m)
    mean = rng.uniform(-3.0, 3.0, size=2 * n)
    return GaussianState(cov, mean)


def random_channel(
    rng: np.random.Generator,
    n: int,
    with_shift: bool = False,
    max_tries: int = 50,
) -> GaussianChannel:
    """Random physical channel by rejection sampling.

    Transfer entries are uniform in [-2, 2]; the noise matrix is the Hermitian
    absolute value of (i/2)(sigma - K^T sigma K) (the minimal admissible noise)
    plus a random positive-semidefinite surplus.
    """
    sig = symplectic_form(n)
    for _ in range(max_tries):
        k = rng.uniform(-2.0, 2.0, size=(2 * n, 2 * n))
        herm = (0.5j * (sig - k.T @ sig @ k)).astype(complex)
        evals, vecs = np.linalg.eigh(herm)
        floor = symmetrize(((vecs * np.abs(evals)) @ vecs.conj().T).real)
        q = rng.uniform(-1.0, 1.0, size=(2 * n, 2 * n))
        surplus = rng.uniform(0.0, 1.0) * (q.T @ q)
        shift = rng.uniform(-2.0, 2.0, size=2 * n) if with_shift else None
        try:
            return GaussianChannel(k, shift, floor + surplus)
        except ValidationError:
            continue
    raise ValidationError("random channel sampling failed to produce a physical channel")
