"""Gaussian states and channels as matrix triplets, with composition algebra.

A state is (cov, mean): second moments and displacement of the quadrature
vector. A channel is (transfer, shift, noise) = (K, m, alpha) acting as

    cov  -> K^T cov K + alpha
    mean -> K^T mean + m

Physicality: a state needs cov + (i/2) sigma >= 0; a channel needs
alpha - (i/2)(sigma - K^T sigma K) >= 0, both as Hermitian matrices.
Instances are immutable and validated on construction, so every operation
below returns objects that already passed their physicality check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .numerics import (
    POLICY,
    as_square_matrix,
    frob,
    hermitian_min_eig,
    mode_count,
    symmetrize,
)
from .symplectic import is_symplectic, symplectic_form


def _frozen_matrix(a, name: str) -> np.ndarray:
    m = as_square_matrix(a, name)
    m.setflags(write=False)
    return m


def _frozen_vector(a, dim: int, name: str) -> np.ndarray:
    v = np.array(a, dtype=float).reshape(-1)
    if v.shape != (dim,):
        raise ValidationError(f"{name} must have length {dim}, got {v.shape}")
    v.setflags(write=False)
    return v


def state_is_physical(cov: np.ndarray) -> tuple[bool, float]:
    """Uncertainty-relation test; returns (verdict, min Hermitian eigenvalue)."""
    cov = as_square_matrix(cov, "covariance matrix")
    n = mode_count(cov.shape[0], "covariance matrix")
    min_eig = hermitian_min_eig(symmetrize(cov), 0.5 * symplectic_form(n))
    return min_eig >= -POLICY.psd_floor, min_eig


def channel_physicality_margin(transfer: np.ndarray, noise: np.ndarray) -> float:
    """Min eigenvalue of noise - (i/2)(sigma - K^T sigma K)."""
    transfer = as_square_matrix(transfer, "transfer matrix")
    noise = as_square_matrix(noise, "noise matrix")
    if transfer.shape != noise.shape:
        raise ValidationError("transfer and noise matrices must share a shape")
    n = mode_count(transfer.shape[0], "transfer matrix")
    sig = symplectic_form(n)
    return hermitian_min_eig(symmetrize(noise), -0.5 * (sig - transfer.T @ sig @ transfer))


def channel_is_physical(transfer: np.ndarray, noise: np.ndarray) -> tuple[bool, float]:
    min_eig = channel_physicality_margin(transfer, noise)
    return min_eig >= -POLICY.psd_floor, min_eig


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Covariance matrix and displacement of an n-mode Gaussian state."""

    cov: np.ndarray
    mean: np.ndarray

    def __init__(self, cov, mean=None):
        cov = _frozen_matrix(cov, "covariance matrix")
        n = mode_count(cov.shape[0], "covariance matrix")
        if frob(cov - cov.T) > POLICY.algebraic_tol * max(frob(cov), 1.0):
            raise ValidationError("covariance matrix must be symmetric")
        ok, min_eig = state_is_physical(cov)
        if not ok:
            raise ValidationError(f"state violates the uncertainty relation (min eigenvalue {min_eig:.3e})")
        if mean is None:
            mean = np.zeros(2 * n)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", _frozen_vector(mean, 2 * n, "displacement"))

    @property
    def n(self) -> int:
        return self.cov.shape[0] // 2


def vacuum(n: int = 1) -> GaussianState:
    mode_count(2 * n)
    return GaussianState(0.5 * np.eye(2 * n))


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    """Trace-preserving Gaussian map as the triplet (transfer, shift, noise)."""

    transfer: np.ndarray
    shift: np.ndarray
    noise: np.ndarray

    def __init__(self, transfer, shift=None, noise=None):
        transfer = _frozen_matrix(transfer, "transfer matrix")
        n = mode_count(transfer.shape[0], "transfer matrix")
        if noise is None:
            noise = np.zeros((2 * n, 2 * n))
        noise = _frozen_matrix(noise, "noise matrix")
        if noise.shape != transfer.shape:
            raise ValidationError("noise matrix shape must match the transfer matrix")
        if frob(noise - noise.T) > POLICY.algebraic_tol * max(frob(noise), 1.0):
            raise ValidationError("noise matrix must be symmetric")
        ok, min_eig = channel_is_physical(transfer, noise)
        if not ok:
            raise ValidationError(f"channel violates the physicality condition (min eigenvalue {min_eig:.3e})")
        if shift is None:
            shift = np.zeros(2 * n)
        object.__setattr__(self, "transfer", transfer)
        object.__setattr__(self, "shift", _frozen_vector(shift, 2 * n, "shift"))
        object.__setattr__(self, "noise", noise)

    @property
    def n(self) -> int:
        return self.transfer.shape[0] // 2

    def physicality_margin(self) -> float:
        return channel_physicality_margin(self.transfer, self.noise)

    def is_unitary(self, tol: float | None = None) -> bool:
        tol = POLICY.algebraic_tol if tol is None else tol
        return frob(self.noise) <= tol * max(1.0, frob(self.transfer)) and is_symplectic(self.transfer, tol)


def identity_channel(n: int = 1) -> GaussianChannel:
    return GaussianChannel(np.eye(2 * n))


@dataclass(frozen=True)
class ChannelChain:
    """Nonempty ordered list of same-size channels, first-applied first."""

    links: tuple[GaussianChannel, ...] = field(default=())

    def __init__(self, links: Iterable[GaussianChannel]):
        links = tuple(links)
        if not links:
            raise ValidationError("a channel chain needs at least one link")
        n = links[0].n
        if any(link.n != n for link in links):
            raise ValidationError("all links in a chain must act on the same mode count")
        object.__setattr__(self, "links", links)

    @property
    def n(self) -> int:
        return self.links[0].n

    def __len__(self) -> int:
        return len(self.links)

    def __iter__(self):
        return iter(self.links)


def compose(first: GaussianChannel, second: GaussianChannel) -> GaussianChannel:
    """Channel running ``first`` and then ``second``.

    Triplet rule: (K1 K2, K2^T m1 + m2, K2^T alpha1 K2 + alpha2). The result
    is re-validated on construction, so composing physical channels asserts a
    physical outcome.
    """
    if first.n != second.n:
        raise ValidationError(f"mode mismatch in compose: {first.n} vs {second.n}")
    k = first.transfer @ second.transfer
    m = second.transfer.T @ first.shift + second.shift
    alpha = symmetrize(second.transfer.T @ first.noise @ second.transfer) + second.noise
    return GaussianChannel(k, m, alpha)


def compose_chain(chain: ChannelChain | Sequence[GaussianChannel]) -> GaussianChannel:
    if not isinstance(chain, ChannelChain):
        chain = ChannelChain(chain)
    total = chain.links[0]
    for link in chain.links[1:]:
        total = compose(total, link)
    return total


def apply_channel(channel: GaussianChannel, state: GaussianState) -> GaussianState:
    if channel.n != state.n:
        raise ValidationError(f"mode mismatch in apply: channel {channel.n}, state {state.n}")
    k = channel.transfer
    cov = symmetrize(k.T @ state.cov @ k) + channel.noise
    mean = k.T @ state.mean + channel.shift
    return GaussianState(cov, mean)


def apply_chain(chain: ChannelChain | Sequence[GaussianChannel], state: GaussianState) -> GaussianState:
    links = chain.links if isinstance(chain, ChannelChain) else tuple(chain)
    for link in links:
        state = apply_channel(link, state)
    return state


def extract_displacements(chain: ChannelChain | Sequence[GaussianChannel]) -> tuple[ChannelChain, np.ndarray]:
    """Push every shift vector into the last link.

    Returns a chain with the same transfer/noise matrices, zero shifts on all
    but the final link, and the accumulated total shift (also returned). The
    total is evaluated with the same fold as ``compose_chain``, so the two
    chains compose to bitwise-identical triplets.
    """
    if not isinstance(chain, ChannelChain):
        chain = ChannelChain(chain)
    total_shift = chain.links[0].shift.copy()
    for link in chain.links[1:]:
        total_shift = link.transfer.T @ total_shift + link.shift
    zeroed = [
        GaussianChannel(link.transfer, None, link.noise) for link in chain.links[:-1]
    ]
    last = chain.links[-1]
    zeroed.append(GaussianChannel(last.transfer, total_shift, last.noise))
    return ChannelChain(zeroed), total_shift
