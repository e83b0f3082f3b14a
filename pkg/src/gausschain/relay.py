"""Rewriting loss/station/loss sandwiches as station/loss/unitary.

The construction: for a station (K, 0, alpha) between losses eta1, eta2, the
total channel is (sqrt(eta1 eta2) K, 0, alpha_t). The matrix
gamma = (K^T K + 2 alpha)/2 is a valid covariance matrix; its convex mix with
the vacuum, gamma' = p gamma + (1-p)(1/2)I with p = eta2(1-eta1)/(1-eta1 eta2),
satisfies alpha_t = eta1 eta2 alpha + (1 - eta1 eta2) gamma' identically.
Williamson-diagonalizing gamma' yields a symplectic M from which a physical
front channel and a unitary back channel are assembled so that

    front -> pure_loss(eta1*eta2) -> back   ==   loss(eta1) -> station -> loss(eta2).

Iterating from the receiver end collapses an arbitrary alternating chain into
(front, single total loss, unitary back). A chain whose stations are all
phase-quadrature squeezers additionally has closed forms for the collapsed
triplet, implemented at the bottom of this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import ChannelChain, GaussianChannel, compose, compose_chain, identity_channel
from .errors import ValidationError
from .numerics import POLICY, frob, rel_frob_err, symmetrize
from .stations import phase_sensitive_amp, pure_loss
from .symplectic import squeezer, symplectic_inverse, williamson


@dataclass(frozen=True)
class SandwichInput:
    """A station between two loss segments; the station must carry no shift."""

    eta1: float
    eta2: float
    station: GaussianChannel

    def __post_init__(self):
        for name, eta in (("eta1", self.eta1), ("eta2", self.eta2)):
            if not 0.0 < eta <= 1.0:
                raise ValidationError(f"{name} must lie in (0, 1], got {eta}")
        if frob(np.asarray(self.station.shift).reshape(1, -1)) != 0.0:
            raise ValidationError("sandwich stations must have zero shift; extract displacements first")

    @property
    def n(self) -> int:
        return self.station.n


def sandwich_total(inp: SandwichInput) -> GaussianChannel:
    """Closed-form total channel of loss(eta1) -> station -> loss(eta2)."""
    k = inp.station.transfer
    alpha = inp.station.noise
    dim = 2 * inp.n
    k_t = math.sqrt(inp.eta1 * inp.eta2) * k
    alpha_t = inp.eta2 * (((1.0 - inp.eta1) / 2.0) * (k.T @ k) + alpha) + ((1.0 - inp.eta2) / 2.0) * np.eye(dim)
    return GaussianChannel(k_t, None, symmetrize(alpha_t))


@dataclass(frozen=True)
class SandwichDecomposition:
    """Front/loss/back factorization plus the witnesses that certify it.

    ``state_cov`` is the covariance matrix built from the station, ``mixed_cov``
    its convex mix with vacuum (mixing weight ``mix_prob``), and ``transform``
    the symplectic matrix diagonalizing ``mixed_cov``. ``recomposition_error``
    is the relative Frobenius error between front->loss->back and the direct
    total, maximized over the transfer and noise parts.
    """

    front: GaussianChannel
    loss: GaussianChannel
    back: GaussianChannel
    loss_eta: float
    state_cov: np.ndarray
    mixed_cov: np.ndarray
    mix_prob: float
    transform: np.ndarray
    total: GaussianChannel
    recomposition_error: float

    def recomposed(self) -> GaussianChannel:
        return compose_chain([self.front, self.loss, self.back])


def _recomposition_error(recomposed: GaussianChannel, total: GaussianChannel) -> float:
    return max(
        rel_frob_err(recomposed.transfer, total.transfer),
        rel_frob_err(recomposed.noise, total.noise),
    )


def decompose_sandwich(inp: SandwichInput) -> SandwichDecomposition:
    """Factor loss/station/loss into (physical front, total loss, unitary back)."""
    n = inp.n
    dim = 2 * n
    eye = np.eye(dim)
    k = inp.station.transfer
    alpha = inp.station.noise
    eta = inp.eta1 * inp.eta2
    total = sandwich_total(inp)

    gamma = symmetrize(0.5 * (k.T @ k + 2.0 * alpha))
    if eta == 1.0:
        # Both transmittances unity: the mixing weight is 0/0; the sandwich is
        # the station itself and the factorization is the trivial one.
        return SandwichDecomposition(
            front=inp.station,
            loss=identity_channel(n),
            back=identity_channel(n),
            loss_eta=1.0,
            state_cov=gamma,
            mixed_cov=0.5 * eye,
            mix_prob=0.0,
            transform=eye,
            total=total,
            recomposition_error=_recomposition_error(inp.station, total),
        )

    p = inp.eta2 * (1.0 - inp.eta1) / (1.0 - eta)
    mixed = symmetrize(p * gamma + (1.0 - p) * 0.5 * eye)
    normal_form = williamson(mixed)
    m = normal_form.transform

    front_k = k @ m
    front_alpha = symmetrize((m.T @ total.noise @ m - ((1.0 - eta) / 2.0) * eye) / eta)
    front = GaussianChannel(front_k, None, front_alpha)
    back = GaussianChannel(symplectic_inverse(m))
    loss = pure_loss(eta, n)

    recomposed = compose_chain([front, loss, back])
    return SandwichDecomposition(
        front=front,
        loss=loss,
        back=back,
        loss_eta=eta,
        state_cov=gamma,
        mixed_cov=mixed,
        mix_prob=p,
        transform=m,
        total=total,
        recomposition_error=_recomposition_error(recomposed, total),
    )


@dataclass(frozen=True)
class CollapsedChain:
    """Alternating chain rewritten as front -> pure_loss(loss_eta) -> back."""

    front: GaussianChannel
    loss: GaussianChannel
    back: GaussianChannel
    loss_eta: float
    total: GaussianChannel
    recomposition_error: float

    def recomposed(self) -> GaussianChannel:
        return compose_chain([self.front, self.loss, self.back])


def split_alternating(segments: Sequence) -> tuple[list[float], list[GaussianChannel]]:
    """Validate a loss/station/.../loss alternation given as floats and channels."""
    if len(segments) < 3 or len(segments) % 2 == 0:
        raise ValidationError("chain must alternate loss/station/.../loss with at least one station")
    etas: list[float] = []
    stations: list[GaussianChannel] = []
    for i, seg in enumerate(segments):
        if i % 2 == 0:
            if isinstance(seg, GaussianChannel):
                raise ValidationError(f"segment {i + 1} must be a loss transmittance, got a channel")
            eta = float(seg)
            if not 0.0 < eta <= 1.0:
                raise ValidationError(f"segment {i + 1}: transmittance must lie in (0, 1], got {eta}")
            etas.append(eta)
        else:
            if not isinstance(seg, GaussianChannel):
                raise ValidationError(f"segment {i + 1} must be a station channel, got {type(seg).__name__}")
            stations.append(seg)
    n = stations[0].n
    if any(st.n != n for st in stations):
        raise ValidationError("all stations in a chain must share a mode count")
    return etas, stations


def chain_channels(segments: Sequence) -> ChannelChain:
    """The alternating chain as an explicit list of channels, first-applied first."""
    etas, stations = split_alternating(segments)
    n = stations[0].n
    links: list[GaussianChannel] = []
    for eta, station in zip(etas[:-1], stations):
        links.append(pure_loss(eta, n))
        links.append(station)
    links.append(pure_loss(etas[-1], n))
    return ChannelChain(links)


def collapse_chain(segments: Sequence) -> CollapsedChain:
    """Collapse an alternating loss/station chain into front -> total loss -> back.

    Works from the receiver end: each inner sandwich is decomposed, its front
    factor absorbed into the next station upstream by composition, and its
    unitary back factor accumulated at the output.
    """
    etas, stations = split_alternating(segments)
    n = stations[0].n
    total = compose_chain(chain_channels(segments))

    station = stations[-1]
    eta2 = etas[-1]
    backs: list[GaussianChannel] = []
    front = None
    for i in range(len(stations) - 1, -1, -1):
        decomp = decompose_sandwich(SandwichInput(etas[i], eta2, station))
        backs.insert(0, decomp.back)
        eta2 = etas[i] * eta2
        if i > 0:
            station = compose(stations[i - 1], decomp.front)
        else:
            front = decomp.front
    back = compose_chain(backs)
    loss_eta = math.prod(etas)
    collapsed_loss = pure_loss(loss_eta, n)
    recomposed = compose_chain([front, collapsed_loss, back])
    return CollapsedChain(
        front=front,
        loss=collapsed_loss,
        back=back,
        loss_eta=loss_eta,
        total=total,
        recomposition_error=_recomposition_error(recomposed, total),
    )


@dataclass(frozen=True)
class PsaChainSpec:
    """k phase-quadrature squeezers between k+1 loss segments."""

    transmittances: tuple[float, ...]
    gains: tuple[float, ...]

    def __init__(self, transmittances: Sequence[float], gains: Sequence[float]):
        transmittances = tuple(float(x) for x in transmittances)
        gains = tuple(float(x) for x in gains)
        if len(gains) < 1:
            raise ValidationError("a squeezer chain needs at least one amplifier")
        if len(transmittances) != len(gains) + 1:
            raise ValidationError(
                f"need one more loss segment than amplifiers, got {len(transmittances)} and {len(gains)}"
            )
        for eta in transmittances:
            if not 0.0 < eta <= 1.0:
                raise ValidationError(f"transmittance must lie in (0, 1], got {eta}")
        for g in gains:
            if g < 1.0:
                raise ValidationError(f"squeezer gain must be >= 1, got {g}")
        object.__setattr__(self, "transmittances", transmittances)
        object.__setattr__(self, "gains", gains)

    @property
    def k(self) -> int:
        return len(self.gains)


@dataclass(frozen=True)
class PsaChainParams:
    """Closed-form collapsed triplet of a squeezer chain.

    transfer = sqrt(eta_total) * squeeze_product and noise = diag(alpha_plus,
    alpha_minus); ``squeeze_product`` is the ordered product of the individual
    squeezers (all diagonal, so the order is immaterial).
    """

    transfer: np.ndarray
    noise: np.ndarray
    alpha_plus: float
    alpha_minus: float
    squeeze_product: np.ndarray
    eta_total: float


def psa_chain_params(spec: PsaChainSpec) -> PsaChainParams:
    """Closed-form total channel of a squeezer chain (no composition fold)."""
    etas = spec.transmittances
    gains = spec.gains
    k = spec.k
    eta_total = math.prod(etas)

    def branch(sign: float) -> float:
        acc = 0.0
        for idx in range(k):  # idx plays the paper-free role of distance from the last amplifier
            stage = k - idx  # amplifier index, 1-based from the transmitter
            weight = (1.0 - etas[stage - 1]) / etas[stage - 1]
            prod = 1.0
            for j in range(idx + 1):
                amp = k - j
                s = math.sqrt(gains[amp - 1]) + sign * math.sqrt(gains[amp - 1] - 1.0)
                prod *= etas[amp - 1] * s * s
            acc += weight * prod
        return 0.5 * ((1.0 - etas[k]) + etas[k] * acc)

    alpha_plus = branch(+1.0)
    alpha_minus = branch(-1.0)
    squeeze_product = np.eye(2)
    for g in gains:
        squeeze_product = squeeze_product @ squeezer(g)
    transfer = math.sqrt(eta_total) * squeeze_product
    noise = np.diag([alpha_plus, alpha_minus])
    return PsaChainParams(
        transfer=transfer,
        noise=noise,
        alpha_plus=alpha_plus,
        alpha_minus=alpha_minus,
        squeeze_product=squeeze_product,
        eta_total=eta_total,
    )


def psa_chain_fold(spec: PsaChainSpec) -> GaussianChannel:
    """The same chain evaluated by explicit composition, as an independent cross-check."""
    segments: list = []
    for eta, g in zip(spec.transmittances, spec.gains):
        segments.append(eta)
        segments.append(phase_sensitive_amp(g))
    segments.append(spec.transmittances[-1])
    return compose_chain(chain_channels(segments))


@dataclass(frozen=True)
class PsaChainSandwich:
    """Squeezer chain rewritten as front -> pure_loss(eta_total) -> unitary back.

    The front is (S0 W, 0, (N/eta) I): the chain's squeeze product followed by
    the noise symmetrizer W and isotropic classical noise; the back is the
    unitary undoing W. ``excess_noise`` is N = sqrt(alpha_plus alpha_minus)
    - (1 - eta)/2, nonnegative for every physical chain.
    """

    front: GaussianChannel
    loss: GaussianChannel
    back: GaussianChannel
    symmetrizer: np.ndarray
    excess_noise: float
    params: PsaChainParams
    recomposition_error: float

    def recomposed(self) -> GaussianChannel:
        return compose_chain([self.front, self.loss, self.back])


def psa_chain_sandwich(spec: PsaChainSpec) -> PsaChainSandwich:
    params = psa_chain_params(spec)
    eta = params.eta_total
    ap, am = params.alpha_plus, params.alpha_minus
    symmetrizer = (ap * am) ** (-0.25) * np.diag([math.sqrt(am), math.sqrt(ap)])
    excess = math.sqrt(ap * am) - (1.0 - eta) / 2.0
    if excess < -POLICY.psd_floor:
        raise ValidationError(f"chain excess noise came out negative ({excess:.3e}); chain is unphysical")
    excess = max(excess, 0.0)

    front = GaussianChannel(
        params.squeeze_product @ symmetrizer,
        None,
        (excess / eta) * np.eye(2),
    )
    back = GaussianChannel(np.diag(1.0 / np.diag(symmetrizer)))
    loss = pure_loss(eta)
    direct = GaussianChannel(params.transfer, None, params.noise)
    recomposed = compose_chain([front, loss, back])
    return PsaChainSandwich(
        front=front,
        loss=loss,
        back=back,
        symmetrizer=symmetrizer,
        excess_noise=excess,
        params=params,
        recomposition_error=_recomposition_error(recomposed, direct),
    )
