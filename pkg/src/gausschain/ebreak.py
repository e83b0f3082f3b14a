"""Entanglement-breaking detection and the rate-loss upper bound.

Two independent routes decide whether a single-mode channel breaks
entanglement:

* closed form: reduce the channel to its phase-insensitive standard form
  (gain eta_s = det K, excess noise N_s = sqrt(det alpha) - |1 - eta_s|/2) and
  test N_s >= min(1, eta_s), written uniformly as
  sqrt(det alpha) >= (1 + det K)/2;
* oracle: probe the channel with two-mode squeezed vacuum at a schedule of
  squeezing strengths, partially transpose the output, and look for a
  symplectic eigenvalue below 1/2. One such hit proves the channel is not
  entanglement breaking; survival of the whole schedule is (strong, but
  schedule-limited) evidence that it is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import GaussianChannel
from .errors import UnsupportedChannelError, ValidationError
from .numerics import POLICY, symmetrize
from .relay import SandwichInput, sandwich_total
from .symplectic import rotation, squeezer, symplectic_eigenvalues, two_mode_squeezer

#: Default squeezing schedule for the Choi-state probe, chosen so that
#: cosh(2r) sweeps {10, 1e2, 1e3, 1e4}.
DEFAULT_R_SCHEDULE: tuple[float, ...] = tuple(
    0.5 * math.acosh(c) for c in (10.0, 1e2, 1e3, 1e4)
)


@dataclass(frozen=True)
class EbVerdict:
    """Outcome of an entanglement-breaking test.

    ``margin`` is a signed distance to the breaking boundary (closed form:
    sqrt(det alpha) - (1 + det K)/2; oracle: min symplectic eigenvalue of the
    partially transposed probe output minus 1/2); the verdict is breaking when
    the margin clears -tolerance. ``boundary`` marks ties within the boundary
    band; ``schedule_limited`` marks oracle verdicts that rest on a finite
    squeezing schedule rather than a proof.
    """

    eb: bool
    margin: float
    method: str
    boundary: bool = False
    schedule_limited: bool = False


def pic_is_eb(kappa: float, noise: float) -> EbVerdict:
    """Breaking test for the phase-insensitive channel: noise >= min(1, kappa)."""
    if kappa < 0.0 or noise < 0.0:
        raise ValidationError("phase-insensitive parameters must be nonnegative")
    margin = noise - min(1.0, kappa)
    return EbVerdict(
        eb=margin >= -POLICY.boundary_tol,
        margin=margin,
        method="closed-form",
        boundary=abs(margin) <= POLICY.boundary_tol,
    )


@dataclass(frozen=True)
class StandardForm:
    """Unitary-equivalent phase-insensitive parameters of a single-mode channel.

    input_unitary V and output_unitary W are symplectic with
    V K W = sqrt(gain) I and W^T alpha W isotropic. ``branch`` classifies the
    channel as "pic" or "anc" (identity transfer with rank-deficient noise);
    ``regularized`` flags the singular-noise limit where W needed an
    eigenvalue floor.
    """

    gain: float
    excess_noise: float
    input_unitary: np.ndarray
    output_unitary: np.ndarray
    branch: str
    regularized: bool = False


def reduce_standard_form(channel: GaussianChannel, noise_floor: float = 1e-14) -> StandardForm:
    """Reduce a single-mode channel (det K > 0, zero shift) to standard form."""
    if channel.n != 1:
        raise ValidationError("standard-form reduction is defined for single-mode channels")
    if float(np.max(np.abs(channel.shift))) != 0.0:
        raise ValidationError("standard-form reduction expects zero shift; extract displacements first")
    k = channel.transfer
    alpha = channel.noise
    det_k = float(np.linalg.det(k))
    if det_k <= 0.0:
        raise UnsupportedChannelError(
            f"standard form covers channels with det K > 0 only, got det K = {det_k:.3e}"
        )
    lam, w0 = np.linalg.eigh(symmetrize(alpha))
    if np.linalg.det(w0) < 0:
        w0 = w0[:, ::-1].copy()
        lam = lam[::-1].copy()
    lam = np.maximum(lam, 0.0)
    det_alpha = float(lam[0] * lam[1])
    regularized = bool(np.min(lam) <= noise_floor)
    lam_reg = np.maximum(lam, noise_floor)

    gain = det_k
    excess = math.sqrt(det_alpha) - abs(1.0 - gain) / 2.0
    if regularized:
        # Singular noise: channel physicality forces det K = 1 here, so the
        # limiting excess noise is zero (clamped against roundoff).
        excess = max(excess, 0.0)

    w = (lam_reg[0] * lam_reg[1]) ** (-0.25) * (w0 @ np.diag(np.sqrt(lam_reg[::-1])))
    v = math.sqrt(gain) * np.linalg.inv(k @ w)

    min_eig = float(np.min(lam))
    is_anc = abs(det_k - 1.0) <= 1e-9 and min_eig <= max(noise_floor, 1e-9 * float(np.max(lam)))
    return StandardForm(
        gain=gain,
        excess_noise=excess,
        input_unitary=v,
        output_unitary=w,
        branch="anc" if is_anc else "pic",
        regularized=regularized,
    )


def channel_eb_margin(channel: GaussianChannel) -> float:
    """Signed closed-form breaking margin sqrt(det alpha) - (1 + det K)/2."""
    if channel.n != 1:
        raise ValidationError("the closed-form breaking test is single-mode")
    det_k = float(np.linalg.det(channel.transfer))
    if det_k <= 0.0:
        raise UnsupportedChannelError(
            f"closed-form breaking test covers channels with det K > 0, got det K = {det_k:.3e}"
        )
    det_alpha = max(float(np.linalg.det(channel.noise)), 0.0)
    return math.sqrt(det_alpha) - (1.0 + det_k) / 2.0


def channel_is_eb(channel: GaussianChannel) -> EbVerdict:
    margin = channel_eb_margin(channel)
    return EbVerdict(
        eb=margin >= -POLICY.boundary_tol,
        margin=margin,
        method="closed-form",
        boundary=abs(margin) <= POLICY.boundary_tol,
    )


def sandwich_is_eb(inp: SandwichInput) -> EbVerdict:
    """Closed-form breaking test for loss(eta1) -> station -> loss(eta2)."""
    if inp.n != 1:
        raise ValidationError("the sandwich breaking test is single-mode")
    return channel_is_eb(sandwich_total(inp))


def pic_sandwich_assembly(
    g: float,
    noise: float,
    gain1: float,
    gain2: float,
    theta: float,
    eta1: float,
    eta2: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Transfer/noise matrices of loss -> squeezer(G1) -> PIC(g, N) -> squeezer(G2, theta) -> loss.

    This is the generic single-mode station written in its squeezer/PIC normal
    coordinates; the direct determinant of the returned noise matrix is the
    cross-check for the closed form below.
    """
    s1 = squeezer(gain1)
    r = rotation(theta)
    k_theta = r @ squeezer(gain2) @ r.T
    eye = np.eye(2)
    transfer = math.sqrt(g * eta1 * eta2) * s1 @ k_theta
    noise_mat = 0.5 * (
        eta2 * (1.0 - eta1) * g * (k_theta.T @ (s1 @ s1) @ k_theta)
        + eta2 * (abs(g - 1.0) + 2.0 * noise) * (k_theta.T @ k_theta)
        + (1.0 - eta2) * eye
    )
    return transfer, symmetrize(noise_mat)


def det_alpha_closed_form(
    g: float, gain1: float, gain2: float, theta: float, eta1: float, eta2: float
) -> float:
    """Closed-form det(noise) of the quantum-limited assembly (zero excess noise, g >= 1)."""
    if g < 1.0:
        raise ValidationError(f"the closed form needs gain g >= 1, got {g}")
    for name, val in (("gain1", gain1), ("gain2", gain2)):
        if val < 1.0:
            raise ValidationError(f"{name} must be >= 1, got {val}")
    for name, val in (("eta1", eta1), ("eta2", eta2)):
        if not 0.0 < val <= 1.0:
            raise ValidationError(f"{name} must lie in (0, 1], got {val}")
    cross = math.sqrt(gain1 * gain2) + math.sqrt((gain1 - 1.0) * (gain2 - 1.0)) * math.cos(2.0 * theta)
    bracket = (
        gain2 * (1.0 - g * eta1) * (1.0 - eta2)
        + g * gain1 * (1.0 - eta1) * (1.0 - g * eta2)
        - 2.0 * g * math.sqrt(gain1 * gain2) * (1.0 - eta1) * (1.0 - eta2) * cross
    )
    return 0.25 * ((1.0 - g * eta1 * eta2) ** 2 - 4.0 * eta2 * bracket)


def det_alpha_general(
    g: float,
    noise: float,
    gain1: float,
    gain2: float,
    theta: float,
    eta1: float,
    eta2: float,
) -> float:
    """det(noise) of the generic assembly: closed form when noise = 0, direct otherwise."""
    if noise == 0.0:
        return det_alpha_closed_form(g, gain1, gain2, theta, eta1, eta2)
    _, noise_mat = pic_sandwich_assembly(g, noise, gain1, gain2, theta, eta1, eta2)
    return float(np.linalg.det(noise_mat))


def psa_threshold_gain(eta1: float, eta2: float) -> float:
    """Gain above which a phase-sensitive amplifier breaks the sandwich.

    Returns inf when either transmittance is 1: a lossless segment pushes the
    breaking gain to infinity.
    """
    for name, val in (("eta1", eta1), ("eta2", eta2)):
        if not 0.0 < val <= 1.0:
            raise ValidationError(f"{name} must lie in (0, 1], got {val}")
    if eta1 == 1.0 or eta2 == 1.0:
        return math.inf
    return 1.0 + eta1 / ((1.0 - eta1) * (1.0 - eta2))


def pia_threshold_gain(eta1: float) -> float:
    """Gain above which a quantum-limited amplifier breaks the sandwich.

    Independent of the downstream transmittance; inf when eta1 = 1.
    """
    if not 0.0 < eta1 <= 1.0:
        raise ValidationError(f"eta1 must lie in (0, 1], got {eta1}")
    if eta1 == 1.0:
        return math.inf
    return 1.0 / (1.0 - eta1)


def tmsv_cov(r: float) -> np.ndarray:
    """Two-mode squeezed vacuum covariance matrix at squeezing strength r."""
    m = two_mode_squeezer(r)
    return symmetrize(0.5 * (m.T @ m))


def _embed_on_second_mode(channel: GaussianChannel) -> tuple[np.ndarray, np.ndarray]:
    """Extend (K, alpha) to identity-on-mode-1 (x1, x2, p1, p2 ordering)."""
    k = channel.transfer
    alpha = channel.noise
    k_ext = np.eye(4)
    alpha_ext = np.zeros((4, 4))
    slots = (1, 3)  # x2 and p2 positions in xxpp ordering
    for a, i in enumerate(slots):
        for b, j in enumerate(slots):
            k_ext[i, j] = k[a, b]
            alpha_ext[i, j] = alpha[a, b]
    return k_ext, alpha_ext


def choi_probe_min_nu(channel: GaussianChannel, r: float) -> float:
    """Min symplectic eigenvalue of the partially transposed probe output.

    Sends one arm of a two-mode squeezed vacuum through the channel, flips the
    sign of the second mode's phase quadrature, and returns the smallest
    symplectic eigenvalue; below 1/2 the output is NPT, so the channel cannot
    be entanglement breaking.
    """
    if channel.n != 1:
        raise ValidationError("the probe oracle is defined for single-mode channels")
    cov = tmsv_cov(r)
    k_ext, alpha_ext = _embed_on_second_mode(channel)
    out = symmetrize(k_ext.T @ cov @ k_ext) + alpha_ext
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    transposed = symmetrize(flip @ out @ flip)
    return float(symplectic_eigenvalues(transposed)[-1])


def choi_ppt_oracle(channel: GaussianChannel, r_schedule: Sequence[float] | None = None) -> EbVerdict:
    """Entanglement-breaking verdict by probing with squeezed-vacuum Choi states.

    A single NPT hit (symplectic eigenvalue < 1/2) is definitive evidence the
    channel is not breaking. Surviving the whole schedule yields eb=True with
    ``schedule_limited`` set: breaking requires separability at every r, and a
    finite schedule can only accumulate evidence.
    """
    schedule = tuple(DEFAULT_R_SCHEDULE if r_schedule is None else r_schedule)
    if not schedule:
        raise ValidationError("the probe schedule must contain at least one squeezing strength")
    min_margin = math.inf
    for r in schedule:
        margin = choi_probe_min_nu(channel, r) - 0.5
        min_margin = min(min_margin, margin)
        if margin < -POLICY.psd_floor:
            return EbVerdict(eb=False, margin=min_margin, method="choi-ppt-oracle")
    return EbVerdict(eb=True, margin=min_margin, method="choi-ppt-oracle", schedule_limited=True)


def rate_upper_bound(eta: float) -> float:
    """Key-rate ceiling log2((1+eta)/(1-eta)) in bits per mode over transmittance eta."""
    if not np.isfinite(eta) or eta <= 0.0:
        raise ValidationError(f"transmittance must be positive, got {eta}")
    if eta >= 1.0:
        return math.inf
    return math.log2((1.0 + eta) / (1.0 - eta))
