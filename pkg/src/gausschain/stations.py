"""Named constructors for the channels used as relay stations.

Kinds and their parameters:

    loss      eta in (0, 1], optional mode count      pure attenuation
    pic       kappa >= 0, noise >= 0                  phase-insensitive channel
    anc       epsilon > 0                             rank-1 additive noise
    psa       gain >= 1, optional angle               phase-sensitive amplifier (unitary)
    pia       gain >= 1                               quantum-limited phase-insensitive amplifier
    rotation  theta                                   phase rotation (unitary)

Zero transmittance is rejected everywhere: the rate bound degenerates to zero
there and the sandwich decomposition's mixing probability is undefined, so
callers must treat eta = 0 as "no channel at all".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import GaussianChannel
from .errors import ValidationError
from .numerics import mode_count
from .symplectic import rotation, squeezer_angled


def pure_loss(eta: float, n: int = 1) -> GaussianChannel:
    """Attenuation by transmittance eta on each of n modes."""
    if not 0.0 < eta <= 1.0:
        raise ValidationError(f"loss transmittance eta must lie in (0, 1], got {eta}")
    mode_count(2 * n)
    dim = 2 * n
    return GaussianChannel(np.sqrt(eta) * np.eye(dim), None, ((1.0 - eta) / 2.0) * np.eye(dim))


def phase_insensitive(kappa: float, noise: float) -> GaussianChannel:
    """Single-mode channel with isotropic transfer sqrt(kappa) I and noise (|1-kappa|/2 + N) I."""
    if kappa < 0.0 or not np.isfinite(kappa):
        raise ValidationError(f"gain kappa must be >= 0, got {kappa}")
    if noise < 0.0 or not np.isfinite(noise):
        raise ValidationError(f"excess noise must be >= 0, got {noise}")
    alpha = (abs(1.0 - kappa) / 2.0 + noise) * np.eye(2)
    return GaussianChannel(np.sqrt(kappa) * np.eye(2), None, alpha)


def additive_noise(epsilon: float) -> GaussianChannel:
    """Identity transfer plus rank-1 noise (1/2) diag(0, epsilon) on the phase quadrature."""
    if not epsilon > 0.0 or not np.isfinite(epsilon):
        raise ValidationError(f"noise strength epsilon must be > 0, got {epsilon}")
    return GaussianChannel(np.eye(2), None, 0.5 * np.diag([0.0, epsilon]))


def phase_sensitive_amp(gain: float, angle: float = 0.0) -> GaussianChannel:
    """Unitary squeezer channel of the given gain and squeezing angle."""
    return GaussianChannel(squeezer_angled(gain, angle))


def quantum_limited_amp(gain: float) -> GaussianChannel:
    """Phase-insensitive amplifier at the quantum noise limit."""
    if gain < 1.0:
        raise ValidationError(f"amplifier gain must be >= 1, got {gain}")
    return phase_insensitive(gain, 0.0)


def rotation_channel(theta: float) -> GaussianChannel:
    return GaussianChannel(rotation(theta))


#: Scenario-facing station kinds and their accepted parameter names.
STATION_PARAMS: dict[str, tuple[str, ...]] = {
    "loss": ("eta",),
    "pic": ("kappa", "noise"),
    "anc": ("epsilon",),
    "psa": ("gain", "angle"),
    "pia": ("gain",),
    "rotation": ("theta",),
    "custom": ("n", "transfer", "noise", "shift"),
}


@dataclass(frozen=True)
class StationSpec:
    """Declarative description of one chain segment, as written in scenario files.

    ``params`` maps parameter names to floats, except for kind "custom" where
    ``transfer``/``noise``/``shift`` hold row-major flattened tuples.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in STATION_PARAMS:
            raise ValidationError(f"unknown station kind {self.kind!r}")
        allowed = STATION_PARAMS[self.kind]
        for key in self.params:
            if key not in allowed:
                raise ValidationError(f"station kind {self.kind!r} does not take parameter {key!r}")

    def is_loss(self) -> bool:
        return self.kind == "loss"

    def to_channel(self) -> GaussianChannel:
        p = self.params
        if self.kind == "loss":
            return pure_loss(p["eta"])
        if self.kind == "pic":
            return phase_insensitive(p["kappa"], p.get("noise", 0.0))
        if self.kind == "anc":
            return additive_noise(p["epsilon"])
        if self.kind == "psa":
            return phase_sensitive_amp(p["gain"], p.get("angle", 0.0))
        if self.kind == "pia":
            return quantum_limited_amp(p["gain"])
        if self.kind == "rotation":
            return rotation_channel(p["theta"])
        n = int(p.get("n", 1))
        dim = 2 * n
        transfer = np.array(p["transfer"], dtype=float).reshape(dim, dim)
        noise = np.array(p["noise"], dtype=float).reshape(dim, dim) if "noise" in p else None
        shift = np.array(p["shift"], dtype=float) if "shift" in p else None
        return GaussianChannel(transfer, shift, noise)

    def gain_like(self) -> float:
        """A scalar summarizing the station for report/CSV columns."""
        p = self.params
        if self.kind == "loss":
            return p["eta"]
        if self.kind == "pic":
            return p["kappa"]
        if self.kind in ("psa", "pia"):
            return p["gain"]
        if self.kind == "anc":
            return p["epsilon"]
        if self.kind == "rotation":
            return p["theta"]
        ch = self.to_channel()
        return float(np.linalg.det(ch.transfer)) ** (1.0 / ch.n)
