"""gausschain: calculus for chains of lossy segments and Gaussian bosonic stations.

Core objects are Gaussian states (covariance matrix + displacement) and
channels (transfer/shift/noise triplets); on top of them the package provides
symplectic decompositions, the sandwich collapse that concentrates a chain's
loss into a single segment, entanglement-breaking detection (closed form and
a Choi-state PPT oracle), and the rate-loss upper bound. Everything is pure
and immutable; see the cli module for the batch front-end.
"""

from .channels import (
    ChannelChain,
    GaussianChannel,
    GaussianState,
    apply_chain,
    apply_channel,
    channel_is_physical,
    compose,
    compose_chain,
    extract_displacements,
    identity_channel,
    state_is_physical,
    vacuum,
)
from .ebreak import (
    EbVerdict,
    StandardForm,
    channel_is_eb,
    choi_ppt_oracle,
    det_alpha_closed_form,
    det_alpha_general,
    pia_threshold_gain,
    pic_is_eb,
    psa_threshold_gain,
    rate_upper_bound,
    reduce_standard_form,
    sandwich_is_eb,
)
from .errors import NumericalCheckError, ScenarioError, UnsupportedChannelError, ValidationError
from .relay import (
    CollapsedChain,
    PsaChainSandwich,
    PsaChainSpec,
    SandwichDecomposition,
    SandwichInput,
    collapse_chain,
    decompose_sandwich,
    psa_chain_params,
    psa_chain_sandwich,
    sandwich_total,
)
from .stations import (
    StationSpec,
    additive_noise,
    phase_insensitive,
    phase_sensitive_amp,
    pure_loss,
    quantum_limited_amp,
    rotation_channel,
)
from .symplectic import (
    EulerFactors,
    WilliamsonForm,
    euler_decompose,
    rotation,
    squeezer,
    squeezer_angled,
    symplectic_eigenvalues,
    symplectic_form,
    williamson,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelChain",
    "CollapsedChain",
    "EbVerdict",
    "EulerFactors",
    "GaussianChannel",
    "GaussianState",
    "NumericalCheckError",
    "PsaChainSandwich",
    "PsaChainSpec",
    "SandwichDecomposition",
    "SandwichInput",
    "ScenarioError",
    "StandardForm",
    "StationSpec",
    "UnsupportedChannelError",
    "ValidationError",
    "WilliamsonForm",
    "additive_noise",
    "apply_chain",
    "apply_channel",
    "channel_is_eb",
    "channel_is_physical",
    "choi_ppt_oracle",
    "collapse_chain",
    "compose",
    "compose_chain",
    "decompose_sandwich",
    "det_alpha_closed_form",
    "det_alpha_general",
    "euler_decompose",
    "extract_displacements",
    "identity_channel",
    "phase_insensitive",
    "phase_sensitive_amp",
    "pia_threshold_gain",
    "pic_is_eb",
    "psa_chain_params",
    "psa_chain_sandwich",
    "psa_threshold_gain",
    "pure_loss",
    "quantum_limited_amp",
    "rate_upper_bound",
    "reduce_standard_form",
    "rotation",
    "rotation_channel",
    "sandwich_is_eb",
    "sandwich_total",
    "squeezer",
    "squeezer_angled",
    "state_is_physical",
    "symplectic_eigenvalues",
    "symplectic_form",
    "vacuum",
    "williamson",
]
