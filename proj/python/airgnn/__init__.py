"""Graph neural networks over fading and noisy wireless channels."""

from ._airgnn import (
    ChannelModel,
    Graph,
    Parameters,
    Realization,
    __version__,
    decentralized_forward,
    forward,
    gradient,
    ideal_realization,
    init_parameters,
    noise_variance,
    normalize_by_spectral_radius,
    run_command,
    sample_realization,
    sbm_graph,
    geometric_graph,
)

__all__ = [
    "ChannelModel",
    "Graph",
    "Parameters",
    "Realization",
    "__version__",
    "decentralized_forward",
    "forward",
    "geometric_graph",
    "gradient",
    "ideal_realization",
    "init_parameters",
    "noise_variance",
    "normalize_by_spectral_radius",
    "run_command",
    "sample_realization",
    "sbm_graph",
]
