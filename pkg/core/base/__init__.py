__all__ = [
    "DomainBox", "McConfig", "McEstimate", "GaussianProposal", "UniformBoxProposal",
    "mean_estimate", "uniform_config", "gaussian_config",
]

from .domain import DomainBox
from .montecarlo import (
    McConfig, McEstimate, GaussianProposal, UniformBoxProposal,
    mean_estimate, uniform_config, gaussian_config,
)
