"""Embedded eigenvalues for perturbed Stark operators.

Liouville/Prüfer transforms, sign-coupled and glued constructions,
spectral diagnostics and an independent shooting oracle.
"""

__version__ = "0.1.0"

from .errors import (ArgumentError, DomainError, EventError, FrameError,
                     InfeasibleScheduleError, IntegrationError,
                     NonApplicableError, PreconditionError, StarkEmbedError,
                     StiffnessError)
from .transform import GridFunction, PiecewisePotential, StarkFrame

__all__ = [
    "StarkFrame", "GridFunction", "PiecewisePotential", "StarkEmbedError",
    "ArgumentError", "DomainError", "IntegrationError", "StiffnessError",
    "FrameError", "EventError", "PreconditionError",
    "InfeasibleScheduleError", "NonApplicableError", "__version__",
]
