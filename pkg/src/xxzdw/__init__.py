"""Domain-wall dynamics of the XXZ spin-1/2 chain.

Contour-integral Bethe-ansatz amplitudes, exact-diagonalization reference
dynamics, the left-most-particle law by several independent routes, the
zero-anisotropy determinant pipeline, and the contour-deformation series
with its edge-scaling coefficients.
"""

from .summation import BACKEND
from .model import ModelParams, ParticleConfig
from .errors import (ConvergenceError, InvalidConfigError, PoleProximityError,
                     VerificationError, XXZDWError)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ModelParams", "ParticleConfig", "XXZDWError",
    "ConvergenceError", "InvalidConfigError", "PoleProximityError",
    "VerificationError", "__version__",
]
