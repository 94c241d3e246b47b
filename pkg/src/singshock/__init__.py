"""Singular-shock viscous profiles for the Keyfitz-Kranzer system."""
from .errors import SingShockError
from .flux import SAMPLE_DATA, RiemannAnalysis, RiemannData, State2, analyze, eigenvalues, flux

__all__ = [
    "SAMPLE_DATA", "RiemannAnalysis", "RiemannData", "SingShockError", "State2", "analyze", "eigenvalues",
    "flux",
]
__version__ = "0.1.0"
