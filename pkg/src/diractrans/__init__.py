"""Transversal Hamilton cycles in families of Dirac graphs.

Samplers, exact solvers, extremality analysis, and threshold experiment
harnesses for colored graph families where every color meets the Dirac
degree bound.
"""

from .backend import BACKEND
from .families import ColoredFamily, Transversal, validate_transversal
from .pipeline import NoTransversalError, sample_transversal

__all__ = [
    "BACKEND",
    "ColoredFamily",
    "NoTransversalError",
    "Transversal",
    "sample_transversal",
    "validate_transversal",
]

__version__ = "0.1.0"
