"""wanderlab: validated certificates for the plane dynamics of meromorphic maps.

Rigorous rectangle arithmetic, set-inclusion and inequality certificates,
discrete winding numbers, orbit classification rasters, and digital
topology of the resulting coloured regions.
"""
from .numerics import ComplexBox, DomainError, PoleIntersect, exp_tail_bound

__version__ = "0.1.0"

__all__ = [
    "ComplexBox",
    "DomainError",
    "PoleIntersect",
    "exp_tail_bound",
    "__version__",
]
