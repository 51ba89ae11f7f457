"""Finite-depth laminations and Cannon-Thurston fibers for free-by-cyclic groups."""

from .automorphism import Automorphism, MappingTorusElement
from .config import Config
from .words import Basis, CyclicWord

__all__ = ["Automorphism", "Basis", "Config", "CyclicWord", "MappingTorusElement"]
__version__ = "0.1.0"
