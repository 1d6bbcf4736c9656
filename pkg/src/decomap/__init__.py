"""Modular-cone machinery for positive maps between matrix algebras."""

from . import cones, dykstra, linalg, maps, modular, stormer
from .errors import DecomapError

__version__ = "0.1.0"

__all__ = [
    "DecomapError",
    "__version__",
    "cones",
    "dykstra",
    "linalg",
    "maps",
    "modular",
    "stormer",
]
