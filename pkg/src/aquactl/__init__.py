"""Bioenergetic fish growth simulation and feeding-control benchmark suite."""

__version__ = "0.1.0"

from aquactl.kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
