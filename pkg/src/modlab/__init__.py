"""Finite modal model theory workbench: formulas, frames, bisimulations,
monotonicity and positivity checks, bisimulation products."""

from .kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
__version__ = "0.1.0"
