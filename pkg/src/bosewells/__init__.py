"""Dynamics of ultracold bosons in double- and triple-well traps.

Back-ends: numerically exact propagation (full diagonalization),
single-trajectory mean field, the truncated Wigner ensemble, and the
semiclassical frozen-Gaussian (Herman-Kluk) propagator.
"""

__version__ = "0.1.0"

from .kernels import USING_COMPILED_CORE  # noqa: F401
