"""Numerical checks for gauge-invariant boundary conditions of linearised gravity on ``[-T, T] x T^3``."""

from .boundary import BoundaryConditionSpec, SideCoefficients
from .geometry import make_flat_torus_product, make_warped_torus_product
from .tensor_ops import make_grid, mode_index

__all__ = [
    "BoundaryConditionSpec",
    "SideCoefficients",
    "make_flat_torus_product",
    "make_warped_torus_product",
    "make_grid",
    "mode_index",
]
__version__ = "0.1.0"
