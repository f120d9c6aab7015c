"""Two-species charged-fluid laboratory: stiff-friction hydrodynamics,
its drift-diffusion limit, and relative-energy diagnostics."""

__version__ = "0.1.0"

from .eos import GasLaw, LowerBoundConstants, lower_bound_constants
from .grids import Grid, ScalarField, VectorField, make_grid

__all__ = [
    "GasLaw",
    "LowerBoundConstants",
    "lower_bound_constants",
    "Grid",
    "ScalarField",
    "VectorField",
    "make_grid",
    "__version__",
]
