"""Edge multiscale finite element methods for high-contrast elliptic problems.

Thin wrapper around the compiled core; see the C++ library for the actual
solvers (ESMsFEM, WEMsFEM, MsFEM baselines and the fine-scale reference).
"""

from ._core import (
    CoefficientField,
    GridPair,
    MethodResult,
    __version__,
    constant_field,
    fine_solve,
    haar_function,
    haar_project,
    haar_reconstruct,
    hierarchical_function,
    load_raster,
    make_grid,
    preset_field,
    preset_names,
    run_study,
    solve_multiscale,
    synthetic_field,
)

__all__ = [
    "CoefficientField",
    "GridPair",
    "MethodResult",
    "__version__",
    "constant_field",
    "fine_solve",
    "haar_function",
    "haar_project",
    "haar_reconstruct",
    "hierarchical_function",
    "load_raster",
    "make_grid",
    "preset_field",
    "preset_names",
    "run_study",
    "solve_multiscale",
    "synthetic_field",
]
