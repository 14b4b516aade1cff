"""Python bindings for the gist surrogate core."""

from ._core import (
    GistError,
    Mesh,
    analytic_coefficients,
    exact_kernel,
    gen_cube,
    gen_icosphere,
    gen_thin_plate,
    gen_wing_flap,
    integrate_fields,
    load_mesh,
    manufactured_fields,
    map_point_names,
    predict_fields,
    run_cli,
    spectral_embed,
    verify,
)

__all__ = [
    "GistError",
    "Mesh",
    "analytic_coefficients",
    "exact_kernel",
    "gen_cube",
    "gen_icosphere",
    "gen_thin_plate",
    "gen_wing_flap",
    "integrate_fields",
    "load_mesh",
    "manufactured_fields",
    "map_point_names",
    "predict_fields",
    "run_cli",
    "spectral_embed",
    "verify",
]
