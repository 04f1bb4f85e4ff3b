"""Affine cubic surfaces x^2 + y^2 + z^2 + xyz = px + qy + rz + s and the
SL(2, C) character varieties of the 4-holed sphere and 1-holed torus."""

from .algebra import (
    DEFAULT_TOL,
    AffineChange,
    AffineCubicPoly,
    Poly,
    ProjectiveCubic,
    Tolerance,
    poly_roots,
    solve_linear,
    substitute,
)
from .characters import (
    CharacterPoint,
    FourHoledSphereRep,
    TorusRep,
    build_rep_4holed,
    build_rep_torus,
    delta_orbit,
    torus_char,
    torus_correspondence,
    traces_of_rep,
)
from .cubic_surface import normalize, on_surface, singular_points, solve_for_z, verify_tritangent
from .errors import DomainError, InputError, TritangentError
from .trace_map import (
    CubicParams,
    Traces4,
    classify_pqr_zero,
    factor_residuals,
    fiber,
    fiber_count,
    min_image_on_sphere,
    phi,
    phi_jacobian_det,
)

__version__ = "0.1.0"
