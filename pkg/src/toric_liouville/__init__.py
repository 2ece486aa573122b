"""Polyhedral Hamiltonians on toric Kähler manifolds: exact lattice data, the
character-sum Kähler form, smoothed moment polytopes, orbit families and
contact-type checks."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .lattice_fan import (  # noqa: F401
    Cone,
    Fan,
    PLData,
    SectionPolytope,
    build_fan,
    check_complete,
    normalize_origin,
    period_of_lattice_point,
    period_of_rational_slope,
    pl_from_ray_values,
    polytope_from_hrep,
    radial_coordinate,
    relative_interior_contains,
    section_polytope,
    slope_solutions,
    translate,
)
from .kahler import (  # noqa: F401
    TorusPoint,
    TangentVector,
    covariance,
    hamiltonian_field,
    invert_moment_map,
    liouville_field,
    moment_map,
    omega_at,
    potential,
    theta_at,
)
from .smoothing import (  # noqa: F401
    BumpParams,
    bump,
    bump_d1,
    bump_d2,
    bump_params,
    classify_stratum,
    in_domain,
    inflection_point,
    polyhedral_H,
    radial_level_solve,
    sample_level_set,
    smoothing_h,
    smoothing_h_grad,
)
from .dynamics import (  # noqa: F401
    dynamical_support,
    family,
    field_analytic,
    flow,
    measure_period,
    solve_slope_pair,
)
from .contact_verify import (  # noqa: F401
    check_wrapping_average,
    contact_check,
    distortion_constant,
    exact_torus_check,
    infinitesimal_wrapping,
    lattice_average,
    wrapping_numeric,
)
