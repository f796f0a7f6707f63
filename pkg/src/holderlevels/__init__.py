"""Level sets of 1-Holder-alpha functions on fractals.

Exact geometry of the Sierpinski subdivision, conductivity-based lower
bounds, the Bernoulli-measure upper-bound witness, separated-structure
degeneracy and the fat-Cantor phase transition.
"""

from .exact import CoordQ3, PointQ3, QSqrt3
from .paf import (
    HolderCertificate,
    HolderParams,
    PiecewiseAffineFn,
    affine_from_corners,
    constant_fn,
    holder_certificate,
    random_standard_paf,
)
from .bernoulli import BernoulliWitnessFn, bernoulli_cdf, dyadic_cylinder_mass
from .graft import GraftedFn, graft, graft_certificate_constant, min_graft_level
from .levelset import (
    ApproxLevelSet,
    LevelSetTree,
    LevelValue,
    approx_level_set,
    conductivity,
    conductivity_measure,
    conservation_check,
    extreme_labeling,
    kappa_exponent,
    well_conducting_census,
)
from .bounds import (
    BoundSearchParams,
    DimensionEstimate,
    box_count_dimension,
    census_constant,
    feasible_l,
    lower_bound,
    mass_distribution_lower,
    trivial_upper_bound_sierpinski,
    upper_bound,
)
from .cantor import (
    AffineMap1D,
    FatCantorSet,
    PhaseTransitionConfig,
    SeparatedStructure,
    cantor_level,
    capacity_gap,
    feasibility_search,
    ifs_separated_structure,
    phase_perturbation,
    piecewise_constant_feasibility,
    product_separated_structure,
)
from .triangles import (
    BoundaryFamilyL,
    LatticeTriangle,
    boundary_family,
    line_crossing_count,
    line_crossing_count_geometric,
    rescaling_similarity,
    subdivision_addresses,
    triangle_vertices,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
