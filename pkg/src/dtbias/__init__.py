"""Bias of Delaunay triangulations under random normal perturbation of
degenerate planar point sets: Monte Carlo simulation with exact predicates,
first-order analytic probabilities via Gaussian orthants, and uniform-random
baselines."""

from .analytic import (
    BudgetExceededError,
    ConstraintTree,
    HalfspaceSystem,
    OrthantResult,
    build_tree,
    gram_angles,
    grid2_distribution,
    grid2_halfspaces,
    incircle_gradient,
    orthant_prob,
    polygon_distribution,
    polygon_halfspaces,
    spherical_triangle_prob,
    triangle_halfspaces,
)
from .baselines import CatalanTable, catalan, corner_triangle_prob, sample_uniform_grid, uniform_triangle_prob
from .corner import AccuracyFailure, CornerEstimate, CornerIntegralSpec, corner_probability, corner_table, sub_areas
from .largegrid import (
    DT_PERTURBED,
    UNIFORM_DIAGONALS,
    CensusReport,
    WalkOutcome,
    WalkStats,
    component_census,
    count_components_g,
    count_components_hat,
    cycle_walk,
    walk_statistics,
)
from .pointsets import (
    PerturbationParams,
    Point2,
    PointSet,
    SeedSpec,
    make_grid,
    make_polygon,
    min_pairwise_distance,
    perturb,
)
from .predicates import DegeneracyError, Sign, incircle, orient2d, triangle_area
from .report import RunManifest, __version__
from .simulate import (
    DistributionReport,
    TriangleReport,
    estimate_grid_distribution,
    estimate_polygon_distribution,
    estimate_triangle_frequencies,
    total_variation,
)
from .triangulate import (
    GridCode,
    PolygonCode,
    Triangulation,
    brute_force_dt,
    canonical_class,
    convex_polygon_dt,
    enumerate_polygon_codes,
    grid_dt,
    grid_code_of,
    grid_triangles,
    triangulation_from_code,
)
