from __future__ import absolute_import

from momentshape.bounds import (
    BoundConfig,
    bound_lsq,
    bound_stability2,
    bound_stability_geometric,
    bound_stability_legendre,
    noise_envelope,
)
from momentshape.estimator import (
    LeastSquaresEstimator,
    ReconstructionConfig,
    ReconstructionResult,
    StartDiagnostics,
    StartKind,
    TruthErrors,
    objective,
    objective_gradient,
    reconstruct,
    truth_errors,
)
from momentshape.feasible_set import FeasibleSet, ProjectionMethod
from momentshape.geometry import (
    ConvexPolygon,
    DirectionSet,
    SupportVector,
    consistency_matrix,
    hausdorff_distance,
    intersect_polygons,
    is_consistent,
    nikodym_distance,
    polygonization_bound,
    random_convex_polygon,
    support_vertices,
    vertex_map,
    vertices_from_support,
)
from momentshape.legendre_basis import (
    LegendreBasis,
    build_basis,
    exact_hilbert_matrix,
    hilbert_matrix,
)
from momentshape.moment_polynomials import (
    ExpandedMomentTensors,
    MomentPolynomials,
    legendre_moments_from_support,
    moments_from_support,
)
from momentshape.moments import (
    MomentGrid,
    MomentKind,
    circumradius_bound,
    geometric_to_legendre,
    legendre_to_geometric,
    moment_distance,
    polygon_geometric_moments,
    polygon_legendre_moments,
    shape_geometric_moments,
    shape_legendre_moments,
)
from momentshape.noise_model import (
    NoiseSchedule,
    NoisySpec,
    perturb,
    sample_noise,
)
from momentshape.shape import (
    EllipseShape,
    PolygonShape,
    ShapeModel,
    polygonize,
    support_value,
)
from momentshape.study import (
    StudyConfig,
    StudyKind,
    StudyRecord,
    calibrate_a1,
    convergence_study,
    median_errors,
    noise_consistency_study,
    run_study,
)

__version__ = "0.1.0"

__all__ = [
    "LegendreBasis",
    "build_basis",
    "hilbert_matrix",
    "exact_hilbert_matrix",
    "DirectionSet",
    "SupportVector",
    "ConvexPolygon",
    "consistency_matrix",
    "vertex_map",
    "support_vertices",
    "is_consistent",
    "vertices_from_support",
    "intersect_polygons",
    "nikodym_distance",
    "hausdorff_distance",
    "polygonization_bound",
    "random_convex_polygon",
    "ShapeModel",
    "PolygonShape",
    "EllipseShape",
    "support_value",
    "polygonize",
    "MomentKind",
    "MomentGrid",
    "polygon_geometric_moments",
    "polygon_legendre_moments",
    "geometric_to_legendre",
    "legendre_to_geometric",
    "shape_geometric_moments",
    "shape_legendre_moments",
    "moment_distance",
    "circumradius_bound",
    "MomentPolynomials",
    "ExpandedMomentTensors",
    "moments_from_support",
    "legendre_moments_from_support",
    "ProjectionMethod",
    "FeasibleSet",
    "BoundConfig",
    "bound_stability_legendre",
    "bound_stability_geometric",
    "bound_stability2",
    "bound_lsq",
    "noise_envelope",
    "ReconstructionConfig",
    "StartKind",
    "StartDiagnostics",
    "TruthErrors",
    "ReconstructionResult",
    "objective",
    "objective_gradient",
    "LeastSquaresEstimator",
    "reconstruct",
    "truth_errors",
    "NoiseSchedule",
    "NoisySpec",
    "sample_noise",
    "perturb",
    "StudyKind",
    "StudyRecord",
    "StudyConfig",
    "run_study",
    "noise_consistency_study",
    "convergence_study",
    "median_errors",
    "calibrate_a1",
]
