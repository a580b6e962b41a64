"""Distance rigidity on model Riemannian manifolds.

Sphere-intersection predicates and witnesses, lens diameters and r-bar,
an exact rewrite engine for strongly preserved distances, and executable
counterexamples.
"""

__version__ = "0.1.0"

from .closure import (ClosureContext, DerivationCertificate, DerivationStep, PreservedSet,
                      apply_rule, derive_to_epsilon, verify_certificate)
from .counterexamples import audit_distance, build_example, example4_demo, hex_color
from .intersections import (IntersectionClass, classify_intersection, intersect_predicate,
                            intersect_witness)
from .lens import LensProfile, RBarResult, lens_diameter, lens_profile, rbar
from .manifolds import (Euclidean, FlatTorus, Hyperbolic, ManifoldModel, Point, Sphere,
                        SphereSpec, TangentVector, model_from_id)
from .scalars import INF, Exact, Interval, parse_scalar

__all__ = [
    "ClosureContext", "DerivationCertificate", "DerivationStep", "PreservedSet", "apply_rule",
    "derive_to_epsilon", "verify_certificate", "audit_distance", "build_example",
    "example4_demo", "hex_color", "IntersectionClass", "classify_intersection",
    "intersect_predicate", "intersect_witness", "LensProfile", "RBarResult", "lens_diameter",
    "lens_profile", "rbar", "Euclidean", "FlatTorus", "Hyperbolic", "ManifoldModel", "Point",
    "Sphere", "SphereSpec", "TangentVector", "model_from_id", "INF", "Exact", "Interval",
    "parse_scalar",
]
