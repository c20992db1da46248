"""Shape catalog, Schwarz-function machinery and charge placement."""

from .shapes import (
    BoundaryNodes, GeometryError, Shape, boundary_deriv, boundary_nodes, boundary_point,
    boundary_polyline, crescent, custom_laurent, disc, generalized_crescent, inverted_ellipse,
    make_shape, perimeter, radial_star, rounded_triangle,
)
from .schwarz import (
    AmbiguousPointWarning, Singularity, critical_points, distance_to_boundary,
    exterior_singularities, find_singularities, invert_parametrization, is_exterior, reflect,
    schwarz, winding_number,
)
from .placement import (
    AdaptiveCurve, ChargeSet, SelfIntersectionWarning, adaptive_curve, dmax_rule, place_adaptive,
    place_annular, place_charges, place_disc,
)
