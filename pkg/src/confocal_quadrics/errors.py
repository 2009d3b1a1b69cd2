"""Exception types raised by the geometry routines.

Every exception carries a short machine-readable ``code`` that the command
line front end copies into its error objects.
"""

from __future__ import annotations


class GeometryError(ValueError):
    code = "geometry_error"


class NoSignChange(GeometryError):
    code = "no_sign_change"


class NonConvergence(RuntimeError):
    code = "non_convergence"


class RankDeficient(GeometryError):
    code = "rank_deficient"


class DimensionMismatch(GeometryError):
    code = "dimension_mismatch"


class OffSurface(GeometryError):
    code = "off_surface"


class NotAnEllipsoid(GeometryError):
    code = "not_an_ellipsoid"


class OnFocalMembrane(GeometryError):
    code = "on_focal_membrane"


class IndexOutOfRange(GeometryError):
    code = "index_out_of_range"


class DegeneratePoint(GeometryError):
    code = "degenerate_point"


class NegativeSquare(GeometryError):
    code = "negative_square"


class NoRealTangency(GeometryError):
    code = "no_real_tangency"


class PoleParameter(GeometryError):
    code = "pole_parameter"


class NotExterior(GeometryError):
    code = "not_exterior"


class NotConfocal(GeometryError):
    code = "not_confocal"


class CoincidentParameters(GeometryError):
    code = "coincident_parameters"


class NoRealEdge(GeometryError):
    code = "no_real_edge"


class ParallelEdge(GeometryError):
    code = "parallel_edge"


class NoIntersection(GeometryError):
    code = "no_intersection"


class DegeneratePair(GeometryError):
    code = "degenerate_pair"


class DegenerateTriple(GeometryError):
    code = "degenerate_triple"


class UnconstructibleConfiguration(GeometryError):
    code = "unconstructible_configuration"
