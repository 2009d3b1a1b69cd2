"""Confocal quadrics: elliptic coordinates, focal cones and their common
edges, and the string construction of the ellipsoid."""

from .cones import (Cone, Transversal, common_edge_sq_cosines, common_edges, focal_cone,
                    focal_edges, identity_sum, intercept_length, right_cone_locus_check,
                    sq_cosines_from_null_space, tangent_cone_canonical, tangent_cone_form)
from .confocal import (AxesTable, ConfocalSystem, EllipticCoordinates, FrameAtPoint,
                       apollonian_curve_point, apollonian_residual, axes_table,
                       confocal_quadric, elliptic_coordinates, focal_quadric, frame_at_point,
                       norm_identity_check, point_from_axes_table)
from .errors import GeometryError, NonConvergence
from .quadrics import (CentralQuadric, ConjugateSystem, Hyperplane, apollonius_invariant,
                       random_conjugate_system)
from .staude import (FocalConics, chasles_3d, focal_radii, minimize_broken_line,
                     rytz_chasles_2d, staude_length)

__version__ = "0.1.0"

__all__ = [
    "AxesTable", "CentralQuadric", "Cone", "ConfocalSystem", "ConjugateSystem",
    "EllipticCoordinates", "FocalConics", "FrameAtPoint", "GeometryError", "Hyperplane",
    "NonConvergence", "Transversal", "apollonian_curve_point", "apollonian_residual",
    "apollonius_invariant", "axes_table", "chasles_3d", "common_edge_sq_cosines",
    "common_edges", "confocal_quadric", "elliptic_coordinates", "focal_cone", "focal_edges",
    "focal_quadric", "focal_radii", "frame_at_point", "identity_sum", "intercept_length",
    "minimize_broken_line", "norm_identity_check", "point_from_axes_table",
    "random_conjugate_system", "right_cone_locus_check", "rytz_chasles_2d",
    "sq_cosines_from_null_space", "staude_length", "tangent_cone_canonical",
    "tangent_cone_form",
]
