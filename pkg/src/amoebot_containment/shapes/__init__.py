"""Shape algebra, snowflake trees and shape classification."""

from .classify import (
    ConvexSides,
    NotConvex,
    NotStarConvex,
    convex_fits,
    convex_hull_shape,
    convex_sides,
    hexagon_shape,
    is_convex,
    is_hole_free,
    is_r_symmetric,
    is_star_convex,
    parallelogram,
    shape_from_sides,
    star_centers,
    star_convex_decompose,
)
from .core import (
    DOWN,
    POINT,
    UP,
    Shape,
    axis_width,
    canon_edge,
    edge_endpoints,
    face_corners,
    face_edges,
    face_from_corners,
    make_line,
    make_triangle,
    minkowski_with_line,
    rotate_shape,
    scale,
    translate_shape,
    union_shapes,
)
from .tree import (
    ArityError,
    InvalidShift,
    Kind,
    RangeError,
    SnowflakeSyntaxError,
    SnowflakeTree,
    TreeError,
    eval_tree,
    line,
    parse_snowflake,
    rotate_tree,
    serialize_snowflake,
    shift,
    ssum,
    tri,
    union,
    validate_tree,
)
