"""Six-vertex model (a = b = 1, weight c on types 5-6) in the height-function
representation: exact enumeration, transfer operators, heat-bath sampling,
level-set events and exact checks of monotonicity properties."""

from .lattice import (Domain, DomainError, plane_patch, rectangle, box, torus,
                      cylinder, annulus, adjacency, graph_distance)
from .heights import (HeightError, InadmissibleBoundary, NoHeightFunction,
                      height_to_arrows, arrows_to_height, vertex_type, weight,
                      c_count, min_extension, max_extension, is_balanced, sector)

__version__ = "0.1.0"
