"""Exact finite approximations of IFS attractors and their topology.

Contrasts the Cantor middle-third set (zero-dimensional, perfect) with the
Sierpinski carpet (connected, perfect), and builds the self-similar
non-trivial collapse quotient of the Cantor set on its code space.
"""
from .attractor import (CellSet, IFSystem, convergence_trace, hutchinson_step,
                        iterate_attractor, lipschitz_sum, max_cell_diameter, preset)
from .errors import IFSError, InvalidInput, PropertyRefusal, ResourceLimit, UnsupportedInput
from .geometry import (AffineMap, Box, apply_map, fixed_point, hausdorff_distance,
                       map_box)
from .quotient import (Decomposition, build_collapse_quotient,
                       conjugate_selfsimilarity_check, homeo_to_cmts_check,
                       iterate_quotients, nontriviality_check,
                       verify_quotient_homeomorphism)
from .topology import (PropertyReport, analyze, build_adjacency, check_conditions,
                       clopen_partition, connected_components, count_windows,
                       find_arc, min_gap, nested_connectivity_report,
                       perfectness_proxy)

__version__ = "0.1.0"
