"""cubetop: cubical digitization with topology-preserving compression.

Build cube-set models of continuous objects on an integer lattice, read
them as intersection graphs, delete simple elements to compress them
without changing homotopy type, and verify the whole pipeline against
Euler-characteristic and homology oracles.
"""

from .digitize import (
    Ball,
    Bounds,
    Box,
    ResolutionLadder,
    SampledMask,
    SphereShell,
    build_cubical_model,
    cube_intersects_object,
    default_bounds,
    refine_sequence,
    stability_scan,
)
from .graphkit import (
    Graph,
    canonical_form,
    intersection_graph,
    isomorphic,
    isomorphism,
    join,
)
from .homotopy import (
    EquivalenceResult,
    TraceStep,
    attach_cube,
    attach_edge,
    attach_point,
    compress_graph,
    compress_space,
    delete_cube,
    delete_edge,
    delete_point,
    homotopy_equivalent,
    is_contractible,
    is_contractible_space,
    is_simple_cube,
    is_simple_edge,
    is_simple_point,
    replay_graph_trace,
    replay_space_trace,
)
from .invariants import (
    InvariantReport,
    euler_characteristic_graph,
    euler_characteristic_image,
    fingerprint,
    homology_ranks,
)
from .lattice import (
    CubicalSpace,
    ball,
    cube_label,
    cubes_intersect,
    image_faces,
    load_space,
    parse_cube_label,
    rim,
    save_space,
)

__version__ = "0.1.0"
