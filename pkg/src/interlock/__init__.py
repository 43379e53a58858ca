"""Topological interlocking assemblies of the versatile block.

Construct the block, lay it out over wallpaper-symmetric Truchet tilings,
derive directional blocking graphs, propagate loads to the frame, and
enumerate/screen the whole design space of valid tilings.
"""

from ._kernels import BACKEND
from .assembly import (
    Assembly,
    TruchetTiling,
    build_assembly,
    count_assemblies,
    core_indices,
    export_assembly,
    frame_indices,
    rotate_tiling,
    tiling_from_group,
    validate_tiling,
)
from .block import VersatileBlock, oriented_block, versatile_block
from .blocking import BlockingGraph, dbg_combinatorial, dbg_geometric
from .enumeration import (
    CandidateSet,
    brute_force_tilings,
    canonicalize,
    enumerate_tilings,
    screen,
)
from .flows import (
    FlowError,
    FlowResult,
    TransferMatrix,
    closed_form,
    flow_metrics,
    initial_load,
    iterate,
    step,
    transfer_matrix,
)
from .isometry import (
    Isometry2,
    Isometry3,
    WallpaperGroup,
    apply2,
    apply3,
    compose,
    extend3,
    group_elements,
    identity2,
    invert,
    wallpaper_group,
)
from .mesh import (
    TriMesh,
    cross_section_area,
    euler_characteristic,
    overlap,
    read_stl,
    read_stl_soup,
    signed_volume,
    validate_mesh,
    write_obj,
    write_stl,
)

__version__ = "0.1.0"

__all__ = [
    "Assembly",
    "BACKEND",
    "BlockingGraph",
    "CandidateSet",
    "FlowError",
    "FlowResult",
    "Isometry2",
    "Isometry3",
    "TransferMatrix",
    "TriMesh",
    "TruchetTiling",
    "VersatileBlock",
    "WallpaperGroup",
    "apply2",
    "apply3",
    "brute_force_tilings",
    "build_assembly",
    "canonicalize",
    "closed_form",
    "compose",
    "count_assemblies",
    "core_indices",
    "cross_section_area",
    "dbg_combinatorial",
    "dbg_geometric",
    "enumerate_tilings",
    "euler_characteristic",
    "export_assembly",
    "extend3",
    "flow_metrics",
    "frame_indices",
    "group_elements",
    "identity2",
    "initial_load",
    "invert",
    "iterate",
    "oriented_block",
    "overlap",
    "read_stl",
    "read_stl_soup",
    "rotate_tiling",
    "screen",
    "signed_volume",
    "step",
    "tiling_from_group",
    "transfer_matrix",
    "validate_mesh",
    "validate_tiling",
    "versatile_block",
    "wallpaper_group",
    "write_obj",
    "write_stl",
]
