"""Composition operators on discrete Hardy spaces over homogeneous rooted trees."""

from .errors import (
    CoverageError,
    DepthCapError,
    DomainError,
    FileFormatError,
    HardyTreeError,
    VertexFormatError,
)
from .hardy import (
    NormReport,
    TreeFunction,
    extremal_fw,
    growth_bound_check,
    load_function,
    mp_level,
    norm,
    save_function,
    tp_norm,
    weight,
)
from .operators import (
    DiagnosticsReport,
    OpNormBounds,
    automorphism_norm,
    compactness_diagnostics,
    compose,
    lower_bound_fw,
    operator_norm_bounds,
    opnorm_infinity,
    sequential_compactness_probe,
    sufficiency_series,
    truncated_opnorm_exact,
)
from .selfmaps import (
    CountingTable,
    PartialAutomorphism,
    SelfMap,
    counting_function,
    displacement_profile,
    identity_map,
    map_child_phi3,
    map_clamp,
    map_collapse_phi1,
    map_from_file,
    map_from_spec,
    map_halving_phi4,
    map_parent_phi2,
    shift_automorphism,
)
from .tree import ROOT, TreeParams, Vertex, enumerate_level, format_vertex, level_size, parent, parse_vertex

__version__ = "0.1.0"

__all__ = [
    "CoverageError",
    "DepthCapError",
    "DomainError",
    "FileFormatError",
    "HardyTreeError",
    "VertexFormatError",
    "NormReport",
    "TreeFunction",
    "extremal_fw",
    "growth_bound_check",
    "load_function",
    "mp_level",
    "norm",
    "save_function",
    "tp_norm",
    "weight",
    "DiagnosticsReport",
    "OpNormBounds",
    "automorphism_norm",
    "compactness_diagnostics",
    "compose",
    "lower_bound_fw",
    "operator_norm_bounds",
    "opnorm_infinity",
    "sequential_compactness_probe",
    "sufficiency_series",
    "truncated_opnorm_exact",
    "CountingTable",
    "PartialAutomorphism",
    "SelfMap",
    "counting_function",
    "displacement_profile",
    "identity_map",
    "map_child_phi3",
    "map_clamp",
    "map_collapse_phi1",
    "map_from_file",
    "map_from_spec",
    "map_halving_phi4",
    "map_parent_phi2",
    "shift_automorphism",
    "ROOT",
    "TreeParams",
    "Vertex",
    "enumerate_level",
    "format_vertex",
    "level_size",
    "parent",
    "parse_vertex",
]
