"""Circuit IR, channel decompositions and memory-experiment builders."""

from .builders import (
    COLOR_CNOT_SCHEDULE,
    NoiseConfig,
    build_color_code,
    build_repetition_bare,
    build_repetition_steane,
    build_surface_unrotated,
    color_layout,
    surface_layout,
)
from .channels import PAULIS_1Q, PAULIS_2Q, decompose_depol1, decompose_depol2, sample_lognormal_rates
from .ir import (
    Circuit,
    CircuitError,
    CircuitParseError,
    Instruction,
    NoiseComponent,
    parse_circuit,
    record_targets,
    serialize_circuit,
)

__all__ = [
    "COLOR_CNOT_SCHEDULE",
    "Circuit",
    "CircuitError",
    "CircuitParseError",
    "Instruction",
    "NoiseComponent",
    "NoiseConfig",
    "PAULIS_1Q",
    "PAULIS_2Q",
    "build_color_code",
    "build_repetition_bare",
    "build_repetition_steane",
    "build_surface_unrotated",
    "color_layout",
    "decompose_depol1",
    "decompose_depol2",
    "parse_circuit",
    "record_targets",
    "sample_lognormal_rates",
    "serialize_circuit",
    "surface_layout",
]
