"""Pauli-frame Monte Carlo sampling and exact enumeration."""

from .data import B8_MAGIC, DetectionData, merge, pack_rows, unpack_rows
from .exact import EnumerationTooLarge, ExactDistribution, component_signatures, enumerate_exact
from .frame import FrameSimulator, bernoulli_positions
from .sample import DEFAULT_BATCH, batch_rng, sample_shots

__all__ = [
    "B8_MAGIC",
    "DEFAULT_BATCH",
    "DetectionData",
    "EnumerationTooLarge",
    "ExactDistribution",
    "FrameSimulator",
    "batch_rng",
    "bernoulli_positions",
    "component_signatures",
    "enumerate_exact",
    "merge",
    "pack_rows",
    "sample_shots",
    "unpack_rows",
]
