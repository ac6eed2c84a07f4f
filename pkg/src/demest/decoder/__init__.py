"""Minimum-weight perfect matching decoding of (decomposed) DEMs."""

from .batch import DecodeReport, ExactDecoder, PyMatchingDecoder, logical_error_rate, make_decoder
from .decompose import DecompositionError, decompose_hyperedges, decomposition_of
from .graph import DisconnectedDefect, Edge, MatchingGraph, brute_force_decode, build_matching_graph, decode_shot

__all__ = [
    "DecodeReport",
    "DecompositionError",
    "DisconnectedDefect",
    "Edge",
    "ExactDecoder",
    "MatchingGraph",
    "PyMatchingDecoder",
    "brute_force_decode",
    "build_matching_graph",
    "decode_shot",
    "decomposition_of",
    "decompose_hyperedges",
    "logical_error_rate",
    "make_decoder",
]
