"""Logical error rates over many shots."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..refdem.model import DEM
from ..sampler.data import DetectionData, unpack_rows
from .decompose import decompose_hyperedges
from .graph import MatchingGraph, decode_shot

CHUNK = 1 << 16


@dataclass
class DecodeReport:
    shots: int
    failures: int
    rate: float
    stderr: float
    failures_per_observable: list[int] = field(default_factory=list)

    @classmethod
    def from_counts(cls, shots: int, failures: int, per_observable=()) -> "DecodeReport":
        rate = failures / shots if shots else 0.0
        err = math.sqrt(rate * (1 - rate) / shots) if shots else 0.0
        return cls(shots, failures, rate, err, list(per_observable))

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps({k: d[k] for k in ("shots", "failures", "rate", "stderr")}, indent=2) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())


class PyMatchingDecoder:
    """Batch decoding of a :class:`MatchingGraph` with the sparse-blossom library."""

    def __init__(self, graph: MatchingGraph):
        import pymatching

        m = pymatching.Matching()
        for e in graph.edges:
            faults = {o for o in range(graph.observable_count) if e.observables >> o & 1}
            if e.v == graph.boundary:
                m.add_boundary_edge(e.u, fault_ids=faults, weight=e.weight, error_probability=e.probability)
            else:
                m.add_edge(e.u, e.v, fault_ids=faults, weight=e.weight, error_probability=e.probability)
        if graph.detector_count:
            m.ensure_num_fault_ids(graph.observable_count)
        self._m = m
        self.graph = graph

    def decode_batch(self, syndromes: np.ndarray, return_weights: bool = False):
        """Predictions ``(n, O)``; with ``return_weights`` also the matched weight per shot."""
        D = self.graph.detector_count
        n = syndromes.shape[0]
        O = self.graph.observable_count
        if n == 0 or (O == 0 and not return_weights):
            pred = np.zeros((n, O), dtype=bool)
            return (pred, np.zeros(n)) if return_weights else pred
        if self._m.num_detectors < D:
            # detectors without any edge never fire in consistent data; pad the graph view
            syndromes = syndromes[:, : self._m.num_detectors]
        out = self._m.decode_batch(syndromes.astype(np.uint8), return_weights=return_weights)
        if return_weights:
            out, weights = out
        pred = np.asarray(out, dtype=bool).reshape(n, -1)[:, :O]
        return (pred, np.asarray(weights, dtype=float)) if return_weights else pred


class ExactDecoder:
    """Per-shot exact matching (subset DP / blossom) with a syndrome cache."""

    def __init__(self, graph: MatchingGraph):
        self.graph = graph
        self._cache: dict[bytes, np.ndarray] = {}

    def decode_batch(self, syndromes: np.ndarray) -> np.ndarray:
        out = np.zeros((syndromes.shape[0], self.graph.observable_count), dtype=bool)
        for s, row in enumerate(syndromes):
            key = np.packbits(row).tobytes()
            pred = self._cache.get(key)
            if pred is None:
                pred = self._cache[key] = decode_shot(self.graph, row)
            out[s] = pred
        return out


def make_decoder(dem: DEM, backend: str = "pymatching"):
    graph = MatchingGraph(decompose_hyperedges(dem))
    if backend == "pymatching":
        return PyMatchingDecoder(graph)
    if backend == "exact":
        return ExactDecoder(graph)
    raise ValueError(f"unknown decoder backend {backend!r}")


def logical_error_rate(dem: DEM, data: DetectionData, backend: str = "pymatching") -> DecodeReport:
    """Decode every shot of ``data`` with the matching graph of ``dem``.

    Hyperedges are decomposed first. A shot fails when any predicted
    observable differs from the recorded one.
    """
    if data.detector_count != dem.detector_count or data.observable_count != dem.observable_count:
        raise ValueError(
            f"data widths ({data.detector_count}, {data.observable_count}) do not match the DEM "
            f"({dem.detector_count}, {dem.observable_count})"
        )
    dec = make_decoder(dem, backend)
    failures = 0
    per_obs = np.zeros(data.observable_count, dtype=np.int64)
    for start in range(0, data.shots, CHUNK):
        n = min(CHUNK, data.shots - start)
        w0, w1 = start >> 6, (start + n + 63) >> 6
        dets = unpack_rows(data.detectors[:, w0:w1], n).T
        obs = unpack_rows(data.observables[:, w0:w1], n).T
        wrong = dec.decode_batch(dets) != obs
        failures += int(wrong.any(axis=1).sum())
        per_obs += wrong.sum(axis=0)
    return DecodeReport.from_counts(data.shots, failures, per_obs.tolist())
