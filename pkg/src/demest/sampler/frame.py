"""Bit-packed Pauli-frame simulation.

The frame lives in one ``(2Q, W)`` word array: rows ``0..Q-1`` hold X
components, rows ``Q..2Q-1`` Z components. Noise channels are compiled into
tables of frame rows per independent component, and firing events are drawn
over the flattened ``(component, shot)`` index space by geometric gaps, which
is an exact Bernoulli process and touches only the events that occur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import kernels
from ..circuit.channels import PAULIS_1Q, PAULIS_2Q, decompose_depol1, decompose_depol2
from ..circuit.ir import Circuit, record_targets
from .data import mask_tail, n_words

_PAULI_ROWS = {"X": (True, False), "Y": (True, True), "Z": (False, True), "I": (False, False)}


@dataclass(frozen=True)
class _NoiseOp:
    p: float
    rows: np.ndarray  # (K, 4) frame or record rows per component, -1 padded
    offset: int  # index of the first component in circuit.noise_components()
    on_records: bool

    @property
    def count(self) -> int:
        return self.rows.shape[0]


def bernoulli_positions(rng: np.random.Generator, p: float, total: int) -> np.ndarray:
    """Sorted indices in ``[0, total)`` of independent Bernoulli(p) successes."""
    if total <= 0 or p <= 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1:
        return np.arange(total, dtype=np.int64)
    if p > 0.2:
        return np.flatnonzero(rng.random(total) < p).astype(np.int64)
    if p < 1e-15:
        # geometric gaps would overflow int64; draw the count, then the positions
        k = int(rng.binomial(total, p))
        return np.sort(rng.choice(total, size=k, replace=False)).astype(np.int64)
    mean = total * p
    chunks = []
    last = -1
    while True:
        m = int(mean + 6 * math.sqrt(mean) + 16)
        pos = last + np.cumsum(rng.geometric(p, size=m), dtype=np.int64)
        if pos[-1] >= total:
            chunks.append(pos[pos < total])
            break
        chunks.append(pos)
        last = int(pos[-1])
        mean = (total - 1 - last) * p
    return np.concatenate(chunks)


# A noise source maps (noise op, shots) to flat event positions in [0, K * shots),
# position = component * shots + shot.
NoiseSource = Callable[[_NoiseOp, int], np.ndarray]


class FrameSimulator:
    """Compiled form of a circuit for repeated batch simulation."""

    def __init__(self, circuit: Circuit):
        circuit.validate()
        self.circuit = circuit
        Q = self.qubit_count = circuit.qubit_count
        self.measurement_count = circuit.measurement_count
        self.ops: list[tuple] = []
        n_meas = 0
        n_comp = 0
        for ins in circuit.instructions:
            name, t = ins.name, np.array(ins.targets, dtype=np.int64)
            if name == "R":
                self.ops.append(("R", t))
            elif name == "H":
                self.ops.append(("H", t))
            elif name == "CX":
                c, tt = t[0::2], t[1::2]
                disjoint = len(set(ins.targets)) == len(ins.targets)
                self.ops.append(("CX", c, tt, disjoint))
            elif name == "M":
                self.ops.append(("M", t, n_meas))
                p = ins.probability
                if p > 0:
                    rows = np.full((len(t), 4), -1, dtype=np.int64)
                    rows[:, 0] = np.arange(n_meas, n_meas + len(t))
                    self.ops.append(("N", _NoiseOp(p, rows, n_comp, True)))
                    n_comp += len(t)
                n_meas += len(t)
            elif ins.is_noise:
                p = ins.probability
                if p == 0:
                    continue
                if name == "DEPOLARIZE1":
                    pp = decompose_depol1(p)
                    comps = [((int(q), s),) for q in t for s in PAULIS_1Q]
                elif name == "DEPOLARIZE2":
                    pp = decompose_depol2(p)
                    comps = [((a, sa), (b, sb)) for a, b in ins.pairs for sa, sb in PAULIS_2Q]
                else:
                    pp = p
                    comps = [((int(q), name[0]),) for q in t]
                rows = np.full((len(comps), 4), -1, dtype=np.int64)
                for k, comp in enumerate(comps):
                    slot = 0
                    for q, s in comp:
                        hx, hz = _PAULI_ROWS[s]
                        if hx:
                            rows[k, slot] = q
                            slot += 1
                        if hz:
                            rows[k, slot] = Q + q
                            slot += 1
                if pp > 0:
                    self.ops.append(("N", _NoiseOp(pp, rows, n_comp, False)))
                    n_comp += len(comps)
        self.component_count = n_comp
        dets, obs = record_targets(circuit)
        self.detector_records = [np.array(r, dtype=np.int64) for r in dets]
        self.observable_records = [np.array(r, dtype=np.int64) for r in obs]

    def run(self, shots: int, noise: NoiseSource, rng: np.random.Generator | None = None):
        """Simulate ``shots`` shots; returns packed ``(detectors, observables)``.

        With ``rng`` given, the Z frame of freshly reset qubits and the frame
        of measured qubits are randomized (the gauge freedom of the state), which
        makes any non-deterministic detector visibly random.
        """
        Q, W = self.qubit_count, n_words(shots)
        frame = np.zeros((2 * Q, W), dtype=np.uint64)
        rec = np.zeros((self.measurement_count, W), dtype=np.uint64)
        flat_frame = frame.reshape(-1)
        flat_rec = rec.reshape(-1)
        bits_per_row = W * 64

        def gauge(n):
            return rng.integers(0, np.iinfo(np.uint64).max, size=(n, W), dtype=np.uint64, endpoint=True)

        for op in self.ops:
            kind = op[0]
            if kind == "N":
                nop: _NoiseOp = op[1]
                pos = noise(nop, shots)
                if pos.size == 0:
                    continue
                comp, shot = np.divmod(pos, shots)
                rows = nop.rows[comp]
                keep = rows >= 0
                flat = (rows * bits_per_row + shot[:, None])[keep]
                kernels.xor_bits(flat_rec if nop.on_records else flat_frame, np.ascontiguousarray(flat, dtype=np.int64))
            elif kind == "CX":
                _, c, t, disjoint = op
                if disjoint:
                    frame[t] ^= frame[c]
                    frame[Q + c] ^= frame[Q + t]
                else:
                    for a, b in zip(c, t):
                        frame[b] ^= frame[a]
                        frame[Q + a] ^= frame[Q + b]
            elif kind == "H":
                t = op[1]
                tmp = frame[t].copy()
                frame[t] = frame[Q + t]
                frame[Q + t] = tmp
            elif kind == "R":
                t = op[1]
                frame[t] = 0
                frame[Q + t] = gauge(len(t)) if rng is not None else 0
            elif kind == "M":
                _, t, start = op
                rec[start:start + len(t)] = frame[t]
                if rng is not None:
                    frame[Q + t] ^= gauge(len(t))
        dets = np.zeros((len(self.detector_records), W), dtype=np.uint64)
        for k, r in enumerate(self.detector_records):
            if len(r):
                dets[k] = np.bitwise_xor.reduce(rec[r], axis=0)
        obs = np.zeros((len(self.observable_records), W), dtype=np.uint64)
        for k, r in enumerate(self.observable_records):
            if len(r):
                obs[k] = np.bitwise_xor.reduce(rec[r], axis=0)
        mask_tail(dets, shots)
        mask_tail(obs, shots)
        return dets, obs


def random_noise(rng: np.random.Generator) -> NoiseSource:
    def source(nop: _NoiseOp, shots: int) -> np.ndarray:
        return bernoulli_positions(rng, nop.p, nop.count * shots)

    return source


def lane_noise(lanes: list[list[int]]) -> NoiseSource:
    """Deterministic injection: shot ``s`` carries exactly the components in ``lanes[s]``."""
    comp_lanes: dict[int, list[int]] = {}
    for s, comps in enumerate(lanes):
        for g in comps:
            comp_lanes.setdefault(g, []).append(s)

    def source(nop: _NoiseOp, shots: int) -> np.ndarray:
        out = []
        for local in range(nop.count):
            for s in comp_lanes.get(nop.offset + local, ()):
                out.append(local * shots + s)
        return np.array(sorted(out), dtype=np.int64)

    return source
