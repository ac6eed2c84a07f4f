"""Exact outcome distributions of small noisy circuits.

Every independent noise component is pushed forward through the circuit by the
frame simulator in its own lane (no randomness), which yields its
detector/observable flip signature. Since Pauli propagation is linear over
GF(2), the signature of any error subset is the XOR of its members, and the
exact distribution is the independent-sum of the components.
"""

from __future__ import annotations

import numpy as np

from ..circuit.ir import Circuit
from .data import unpack_rows
from .frame import FrameSimulator, lane_noise

MAX_CONFIGURATIONS = 1 << 22


class EnumerationTooLarge(MemoryError):
    pass


class ExactDistribution:
    """Map ``(detector mask, observable mask) -> probability``.

    Masks are Python ints, bit ``i`` for detector/observable ``i``.
    ``leftover`` is the probability mass of the error subsets dropped by a
    weight truncation (0 for a complete enumeration).
    """

    def __init__(self, probs: dict[tuple[int, int], float], detector_count: int, observable_count: int, leftover: float = 0.0):
        self.probs = probs
        self.detector_count = detector_count
        self.observable_count = observable_count
        self.leftover = leftover

    def __getitem__(self, key) -> float:
        return self.probs.get(key, 0.0)

    def __len__(self) -> int:
        return len(self.probs)

    def items(self):
        return self.probs.items()

    def total(self) -> float:
        return sum(self.probs.values())

    def prob_all(self, detectors=(), observables=()) -> float:
        """Probability that every listed detector and observable fires."""
        dm = sum(1 << i for i in set(detectors))
        om = sum(1 << i for i in set(observables))
        return sum(p for (d, o), p in self.probs.items() if d & dm == dm and o & om == om)

    def detector_mean(self, i: int) -> float:
        return self.prob_all((i,))

    def pattern_probabilities(self, detectors) -> np.ndarray:
        """Distribution of the exact on/off pattern over ``detectors`` (others marginalized)."""
        out = np.zeros(1 << len(detectors))
        for (d, _), p in self.probs.items():
            x = 0
            for j, i in enumerate(detectors):
                if d >> i & 1:
                    x |= 1 << j
            out[x] += p
        return out


def component_signatures(circuit: Circuit) -> list[tuple[int, ...]]:
    """Forward-propagated ``(detector mask, observable mask)`` of every noise component."""
    sim = FrameSimulator(circuit)
    k = sim.component_count
    if k == 0:
        return []
    dets, obs = sim.run(k, lane_noise([[g] for g in range(k)]))
    d_bits = unpack_rows(dets, k)  # (D, k)
    o_bits = unpack_rows(obs, k)
    weights_d = [1 << i for i in range(d_bits.shape[0])]
    weights_o = [1 << i for i in range(o_bits.shape[0])]
    out = []
    for g in range(k):
        dm = sum(w for w, b in zip(weights_d, d_bits[:, g]) if b)
        om = sum(w for w, b in zip(weights_o, o_bits[:, g]) if b)
        out.append((dm, om))
    return out


def _gf2_rank(vectors) -> int:
    basis: dict[int, int] = {}
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def enumerate_exact(circuit: Circuit, max_error_locations: int | None = None) -> ExactDistribution:
    """Exact joint distribution of detector and observable flips.

    With ``max_error_locations = k`` only error subsets of at most ``k``
    components are summed and the dropped mass is reported as ``leftover``.
    Raises :class:`EnumerationTooLarge` when the outcome space explodes.
    """
    comps = circuit.noise_components()
    sigs = component_signatures(circuit)
    D, O = circuit.detector_count, circuit.observable_count
    if max_error_locations is None:
        # the support is the GF(2) span of the signatures: refuse before allocating
        rank = _gf2_rank([dm | om << D for dm, om in sigs])
        if rank > MAX_CONFIGURATIONS.bit_length() - 1:
            raise EnumerationTooLarge(
                f"2^{rank} reachable outcome configurations exceed {MAX_CONFIGURATIONS}; pass max_error_locations"
            )
        dist: dict[tuple[int, int], float] = {(0, 0): 1.0}
        for (dm, om), c in zip(sigs, comps):
            p = c.probability
            nxt: dict[tuple[int, int], float] = {}
            for (d, o), q in dist.items():
                nxt[(d, o)] = nxt.get((d, o), 0.0) + q * (1 - p)
                key = (d ^ dm, o ^ om)
                nxt[key] = nxt.get(key, 0.0) + q * p
            dist = nxt
            if len(dist) > MAX_CONFIGURATIONS:
                raise EnumerationTooLarge(
                    f"more than {MAX_CONFIGURATIONS} outcome configurations; pass max_error_locations"
                )
        return ExactDistribution(dist, D, O, 0.0)
    k = int(max_error_locations)
    if k < 0:
        raise ValueError("max_error_locations must be non-negative")
    # state: (d, o, weight) -> probability, with the (1-p) factors of every
    # component folded in as it is visited
    layered: dict[tuple[int, int, int], float] = {(0, 0, 0): 1.0}
    for (dm, om), c in zip(sigs, comps):
        p = c.probability
        nxt: dict[tuple[int, int, int], float] = {}
        for (d, o, w), q in layered.items():
            nxt[(d, o, w)] = nxt.get((d, o, w), 0.0) + q * (1 - p)
            if w < k:
                key = (d ^ dm, o ^ om, w + 1)
                nxt[key] = nxt.get(key, 0.0) + q * p
        layered = nxt
        if len(layered) > MAX_CONFIGURATIONS:
            raise EnumerationTooLarge(f"more than {MAX_CONFIGURATIONS} truncated states")
    dist = {}
    for (d, o, _), q in layered.items():
        dist[(d, o)] = dist.get((d, o), 0.0) + q
    return ExactDistribution(dist, D, O, max(0.0, 1.0 - sum(dist.values())))
