"""Exact reference DEM of a noisy circuit by backward sensitivity propagation.

Walking the circuit from the end, ``sx[q]`` / ``sz[q]`` hold the set of
detectors and observables (as a Python-int bitmask) that an X / Z error on
qubit ``q`` at the current point would flip. A noise component's signature is
then the XOR of the masks of its Paulis at its position; no frame simulation
is involved, which keeps this route independent of the sampler.
"""

from __future__ import annotations

from ..circuit.channels import PAULIS_1Q, PAULIS_2Q, decompose_depol1, decompose_depol2
from ..circuit.ir import Circuit, record_targets
from .model import DEM


def output_masks(circuit: Circuit) -> list[int]:
    """Per measurement record, the mask of detectors (bits ``0..D-1``) and observables (bits ``D..``) using it."""
    dets, obs = record_targets(circuit)
    D = len(dets)
    rec = [0] * circuit.measurement_count
    for k, rs in enumerate(dets):
        for r in rs:
            rec[r] ^= 1 << k
    for k, rs in enumerate(obs):
        for r in rs:
            rec[r] ^= 1 << (D + k)
    return rec


def component_masks(circuit: Circuit) -> list[tuple[int, float]]:
    """``(output mask, probability)`` of every independent noise component."""
    circuit.validate()
    rec_sens = output_masks(circuit)
    Q = circuit.qubit_count
    sx = [0] * Q
    sz = [0] * Q
    n_meas = circuit.measurement_count
    out: list[tuple[int, float]] = []
    for ins in reversed(circuit.instructions):
        name, t = ins.name, ins.targets
        if name == "M":
            n_meas -= len(t)
            for j in reversed(range(len(t))):
                q, r = t[j], n_meas + j
                if ins.probability > 0:
                    out.append((rec_sens[r], ins.probability))
                sx[q] ^= rec_sens[r]
        elif name == "R":
            for q in t:
                sx[q] = 0
                sz[q] = 0
        elif name == "H":
            for q in t:
                sx[q], sz[q] = sz[q], sx[q]
        elif name == "CX":
            for c, tt in reversed(ins.pairs):
                sx[c] ^= sx[tt]
                sz[tt] ^= sz[c]
        elif ins.is_noise:
            p = ins.probability
            if p == 0:
                continue
            chunk = []
            if name == "DEPOLARIZE1":
                pp = decompose_depol1(p)
                for q in t:
                    for s in PAULIS_1Q:
                        chunk.append((_mask(sx, sz, q, s), pp))
            elif name == "DEPOLARIZE2":
                pp = decompose_depol2(p)
                for a, b in ins.pairs:
                    for sa, sb in PAULIS_2Q:
                        chunk.append((_mask(sx, sz, a, sa) ^ _mask(sx, sz, b, sb), pp))
            else:
                for q in t:
                    chunk.append((_mask(sx, sz, q, name[0]), p))
            # the final reverse restores circuit order within the instruction too
            out.extend(reversed(chunk))
    out.reverse()
    return out


def _mask(sx, sz, q, s) -> int:
    if s == "X":
        return sx[q]
    if s == "Z":
        return sz[q]
    if s == "Y":
        return sx[q] ^ sz[q]
    return 0


def basis_indices(circuit: Circuit, basis: str | None) -> tuple[list[int], list[int]]:
    """Detector and observable indices carrying ``basis`` as tag (all when ``basis`` is None)."""
    dtags, otags = circuit.detector_tags(), circuit.observable_tags()
    if basis is None:
        return list(range(len(dtags))), list(range(len(otags)))
    basis = basis.upper()
    return [i for i, t in enumerate(dtags) if t == basis], [i for i, t in enumerate(otags) if t == basis]


def derive_dem(circuit: Circuit, basis: str | None = None) -> DEM:
    """Exact DEM of ``circuit``.

    With ``basis`` ("Z" or "X") the model is restricted to the detectors and
    observables tagged with that basis and renumbered in order; restricting
    every signature is exactly the marginal model of those outputs, so a Y
    error falls apart into its parts in each basis.
    """
    D = circuit.detector_count
    det_idx, obs_idx = basis_indices(circuit, basis)
    det_pos = {d: k for k, d in enumerate(det_idx)}
    obs_pos = {o: k for k, o in enumerate(obs_idx)}
    dem = DEM(len(det_idx), len(obs_idx))
    cache: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = {}
    for mask, p in component_masks(circuit):
        if mask == 0:
            continue
        sig = cache.get(mask)
        if sig is None:
            dets, obs = [], []
            m, i = mask, 0
            while m:
                if m & 1:
                    if i < D:
                        if i in det_pos:
                            dets.append(det_pos[i])
                    elif i - D in obs_pos:
                        obs.append(obs_pos[i - D])
                m >>= 1
                i += 1
            sig = cache[mask] = (tuple(dets), tuple(obs))
        dem.add(sig[0], sig[1], p)
    dem = dem.drop_zero()
    dem.detector_ids = det_idx
    dem.observable_ids = obs_idx
    return dem


def dem_distribution(dem: DEM) -> dict[tuple[int, int], float]:
    """Outcome distribution implied by a DEM, keyed like :class:`ExactDistribution`."""
    dist = {(0, 0): 1.0}
    for m in dem:
        dm = sum(1 << d for d in m.detectors)
        om = sum(1 << o for o in m.observables)
        p = m.probability
        nxt: dict[tuple[int, int], float] = {}
        for (d, o), q in dist.items():
            nxt[(d, o)] = nxt.get((d, o), 0.0) + q * (1 - p)
            k = (d ^ dm, o ^ om)
            nxt[k] = nxt.get(k, 0.0) + q * p
        dist = nxt
    return dist
