"""Replace hyperedges by XOR-equivalent sets of graph-like mechanisms."""

from __future__ import annotations

from itertools import product

from ..refdem.model import DEM, Signature, format_signature


class DecompositionError(ValueError):
    pass


def _partitions(items: tuple[int, ...]):
    """Partitions of ``items`` into blocks of size 1 or 2 (blocks keep order)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for tail in _partitions(rest):
        yield [(first,)] + tail
    for k in range(len(rest)):
        pair = (first, rest[k])
        for tail in _partitions(rest[:k] + rest[k + 1:]):
            yield [pair] + tail


def _mask(obs) -> int:
    m = 0
    for o in obs:
        m ^= 1 << o
    return m


def _unmask(m: int) -> tuple[int, ...]:
    return tuple(i for i in range(m.bit_length()) if m >> i & 1)


def decomposition_of(signature: Signature, available: dict[tuple[int, ...], list[int]],
                     allow_new: bool = True) -> list[Signature] | None:
    """Graph-like signatures XOR-ing to ``signature``, built from ``available``.

    ``available`` maps graph-like detector sets to the observable masks they
    occur with. Tried in turn, fewest components first within each tier and
    the first partition in a fixed enumeration order among equals:

    1. existing signatures only;
    2. existing detector sets, observable mask fixed up on the last block;
    3. (``allow_new``) the partition needing the fewest new detector sets, the
       residual observable mask carried by its first new block.
    """
    dets, obs = signature
    target = _mask(obs)
    parts = sorted(_partitions(tuple(dets)), key=len)
    for blocks in parts:
        if any(b not in available for b in blocks):
            continue
        for masks in product(*(available[b] for b in blocks)):
            acc = 0
            for m in masks:
                acc ^= m
            if acc == target:
                return [(b, _unmask(m)) for b, m in zip(blocks, masks)]
    for blocks in parts:
        if any(b not in available for b in blocks):
            continue
        head = [available[b][0] for b in blocks[:-1]]
        acc = 0
        for m in head:
            acc ^= m
        masks = head + [acc ^ target]
        return [(b, _unmask(m)) for b, m in zip(blocks, masks)]
    if not allow_new:
        return None
    blocks = min(parts, key=lambda bl: (sum(b not in available for b in bl), len(bl)))
    masks = [available[b][0] if b in available else 0 for b in blocks]
    acc = 0
    for m in masks:
        acc ^= m
    first_new = next(k for k, b in enumerate(blocks) if b not in available)
    masks[first_new] ^= acc ^ target
    return [(b, _unmask(m)) for b, m in zip(blocks, masks)]


def decompose_hyperedges(dem: DEM, allow_new: bool = True) -> DEM:
    """Graph-like DEM where every hyperedge is split into graph-like parts.

    Existing edges are preferred (see :func:`decomposition_of`); with
    ``allow_new=False`` a hyperedge that cannot be built from existing
    detector sets raises :class:`DecompositionError`. Each component gets the
    hyperedge's probability and is merged into any mechanism with the same
    signature by exclusive combination. The choice depends only on the
    signature set, so DEMs with equal structure decompose identically.
    """
    available: dict[tuple[int, ...], list[int]] = {}
    for m in dem:
        if len(m.detectors) <= 2:
            available.setdefault(m.detectors, []).append(_mask(m.observables))
    for k in available:
        available[k] = sorted(set(available[k]))
    out = DEM(dem.detector_count, dem.observable_count)
    for m in dem:
        if len(m.detectors) <= 2:
            out.add(m.detectors, m.observables, m.probability)
    for m in dem:
        if len(m.detectors) <= 2:
            continue
        parts = decomposition_of(m.signature, available, allow_new)
        if parts is None:
            raise DecompositionError(
                f"no decomposition of error({m.probability!r}) {format_signature(m.signature)} into existing edges"
            )
        for d, o in parts:
            out.add(d, o, m.probability)
    return out
