"""Splitting detector-equivalent mechanisms by their observable flips.

Mechanisms with the same detector set but different observable masks are
indistinguishable through detector statistics; only their XOR-combination
``alpha`` is known. Whole-shot patterns separate them: the probability that a
shot shows exactly the detector set ``S`` (every other detector off) with
observable mask ``o`` is, up to subsets of ``k`` mechanisms,
``Z0 * sum_C prod_{e in C} p_e / (1 - p_e)`` over mechanism sets ``C`` whose
signatures XOR to ``(S, o)``, where ``Z0 = prod_all (1 - p)``. One member of
each group is eliminated through ``alpha`` and the rest are fitted jointly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from ..refdem.model import Signature, xor_combine
from ..sampler.data import DetectionData
from ..sampler.exact import ExactDistribution
from .closed_form import Flags, subtract_hyperedge
from .skeleton import DemSkeleton, DetSet

DEFAULT_DISAMBIGUATION_ORDER = 2


def _mask(items) -> int:
    m = 0
    for i in items:
        m |= 1 << i
    return m


def shot_pattern_frequencies(source, patterns: list[tuple[DetSet, tuple[int, ...]]]) -> np.ndarray:
    """Frequency of shots whose detectors are exactly ``S`` and observables exactly ``o``."""
    out = np.zeros(len(patterns))
    if isinstance(source, ExactDistribution):
        want = {(_mask(s), _mask(o)): k for k, (s, o) in enumerate(patterns)}
        for key, p in source.items():
            k = want.get(key)
            if k is not None:
                out[k] += p
        return out
    if not isinstance(source, DetectionData):
        raise TypeError("expected DetectionData or ExactDistribution")
    data = source
    if data.shots == 0:
        return out
    D = data.detector_count
    cache: dict[DetSet, np.ndarray] = {}
    for k, (dets, obs) in enumerate(patterns):
        exact = cache.get(dets)
        if exact is None:
            inside = set(dets)
            others = [i for i in range(D) if i not in inside]
            acc = np.full(data.detectors.shape[1], np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
            for i in dets:
                acc &= data.detectors[i]
            if others:
                acc &= ~np.bitwise_or.reduce(data.detectors[others], axis=0)
            cache[dets] = exact = acc
        acc = exact.copy()
        for j in range(data.observable_count):
            acc &= data.observables[j] if j in obs else ~data.observables[j]
        # padding bits may survive the negations; they sit past the last shot
        rem = data.shots & 63
        if rem and acc.size:
            acc[-1] &= np.uint64((1 << rem) - 1)
        out[k] = float(np.bitwise_count(acc).sum()) / data.shots
    return out


@dataclass
class DisambiguationResult:
    probabilities: dict[Signature, float]
    residual: float
    success: bool
    observed: np.ndarray
    patterns: list


def _combos(target: int, sig_masks: list[int], by_mask: dict[int, list[int]], order: int) -> list[tuple[int, ...]]:
    """Index sets (ascending) of at most ``order`` mechanisms whose detector masks XOR to ``target``."""
    out = []

    def rec(start, acc, chosen, depth):
        need = target ^ acc
        for j in by_mask.get(need, ()):
            if j >= start:
                out.append(chosen + (j,))
        if depth + 1 < order:
            for i in range(start, len(sig_masks)):
                rec(i + 1, acc ^ sig_masks[i], chosen + (i,), depth + 1)

    if order >= 1:
        rec(0, 0, (), 0)
    return out


def disambiguate(
    alphas: dict[DetSet, float],
    known: dict[Signature, float],
    source,
    skeleton: DemSkeleton,
    order: int = DEFAULT_DISAMBIGUATION_ORDER,
    bounds=(1e-12, 0.6),
    flags: Flags | None = None,
    max_evaluations: int = 10_000,
) -> DisambiguationResult:
    """Split every ambiguous group of ``skeleton`` given its combined ``alpha``.

    ``known`` holds the current estimates of all other mechanisms.
    """
    groups = [g for g in skeleton.ambiguous if g in alphas]
    sigs = list(skeleton.signatures)
    index = {s: k for k, s in enumerate(sigs)}
    det_masks = [_mask(d) for d, _ in sigs]
    obs_masks = [_mask(o) for _, o in sigs]
    by_mask: dict[int, list[int]] = {}
    for k, m in enumerate(det_masks):
        by_mask.setdefault(m, []).append(k)

    # free parameters: every member but the first of each group
    free: list[int] = []
    eliminated: list[tuple[int, list[int], float]] = []
    for g in groups:
        members = [index[(g, o)] for o in sorted(skeleton.groups[g])]
        free.extend(members[1:])
        eliminated.append((members[0], members[1:], alphas[g]))

    O = skeleton.observable_count
    obs_values = list(range(1 << O)) if O <= 4 else sorted({m for m in obs_masks})
    patterns, combos = [], []
    for g in groups:
        gm = _mask(g)
        cs = _combos(gm, det_masks, by_mask, order)
        for o in obs_values:
            patterns.append((g, tuple(j for j in range(O) if o >> j & 1)))
            combos.append([c for c in cs if _xor_obs(c, obs_masks) == o])
    observed = shot_pattern_frequencies(source, patterns)

    base = np.array([known.get(s, 0.0) for s in sigs], dtype=float)
    lo, hi = bounds

    def full_probs(q):
        p = base.copy()
        p[free] = q
        for first, rest, alpha in eliminated:
            acc = 0.0
            for r in rest:
                acc = xor_combine(acc, p[r])
            p[first] = subtract_hyperedge(alpha, acc) if acc < 0.5 else 0.0
        return np.clip(p, 0.0, 1.0 - 1e-15)

    def model(q):
        p = full_probs(q)
        z0 = np.exp(np.sum(np.log1p(-p)))
        r = p / (1.0 - p)
        return np.array([z0 * sum(np.prod(r[list(c)]) for c in cs) for cs in combos])

    if free:
        q_hi = np.array([max(min(hi, alphas[g]), lo * 2) for g, (_, rest, _) in zip(groups, eliminated) for _ in rest])
        # start from the observed single-mechanism patterns, split in proportion
        x0 = []
        for g, (first, rest, alpha) in zip(groups, eliminated):
            tot = sum(observed[k] for k, (pg, _) in enumerate(patterns) if pg == g) or 1.0
            for r in rest:
                o = sigs[r][1]
                share = sum(observed[k] for k, (pg, po) in enumerate(patterns) if pg == g and po == o) / tot
                x0.append(alpha * share)
        x0 = np.clip(np.array(x0), lo, q_hi - 1e-15)
        x0 = np.maximum(x0, lo)
        res = least_squares(
            lambda q: model(q) - observed,
            x0,
            bounds=(np.full(len(free), lo), q_hi),
            method="trf",
            x_scale="jac",
            xtol=1e-15,
            ftol=1e-15,
            gtol=None,  # the gradient test stops early at tiny probabilities
            max_nfev=max_evaluations,
        )
        q, residual, success = res.x, float(np.sqrt(2 * res.cost)), bool(res.status > 0)
    else:
        q, residual, success = np.zeros(0), 0.0, True
    p = full_probs(q)
    for k, (g, _) in enumerate(patterns):
        if observed[k] == 0 and alphas.get(g, 0.0) > 0 and flags is not None and not any(observed[j] for j, (pg, _) in enumerate(patterns) if pg == g):
            flags.note(g, "no matching shot patterns for disambiguation")
    out = {sigs[k]: float(p[k]) for g in groups for k in [index[(g, o)] for o in skeleton.groups[g]]}
    return DisambiguationResult(out, residual, success, observed, patterns)


def _xor_obs(c, obs_masks) -> int:
    o = 0
    for k in c:
        o ^= obs_masks[k]
    return o


def disambiguate_boundary_logical(alpha: float, data, skeleton: DemSkeleton, detector: int,
                                  known: dict[Signature, float] | None = None,
                                  order: int = DEFAULT_DISAMBIGUATION_ORDER) -> tuple[float, float]:
    """Split ``alpha`` of detector ``detector`` into ``(p for {D_j}, q for {D_j, L_0})``."""
    g = (detector,)
    if g not in skeleton.groups or len(skeleton.groups[g]) < 2:
        raise ValueError(f"detector {detector} has no boundary/logical ambiguity in the skeleton")
    res = disambiguate({g: alpha}, dict(known or {}), data, _restricted(skeleton, g), order)
    return res.probabilities[(g, ())], res.probabilities[(g, (0,))]


def _restricted(skeleton: DemSkeleton, group: DetSet) -> DemSkeleton:
    """Same skeleton, but only ``group`` is treated as ambiguous."""
    return DemSkeleton(skeleton.detector_count, skeleton.observable_count, skeleton.signatures,
                       skeleton.extra_regions, [group])
