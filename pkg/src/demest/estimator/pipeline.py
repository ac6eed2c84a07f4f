"""End-to-end DEM estimation from detection events."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..refdem.model import DEM, Signature
from ..sampler.data import DetectionData
from ..sampler.exact import ExactDistribution
from .closed_form import Flags, boundary_from_moment, pair_from_moments, subtract_hyperedge
from .correlators import CorrelatorTable, accumulate, table_from_distribution
from .disambiguation import DEFAULT_DISAMBIGUATION_ORDER, DisambiguationResult, disambiguate
from .regions import DEFAULT_BOUNDS, DEFAULT_ORDER, RegionSolution, RegionSystem, solve_region
from .skeleton import DemSkeleton, DetSet


@dataclass
class EstimatorOptions:
    region_order: int = DEFAULT_ORDER
    disambiguation_order: int = DEFAULT_DISAMBIGUATION_ORDER
    bounds: tuple[float, float] = DEFAULT_BOUNDS
    max_evaluations: int = 10_000
    discover_regions: bool = False
    # significance (in Poisson standard deviations) a discovered triple must reach
    discovery_threshold: float = 5.0


@dataclass
class EstimationReport:
    flags: Flags = field(default_factory=Flags)
    regions: list[RegionSolution] = field(default_factory=list)
    disambiguation: DisambiguationResult | None = None
    # combined probability of each detector set (XOR over observable masks)
    alphas: dict[DetSet, float] = field(default_factory=dict)
    discovered: list[tuple[DetSet, float]] = field(default_factory=list)


def _supersets(groups: list[DetSet]) -> dict[DetSet, list[DetSet]]:
    sets = {g: frozenset(g) for g in groups}
    return {g: [h for h in groups if len(h) > len(g) and sets[g] < sets[h]] for g in groups}


def estimate_from_table(table: CorrelatorTable, skeleton: DemSkeleton, options: EstimatorOptions | None = None,
                        source=None) -> tuple[DEM, EstimationReport]:
    """Estimate every mechanism of ``skeleton`` from accumulated coincidences.

    Order: hyperedges (largest first, each corrected for larger hyperedges
    containing it), bulk pairs corrected for the hyperedges containing them,
    boundaries with the corrected incident probabilities, then the split of
    detector-equivalent mechanisms by observable mask (needs ``source``, the
    detection data or an exact distribution).
    """
    opt = options or EstimatorOptions()
    rep = EstimationReport()
    flags = rep.flags
    alpha = rep.alphas
    hyper = skeleton.hyperedge_groups
    above = _supersets(hyper)

    for region in skeleton.regions:
        system = RegionSystem.from_skeleton(skeleton, region, opt.region_order, opt.bounds)
        observed = table.region_patterns(region)[1:]
        system.observed = observed
        sol = solve_region(system, observed, opt.bounds, opt.max_evaluations)
        rep.regions.append(sol)
        if not sol.success:
            flags.note(region, f"region solve did not converge: {sol.message}")
        if region not in skeleton.groups:
            continue
        p = sol.full
        for big in above[region]:
            p = subtract_hyperedge(p, alpha[big], flags, region)
        alpha[region] = p

    hyper_sets = [(frozenset(h), h) for h in hyper]
    for i, j in skeleton.pairs:
        p = pair_from_moments(table.moment((i,)), table.moment((j,)), table.moment((i, j)), flags, (i, j))
        for hs, h in hyper_sets:
            if i in hs and j in hs:
                p = subtract_hyperedge(p, alpha[h], flags, (i, j))
        alpha[(i, j)] = p

    incident: dict[int, list[float]] = {}
    for g, p in alpha.items():
        for d in g:
            incident.setdefault(d, []).append(p)
    for (i,) in [g for g in skeleton.groups if len(g) == 1]:
        alpha[(i,)] = boundary_from_moment(table.moment((i,)), incident.get(i, []), flags, (i,))

    probs: dict[Signature, float] = {}
    for g, obs_list in skeleton.groups.items():
        if g and len(obs_list) == 1:
            probs[(g, obs_list[0])] = alpha[g]
    if skeleton.ambiguous:
        if source is None:
            raise ValueError("observable-ambiguous mechanisms need the detection data to be split")
        res = disambiguate(alpha, probs, source, skeleton, opt.disambiguation_order, opt.bounds, flags, opt.max_evaluations)
        rep.disambiguation = res
        probs.update(res.probabilities)
    # observable-only signatures are invisible to detector statistics
    for g, obs_list in skeleton.groups.items():
        if not g:
            for o in obs_list:
                probs[(g, o)] = 0.0
                flags.note(o, "observable-only mechanism cannot be estimated")
    return skeleton.to_dem(probs), rep


def estimate_dem(source, skeleton: DemSkeleton, options: EstimatorOptions | None = None, *,
                 with_report: bool = False):
    """Estimate the DEM with the structure of ``skeleton`` from ``source``.

    ``source`` is a :class:`DetectionData` or, as the infinite-shot limit, an
    :class:`ExactDistribution`.
    """
    opt = options or EstimatorOptions()
    discovered = []
    if opt.discover_regions:
        discovered = discover_regions(source, skeleton, opt)
        if discovered:
            extra = [(r, ()) for r, _ in discovered if r not in skeleton.groups]
            skeleton = DemSkeleton(skeleton.detector_count, skeleton.observable_count,
                                   skeleton.signatures + extra, skeleton.extra_regions, skeleton.ambiguity_filter)
    table = _table(source, skeleton)
    dem, rep = estimate_from_table(table, skeleton, opt, source)
    rep.discovered = discovered
    return (dem, rep) if with_report else dem


def _table(source, skeleton, sets=None) -> CorrelatorTable:
    if isinstance(source, DetectionData):
        return accumulate(source, skeleton, sets)
    if isinstance(source, ExactDistribution):
        return table_from_distribution(source, skeleton, sets)
    raise TypeError("expected DetectionData or ExactDistribution")


def discover_regions(source, skeleton: DemSkeleton, options: EstimatorOptions | None = None) -> list[tuple[DetSet, float]]:
    """Candidate three-detector hyperedges not present in ``skeleton``.

    Triangles of the skeleton's detector adjacency are fitted as three-point
    regions; a triangle is kept when its three-point class probability ``t``
    satisfies ``sqrt(t * N) >= threshold`` (for exact sources, ``t > 1e-9``).
    """
    opt = options or EstimatorOptions()
    adj: dict[int, set[int]] = {}
    for g in skeleton.groups:
        for a, b in combinations(g, 2):
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
    known = set(skeleton.regions)
    tris = sorted(
        {tuple(sorted((a, b, c))) for a in adj for b in adj[a] if b > a for c in adj[a] & adj[b] if c > b}
        - known
    )
    if not tris:
        return []
    sets = sorted({s for t in tris for k in (2, 3) for s in combinations(t, k)})
    table = _table(source, skeleton, sets)
    n = table.shots if isinstance(source, DetectionData) else None
    out = []
    for t in tris:
        system = RegionSystem.from_skeleton(skeleton, t, opt.region_order, opt.bounds)
        sol = solve_region(system, table.region_patterns(t)[1:], opt.bounds, opt.max_evaluations)
        value = sol.full
        keep = np.sqrt(value * n) >= opt.discovery_threshold if n else value > 1e-9
        if keep:
            out.append((t, value))
    return out
