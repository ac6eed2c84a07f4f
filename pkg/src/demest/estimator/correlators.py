"""Detector coincidence counts gathered in one pass over packed shots."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..sampler.data import DetectionData
from ..sampler.exact import ExactDistribution
from .skeleton import DemSkeleton, DetSet


@dataclass
class CorrelatorTable:
    """Single-detector counts and coincidence counts of declared detector sets.

    ``coincidences[s]`` is the number of shots in which every detector in the
    sorted tuple ``s`` fired. Counts are floats so that exact probabilities
    (``shots == 1``) fit the same container.
    """

    shots: float
    singles: np.ndarray
    coincidences: dict[DetSet, float] = field(default_factory=dict)

    @property
    def detector_count(self) -> int:
        return len(self.singles)

    def mean(self, i: int) -> float:
        return float(self.singles[i]) / self.shots if self.shots else 0.0

    def coincidence(self, dets) -> float:
        dets = tuple(sorted(dets))
        if len(dets) == 0:
            return float(self.shots)
        if len(dets) == 1:
            return float(self.singles[dets[0]])
        try:
            return self.coincidences[dets]
        except KeyError:
            raise KeyError(f"coincidence of {dets} was not accumulated") from None

    def moment(self, dets) -> float:
        """Fraction of shots in which all of ``dets`` fire."""
        return self.coincidence(dets) / self.shots if self.shots else 0.0

    def merge(self, other: "CorrelatorTable") -> "CorrelatorTable":
        if self.detector_count != other.detector_count or self.coincidences.keys() != other.coincidences.keys():
            raise ValueError("tables were accumulated over different detector sets")
        co = {k: v + other.coincidences[k] for k, v in self.coincidences.items()}
        return CorrelatorTable(self.shots + other.shots, self.singles + other.singles, co)

    def region_patterns(self, region: DetSet) -> np.ndarray:
        """Exact on/off pattern frequencies over ``region`` (bit ``j`` = ``region[j]``).

        Obtained from the coincidences of every subset by Moebius inversion;
        detectors outside the region are marginalized.
        """
        m = len(region)
        n_pat = 1 << m
        c = np.zeros(n_pat)
        for x in range(n_pat):
            c[x] = self.moment([region[j] for j in range(m) if x >> j & 1])
        # superset Moebius transform: P(exactly x) = sum_{y >= x} (-1)^{|y|-|x|} c(y)
        p = c.copy()
        for j in range(m):
            bit = 1 << j
            for x in range(n_pat):
                if not x & bit:
                    p[x] -= p[x | bit]
        return p


def _sets_array(sets: list[DetSet]) -> np.ndarray:
    width = max((len(s) for s in sets), default=1)
    arr = np.full((len(sets), width), -1, dtype=np.int64)
    for k, s in enumerate(sets):
        arr[k, : len(s)] = s
    return arr


def accumulate(data: DetectionData, skeleton: DemSkeleton, sets: list[DetSet] | None = None) -> CorrelatorTable:
    """Count singles and the skeleton's coincidence sets over ``data``."""
    if data.detector_count != skeleton.detector_count:
        raise ValueError(f"data has {data.detector_count} detectors, skeleton {skeleton.detector_count}")
    sets = skeleton.coincidence_sets() if sets is None else sets
    singles = data.detector_counts().astype(np.float64)
    co = {}
    if sets and data.shots:
        counts = kernels.coincidence_counts(data.detectors, _sets_array(sets))
        co = {s: float(c) for s, c in zip(sets, counts)}
    else:
        co = {s: 0.0 for s in sets}
    return CorrelatorTable(float(data.shots), singles, co)


def table_from_distribution(dist: ExactDistribution, skeleton: DemSkeleton, sets: list[DetSet] | None = None) -> CorrelatorTable:
    """The infinite-shot limit of :func:`accumulate` (``shots == 1``)."""
    sets = skeleton.coincidence_sets() if sets is None else sets
    D = skeleton.detector_count
    singles = np.zeros(D)
    masks = [(sum(1 << i for i in s), s) for s in sets]
    co = {s: 0.0 for s in sets}
    for (d, _), p in dist.items():
        for i in range(D):
            if d >> i & 1:
                singles[i] += p
        for m, s in masks:
            if d & m == m:
                co[s] += p
    return CorrelatorTable(1.0, singles, co)
