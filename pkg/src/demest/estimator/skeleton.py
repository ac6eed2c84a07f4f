"""Structure of a DEM without probabilities."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from ..refdem.model import DEM, Signature

DetSet = tuple[int, ...]


@dataclass
class DemSkeleton:
    """Which mechanisms exist, grouped by the detectors they flip.

    ``groups`` maps each detector set to the observable masks it occurs with.
    Detector statistics alone only see the XOR-combination of a group; groups
    with more than one observable mask are listed in ``ambiguous`` and split
    using observable data. ``regions`` are the detector sets of the
    hyperedges (three or more detectors), largest first.
    """

    detector_count: int
    observable_count: int
    signatures: list[Signature]
    extra_regions: list[DetSet] = field(default_factory=list)
    # restrict disambiguation to these groups (None = every ambiguous group)
    ambiguity_filter: list[DetSet] | None = None

    def __post_init__(self):
        self.signatures = sorted({(tuple(sorted(d)), tuple(sorted(o))) for d, o in self.signatures})
        groups: dict[DetSet, list[tuple[int, ...]]] = {}
        for dets, obs in self.signatures:
            for i in dets:
                if not 0 <= i < self.detector_count:
                    raise ValueError(f"detector {i} outside declared count {self.detector_count}")
            groups.setdefault(dets, []).append(obs)
        self.groups = groups
        regions = {d for d in groups if len(d) >= 3}
        for r in self.extra_regions:
            r = tuple(sorted(r))
            if len(r) < 3 or any(not 0 <= i < self.detector_count for i in r):
                raise ValueError(f"bad region {r}")
            regions.add(r)
        self.regions = sorted(regions, key=lambda s: (-len(s), s))

    @classmethod
    def from_dem(cls, dem: DEM, extra_regions=()) -> "DemSkeleton":
        return cls(dem.detector_count, dem.observable_count, dem.signatures(), list(extra_regions))

    @classmethod
    def read(cls, path) -> "DemSkeleton":
        """Read a DEM text file; its probabilities are ignored."""
        return cls.from_dem(DEM.read(path))

    @property
    def pairs(self) -> list[DetSet]:
        return [d for d in self.groups if len(d) == 2]

    @property
    def boundary_detectors(self) -> list[int]:
        return sorted(d[0] for d in self.groups if len(d) == 1)

    @property
    def ambiguous(self) -> list[DetSet]:
        groups = sorted(d for d, obs in self.groups.items() if len(obs) > 1 and d)
        if self.ambiguity_filter is None:
            return groups
        return [g for g in groups if g in self.ambiguity_filter]

    @property
    def hyperedge_groups(self) -> list[DetSet]:
        return sorted((d for d in self.groups if len(d) >= 3), key=lambda s: (-len(s), s))

    def coincidence_sets(self) -> list[DetSet]:
        """Every detector set whose coincidence count the estimator uses."""
        sets = set(self.pairs)
        for r in self.regions:
            for k in range(2, len(r) + 1):
                sets.update(combinations(r, k))
        return sorted(sets, key=lambda s: (len(s), s))

    def to_dem(self, probabilities: dict[Signature, float]) -> DEM:
        dem = DEM(self.detector_count, self.observable_count)
        for sig in self.signatures:
            dem.add(sig[0], sig[1], probabilities[sig])
        return dem
