"""Configuration-probability systems for hyperedge regions.

A region is a set of ``m`` detectors. Every mechanism touching the region is
reduced to the part of its signature inside the region (a local ``m``-bit
mask); mechanisms with equal local masks combine into one unknown. The
probability of seeing exactly pattern ``x`` on the region is the sum, over
subsets ``S`` of unknowns whose masks XOR to ``x``, of
``prod_{e in S} p_e * prod_{f not in S} (1 - p_f)``. Truncating to
``|S| <= k`` gives the approximate system; ``k`` at least the number of
unknowns makes it exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import least_squares

from .closed_form import pair_from_moments
from .skeleton import DemSkeleton, DetSet

DEFAULT_BOUNDS = (1e-12, 0.6)
DEFAULT_ORDER = 7


@dataclass
class RegionSystem:
    """Unknown classes of one region plus the data to fit them to.

    ``classes`` are local masks (bit ``j`` = ``detectors[j]``); ``members``
    lists the skeleton detector sets folded into each class. ``observed``
    holds the pattern frequencies for ``x = 1 .. 2**m - 1``.
    """

    detectors: DetSet
    classes: list[int]
    members: dict[int, list[DetSet]] = field(default_factory=dict)
    order: int = DEFAULT_ORDER
    observed: np.ndarray | None = None
    bounds: tuple[float, float] = DEFAULT_BOUNDS

    @property
    def m(self) -> int:
        return len(self.detectors)

    @property
    def full_mask(self) -> int:
        return (1 << self.m) - 1

    @property
    def equation_count(self) -> int:
        return (1 << self.m) - 1

    @classmethod
    def from_skeleton(cls, skeleton: DemSkeleton, detectors, order: int = DEFAULT_ORDER, bounds=DEFAULT_BOUNDS) -> "RegionSystem":
        detectors = tuple(sorted(detectors))
        pos = {d: j for j, d in enumerate(detectors)}
        members: dict[int, list[DetSet]] = {}
        for dets in skeleton.groups:
            mask = 0
            for d in dets:
                if d in pos:
                    mask |= 1 << pos[d]
            if mask:
                members.setdefault(mask, []).append(dets)
        full = (1 << len(detectors)) - 1
        # the region's own event is always an unknown (discovered regions may lack it)
        members.setdefault(full, [])
        return cls(detectors, sorted(members), members, order, None, bounds)


@dataclass
class RegionEquations:
    """Expanded monomials of a region system.

    ``incidence[t, e]`` says whether unknown ``e`` is in subset ``t`` and
    ``pattern[t]`` is the XOR of the subset's masks.
    """

    system: RegionSystem
    incidence: np.ndarray
    pattern: np.ndarray

    def evaluate(self, p) -> np.ndarray:
        """``P(x)`` for ``x = 1 .. 2**m - 1``."""
        return self._terms(np.asarray(p, dtype=float))[1]

    def _terms(self, p):
        lp, lq = np.log(p), np.log1p(-p)
        inc = self.incidence
        term = np.exp(inc @ lp + (~inc) @ lq)
        n_pat = 1 << self.system.m
        P = np.bincount(self.pattern, weights=term, minlength=n_pat)
        return term, P[1:]

    def jacobian(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        term, _ = self._terms(p)
        inc = self.incidence
        dlog = np.where(inc, 1.0 / p, -1.0 / (1.0 - p))  # d log(term) / d p_e
        n_pat = 1 << self.system.m
        J = np.zeros((n_pat, len(p)))
        np.add.at(J, self.pattern, term[:, None] * dlog)
        return J[1:]

    def terms(self, x: int) -> list[tuple[int, ...]]:
        """Subsets (as tuples of class masks) contributing to ``P(x)``."""
        cls = self.system.classes
        return [tuple(cls[e] for e in np.flatnonzero(row)) for row, pt in zip(self.incidence, self.pattern) if pt == x]


def build_region_equations(system: RegionSystem) -> RegionEquations:
    classes = system.classes
    n = len(classes)
    k = min(system.order, n)
    rows, pats = [], []
    for size in range(k + 1):
        for sub in combinations(range(n), size):
            row = np.zeros(n, dtype=bool)
            row[list(sub)] = True
            x = 0
            for e in sub:
                x ^= classes[e]
            rows.append(row)
            pats.append(x)
    return RegionEquations(system, np.array(rows, dtype=bool).reshape(-1, n), np.array(pats, dtype=np.int64))


@dataclass
class RegionSolution:
    system: RegionSystem
    probabilities: dict[int, float]
    residual: float
    success: bool
    evaluations: int
    at_bound: list[int]
    message: str = ""

    @property
    def full(self) -> float:
        """Probability of the class flipping every region detector."""
        return self.probabilities[self.system.full_mask]


def initial_guess(system: RegionSystem, observed: np.ndarray) -> np.ndarray:
    """Per-class starting point from low-order moments of the observed patterns."""
    m = system.m
    P = np.concatenate([[max(0.0, 1.0 - observed.sum())], observed])
    xs = np.arange(1 << m)

    def moment(mask):
        return float(P[(xs & mask) == mask].sum())

    lo, hi = system.bounds
    x0 = []
    for c in system.classes:
        bits = [j for j in range(m) if c >> j & 1]
        if len(bits) == 1:
            share = sum(1 for o in system.classes if o >> bits[0] & 1)
            g = moment(c) / share
        elif len(bits) == 2:
            a, b = 1 << bits[0], 1 << bits[1]
            g = pair_from_moments(moment(a), moment(b), moment(a | b))
        else:
            g = moment(c) - np.prod([moment(1 << j) for j in bits])
        x0.append(g)
    return np.clip(np.array(x0), max(10 * lo, 1e-9), min(0.5, hi))


def solve_region(system: RegionSystem, observed=None, bounds=None, max_evaluations: int = 10_000,
                 equations: RegionEquations | None = None, x0=None) -> RegionSolution:
    """Bounded least-squares fit of the class probabilities to ``observed``.

    Minimizes ``sum_x (P(x) - observed(x))**2`` over ``x != 0`` with a
    trust-region reflective solver inside ``bounds``.
    """
    observed = np.asarray(system.observed if observed is None else observed, dtype=float)
    if observed.shape != (system.equation_count,):
        raise ValueError(f"expected {system.equation_count} observed frequencies, got {observed.shape}")
    lo, hi = system.bounds if bounds is None else bounds
    system.bounds = (lo, hi)
    eq = equations or build_region_equations(system)
    start = initial_guess(system, observed) if x0 is None else np.clip(np.asarray(x0, float), lo, hi)
    res = least_squares(
        lambda p: eq.evaluate(p) - observed,
        start,
        jac=eq.jacobian,
        bounds=(lo, hi),
        method="trf",
        x_scale="jac",
        xtol=1e-15,
        ftol=1e-15,
        gtol=None,  # the gradient test stops early at tiny probabilities
        max_nfev=max_evaluations,
    )
    p = np.clip(res.x, lo, hi)
    tol = 1e-9
    at_bound = [c for c, v in zip(system.classes, p) if v <= lo * (1 + 1e-6) + 1e-300 or v >= hi - tol]
    return RegionSolution(
        system,
        {c: float(v) for c, v in zip(system.classes, p)},
        float(np.sqrt(2.0 * res.cost)),
        bool(res.status > 0),
        int(res.nfev),
        at_bound,
        str(res.message),
    )
