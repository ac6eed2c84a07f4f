"""Closed-form two-point estimates and hyperedge subtraction."""

from __future__ import annotations

import math
from typing import Iterable

from .correlators import CorrelatorTable

EPS = 1e-12


class Flags(list):
    """Collects ``(where, reason)`` notes about sanitized or clamped values."""

    def note(self, where, reason: str) -> None:
        self.append((where, reason))


def pair_from_moments(vi: float, vj: float, vij: float, flags: Flags | None = None, where=None) -> float:
    """Probability of the aggregate mechanism flipping both ``i`` and ``j``.

    Exact when every mechanism touching the two detectors is independent:
    ``p = 1/2 - sqrt(1/4 - (vij - vi vj) / (1 - 2 (vi + vj) + 4 vij))``.
    A vanishing denominator or a negative radicand (finite-shot noise on near
    zero correlations) gives 0 and a flag.
    """
    den = 1.0 - 2.0 * (vi + vj) + 4.0 * vij
    if abs(den) < EPS:
        if flags is not None:
            flags.note(where, "pair denominator vanishes")
        return 0.0
    rad = 0.25 - (vij - vi * vj) / den
    if rad < 0:
        if flags is not None:
            flags.note(where, "negative pair radicand")
        return 0.0
    p = 0.5 - math.sqrt(rad)
    if p < 0:
        # anti-correlated detectors: statistically zero
        if flags is not None:
            flags.note(where, "negative pair estimate")
        return 0.0
    return p


def estimate_bulk_pair(table: CorrelatorTable, i: int, j: int, flags: Flags | None = None) -> float:
    return pair_from_moments(table.moment((i,)), table.moment((j,)), table.moment((i, j)), flags, (i, j))


def boundary_from_moment(vi: float, incident: Iterable[float], flags: Flags | None = None, where=None) -> float:
    """``p_i = 1/2 + (vi - 1/2) / prod(1 - 2 p)`` over the other mechanisms on ``i``."""
    prod = 1.0
    for p in incident:
        prod *= 1.0 - 2.0 * p
    if abs(prod) < EPS:
        if flags is not None:
            flags.note(where, "incident mechanism at 1/2")
        prod = EPS if prod >= 0 else -EPS
    p = 0.5 + (vi - 0.5) / prod
    if p < 0 or p > 1:
        if flags is not None:
            flags.note(where, "boundary estimate clamped")
        p = min(max(p, 0.0), 1.0)
    return p


def estimate_boundary(table: CorrelatorTable, i: int, incident_pair_probs: Iterable[float], flags: Flags | None = None) -> float:
    return boundary_from_moment(table.moment((i,)), incident_pair_probs, flags, (i,))


def subtract_hyperedge(p_old: float, p_h: float, flags: Flags | None = None, where=None) -> float:
    """Inverse of ``xor_combine``: the ``r`` with ``r + p_h - 2 r p_h == p_old``."""
    if not p_h < 0.5:
        raise ValueError(f"cannot subtract a mechanism with p = {p_h} >= 1/2")
    r = (p_old - p_h) / (1.0 - 2.0 * p_h)
    if r < 0 or r > 1:
        if flags is not None:
            flags.note(where, "subtraction result clamped")
        r = min(max(r, 0.0), 1.0)
    return r
