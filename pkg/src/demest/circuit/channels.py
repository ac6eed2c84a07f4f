"""Pauli-channel decompositions and per-qubit rate sampling."""

from __future__ import annotations

import itertools
import math

import numpy as np

PAULIS_1Q = ("X", "Y", "Z")
PAULIS_2Q = tuple(
    (a, b) for a, b in itertools.product("IXYZ", repeat=2) if (a, b) != ("I", "I")
)


def decompose_depol1(p: float) -> float:
    """Strength of each of three independent X, Y, Z flips equal to depolarizing(p).

    Every non-identity Pauli anticommutes with two of {X, Y, Z}, so the composed
    channel shrinks it by ``(1 - 2p')**2``; matching ``1 - 4p/3`` gives
    ``p' = (1 - sqrt(1 - 4p/3)) / 2``. Valid for ``0 <= p <= 3/4``.
    """
    if not 0.0 <= p <= 0.75:
        raise ValueError(f"single-qubit depolarizing strength {p} outside [0, 3/4]")
    return 0.5 * (1.0 - math.sqrt(max(0.0, 1.0 - 4.0 * p / 3.0)))


def decompose_depol2(p: float) -> float:
    """Strength of each of the 15 independent two-qubit Paulis equal to depolarizing(p).

    ``p' = 1/2 - (1 - 16p/15)**(1/8) / 2``, valid for ``0 <= p <= 15/16``.
    """
    if not 0.0 <= p <= 15.0 / 16.0:
        raise ValueError(f"two-qubit depolarizing strength {p} outside [0, 15/16]")
    return 0.5 - 0.5 * max(0.0, 1.0 - 16.0 * p / 15.0) ** 0.125


def sample_lognormal_rates(mean: float, sigma: float, count: int, stream: int) -> list[float]:
    """Draw ``count`` log-normal rates with the given linear-space mean and std.

    The underlying normal has ``s2 = ln(1 + sigma**2 / mean**2)`` and
    ``mu = ln(mean) - s2 / 2``. ``sigma == 0`` returns ``count`` copies of
    ``mean`` without touching the generator. Deterministic in ``stream``.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return [float(mean)] * count
    if mean <= 0:
        raise ValueError("log-normal sampling needs a positive mean when sigma > 0")
    s2 = math.log1p((sigma / mean) ** 2)
    mu = math.log(mean) - 0.5 * s2
    rng = np.random.default_rng(stream)
    return rng.lognormal(mu, math.sqrt(s2), size=count).tolist()
