"""Map a code family name and parameters to a circuit."""

from __future__ import annotations

from ..circuit import (
    Circuit,
    NoiseConfig,
    build_color_code,
    build_repetition_bare,
    build_repetition_steane,
    build_surface_unrotated,
)

DEFAULT_BASIS = {"surface": "X", "color": "Z"}


def build_single_mechanism(p: float) -> Circuit:
    """Two detectors flipped together by one X error of probability ``p``."""
    c = Circuit()
    c.append("R", [0, 1])
    c.append("X_ERROR", [0], [p])
    c.append("CX", [0, 1])
    c.append("M", [0, 1])
    c.append("DETECTOR", [-2])
    c.append("DETECTOR", [-1])
    return c


def build_family(family: str, d: int, rounds: int, noise: NoiseConfig, checks: str = "x") -> Circuit:
    if family == "repetition-bare":
        return build_repetition_bare(d, rounds, noise)
    if family == "repetition-steane":
        return build_repetition_steane(d, rounds, noise)
    if family == "surface":
        return build_surface_unrotated(d, rounds, noise, checks)
    if family == "color":
        return build_color_code(d, rounds, noise)
    if family == "single-mechanism":
        return build_single_mechanism(noise.p_data)
    raise ValueError(f"unknown family {family!r}")


def family_bases(family: str, requested: list[str]) -> list[str | None]:
    if requested:
        return list(requested)
    return [DEFAULT_BASIS.get(family)]
