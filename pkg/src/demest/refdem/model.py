"""Detector error model container, text format and probability helpers."""

from __future__ import annotations

import math
import re
from typing import Iterable, NamedTuple

import numpy as np

P_CLAMP = 1e-12

Signature = tuple[tuple[int, ...], tuple[int, ...]]


def xor_combine(p: float, q: float) -> float:
    """Probability that exactly one of two independent events happens."""
    return p + q - 2.0 * p * q


def weight_of(p: float) -> float:
    """Matching weight ``ln((1 - p) / p)``; ``p`` is clamped to ``[1e-12, 1 - 1e-12]``."""
    p = min(max(p, P_CLAMP), 1.0 - P_CLAMP)
    return math.log((1.0 - p) / p)


def is_clamped(p: float) -> bool:
    return p < P_CLAMP or p > 1.0 - P_CLAMP


def mechanism_class(n_detectors: int) -> str:
    if n_detectors <= 1:
        return "boundary"
    if n_detectors == 2:
        return "bulk"
    return "hyperedge"


def format_signature(sig: Signature) -> str:
    dets, obs = sig
    return " ".join([f"D{d}" for d in dets] + [f"L{o}" for o in obs])


def parse_signature(text: str) -> Signature:
    dets, obs = [], []
    for tok in text.split():
        if tok[0] == "D":
            dets.append(int(tok[1:]))
        elif tok[0] == "L":
            obs.append(int(tok[1:]))
        else:
            raise ValueError(f"bad signature token {tok!r}")
    return tuple(sorted(dets)), tuple(sorted(obs))


class ErrorMechanism(NamedTuple):
    detectors: tuple[int, ...]
    observables: tuple[int, ...]
    probability: float

    @property
    def signature(self) -> Signature:
        return self.detectors, self.observables

    @property
    def kind(self) -> str:
        return mechanism_class(len(self.detectors))

    @property
    def weight(self) -> float:
        return weight_of(self.probability)


class DemFormatError(ValueError):
    pass


_ERROR_LINE = re.compile(r"^error\(([^)]*)\)((?:\s+[DL]\d+)*)\s*$")


class DEM:
    """A set of independent error mechanisms with unique signatures.

    Mechanisms are kept sorted by signature ``(detectors, observables)``.
    Adding a signature that already exists merges the two probabilities with
    :func:`xor_combine`.
    """

    def __init__(self, detector_count: int, observable_count: int, mechanisms: Iterable = ()):
        self.detector_count = int(detector_count)
        self.observable_count = int(observable_count)
        self._probs: dict[Signature, float] = {}
        for m in mechanisms:
            if not isinstance(m, ErrorMechanism):
                m = ErrorMechanism(*m)
            self.add(m.detectors, m.observables, m.probability)

    def add(self, detectors, observables, probability: float) -> None:
        dets = tuple(sorted(int(d) for d in detectors))
        obs = tuple(sorted(int(o) for o in observables))
        if not dets and not obs:
            return
        if len(set(dets)) != len(dets) or len(set(obs)) != len(obs):
            raise ValueError("repeated index in mechanism signature")
        if (dets and (dets[0] < 0 or dets[-1] >= self.detector_count)) or (
            obs and (obs[0] < 0 or obs[-1] >= self.observable_count)
        ):
            raise ValueError(f"signature {format_signature((dets, obs))} outside declared counts")
        if not 0.0 <= probability <= 1.0:
            raise ValueError(f"probability {probability} outside [0, 1]")
        key = (dets, obs)
        if key in self._probs:
            self._probs[key] = xor_combine(self._probs[key], probability)
        else:
            self._probs[key] = float(probability)

    @property
    def mechanisms(self) -> list[ErrorMechanism]:
        return [ErrorMechanism(d, o, p) for (d, o), p in sorted(self._probs.items())]

    def __iter__(self):
        return iter(self.mechanisms)

    def __len__(self) -> int:
        return len(self._probs)

    def __contains__(self, sig) -> bool:
        return sig in self._probs

    def __getitem__(self, sig: Signature) -> float:
        return self._probs[sig]

    def get(self, sig: Signature, default=None):
        return self._probs.get(sig, default)

    def signatures(self) -> list[Signature]:
        return sorted(self._probs)

    def probabilities(self) -> dict[Signature, float]:
        return dict(self._probs)

    def with_probabilities(self, probs: dict[Signature, float]) -> "DEM":
        out = DEM(self.detector_count, self.observable_count)
        for sig in self.signatures():
            out._probs[sig] = float(probs[sig])
        return out

    def drop_zero(self) -> "DEM":
        return DEM(self.detector_count, self.observable_count, [m for m in self if m.probability > 0])

    def is_graphlike(self) -> bool:
        return all(len(d) <= 2 for d, _ in self._probs)

    def max_order(self) -> int:
        return max((len(d) for d, _ in self._probs), default=0)

    def flagged(self) -> list[ErrorMechanism]:
        """Mechanisms with ``p >= 1/2`` (non-positive matching weight)."""
        return [m for m in self if m.probability >= 0.5]

    def weights(self) -> tuple[np.ndarray, int]:
        ps = [m.probability for m in self]
        return np.array([weight_of(p) for p in ps]), sum(is_clamped(p) for p in ps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DEM):
            return NotImplemented
        return (
            self.detector_count == other.detector_count
            and self.observable_count == other.observable_count
            and self._probs == other._probs
        )

    def __repr__(self) -> str:
        return f"DEM(detectors={self.detector_count}, observables={self.observable_count}, mechanisms={len(self)})"

    # -- text format ---------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"detectors {self.detector_count}", f"observables {self.observable_count}"]
        for m in self:
            lines.append(f"error({m.probability!r}) {format_signature(m.signature)}")
        return "\n".join(lines) + "\n"

    __str__ = to_text

    @classmethod
    def from_text(cls, text: str) -> "DEM":
        D = O = None
        pending = []
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("detectors"):
                D = _header_int(line, line_no)
            elif line.startswith("observables"):
                O = _header_int(line, line_no)
            else:
                m = _ERROR_LINE.match(line)
                if not m:
                    raise DemFormatError(f"line {line_no}: cannot parse {raw!r}")
                try:
                    p = float(m.group(1))
                    sig = parse_signature(m.group(2))
                except ValueError as exc:
                    raise DemFormatError(f"line {line_no}: {exc}") from None
                pending.append((line_no, sig, p))
        if D is None or O is None:
            missing = "detectors" if D is None else "observables"
            raise DemFormatError(f"missing '{missing}' header")
        dem = cls(D, O)
        for line_no, (ds, os_), p in pending:
            try:
                dem.add(ds, os_, p)
            except ValueError as exc:
                raise DemFormatError(f"line {line_no}: {exc}") from None
        return dem

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def read(cls, path) -> "DEM":
        with open(path) as fh:
            return cls.from_text(fh.read())


def _header_int(line: str, line_no: int) -> int:
    parts = line.split()
    if len(parts) != 2 or not parts[1].isdigit():
        raise DemFormatError(f"line {line_no}: bad header {line!r}")
    return int(parts[1])
