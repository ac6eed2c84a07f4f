"""Bit-packed detection events and their file formats.

Layout: ``detectors`` is a C-contiguous ``uint64`` array of shape
``(D, ceil(N / 64))``; shot ``s`` lives in word ``s >> 6`` at bit ``s & 63``.
``observables`` has the same layout with ``O`` rows. Bits past shot ``N - 1``
in the last word are always zero, so popcounts never need masking.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

B8_MAGIC = b"DEMB"
_HEADER = struct.Struct("<4sIII")


def n_words(shots: int) -> int:
    return (shots + 63) >> 6


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean ``(rows, N)`` matrix into ``(rows, ceil(N/64))`` words."""
    bits = np.asarray(bits, dtype=bool)
    rows, n = bits.shape
    w = n_words(n)
    padded = np.zeros((rows, w * 64), dtype=bool)
    padded[:, :n] = bits
    if rows == 0:
        return np.zeros((0, w), dtype=np.uint64)
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False).reshape(rows, w)


def unpack_rows(words: np.ndarray, shots: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    if words.shape[0] == 0:
        return np.zeros((0, shots), dtype=bool)
    as_bytes = words.astype("<u8", copy=False).view(np.uint8).reshape(words.shape[0], -1)
    return np.unpackbits(as_bytes, axis=1, count=shots, bitorder="little").astype(bool)


def mask_tail(words: np.ndarray, shots: int) -> None:
    """Zero the padding bits past ``shots`` in place."""
    rem = shots & 63
    if words.shape[1] and rem:
        words[:, -1] &= np.uint64((1 << rem) - 1)


@dataclass
class DetectionData:
    """Detector and observable bits for ``shots`` shots, packed 64 per word."""

    detectors: np.ndarray
    observables: np.ndarray
    shots: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.detectors = np.ascontiguousarray(self.detectors, dtype=np.uint64)
        self.observables = np.ascontiguousarray(self.observables, dtype=np.uint64)
        w = n_words(self.shots)
        if self.detectors.ndim != 2 or self.detectors.shape[1] != w:
            raise ValueError(f"detector words {self.detectors.shape} inconsistent with {self.shots} shots")
        if self.observables.ndim != 2 or self.observables.shape[1] != w:
            raise ValueError(f"observable words {self.observables.shape} inconsistent with {self.shots} shots")

    @property
    def detector_count(self) -> int:
        return self.detectors.shape[0]

    @property
    def observable_count(self) -> int:
        return self.observables.shape[0]

    @classmethod
    def empty(cls, detector_count: int, observable_count: int) -> "DetectionData":
        return cls(np.zeros((detector_count, 0), np.uint64), np.zeros((observable_count, 0), np.uint64), 0)

    @classmethod
    def from_bool(cls, dets, obs, provenance=None) -> "DetectionData":
        """Build from boolean arrays of shape ``(N, D)`` and ``(N, O)``."""
        dets = np.asarray(dets, dtype=bool)
        obs = np.asarray(obs, dtype=bool)
        if dets.ndim != 2 or obs.ndim != 2 or dets.shape[0] != obs.shape[0]:
            raise ValueError("expected (N, D) and (N, O) arrays with equal N")
        return cls(pack_rows(dets.T), pack_rows(obs.T), dets.shape[0], dict(provenance or {}))

    def to_bool(self) -> tuple[np.ndarray, np.ndarray]:
        """Unpack into ``(N, D)`` and ``(N, O)`` boolean arrays."""
        return unpack_rows(self.detectors, self.shots).T, unpack_rows(self.observables, self.shots).T

    def select_detectors(self, idx, observables=None) -> "DetectionData":
        """Keep detector rows ``idx`` (renumbered in order) and optionally observable rows."""
        idx = np.asarray(idx, dtype=np.int64).reshape(-1)
        obs = self.observables if observables is None else self.observables[np.asarray(observables, dtype=np.int64).reshape(-1)]
        return DetectionData(self.detectors[idx], obs, self.shots, dict(self.provenance))

    def detector_counts(self) -> np.ndarray:
        return np.bitwise_count(self.detectors).sum(axis=1).astype(np.int64)

    def observable_counts(self) -> np.ndarray:
        return np.bitwise_count(self.observables).sum(axis=1).astype(np.int64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DetectionData):
            return NotImplemented
        return (
            self.shots == other.shots
            and np.array_equal(self.detectors, other.detectors)
            and np.array_equal(self.observables, other.observables)
        )

    # -- file formats -----------------------------------------------------

    def write_01(self, path) -> None:
        """One line per shot: detector bits, a space, observable bits."""
        dets, obs = self.to_bool()
        with open(path, "w") as fh:
            for d_row, o_row in zip(dets.astype(np.uint8), obs.astype(np.uint8)):
                fh.write("".join("01"[b] for b in d_row) + " " + "".join("01"[b] for b in o_row) + "\n")

    @classmethod
    def read_01(cls, path, detector_count: int | None = None, observable_count: int | None = None) -> "DetectionData":
        dets, obs = [], []
        with open(path) as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(" ")
                if len(parts) == 1:
                    parts.append("")
                if len(parts) != 2 or set(parts[0] + parts[1]) - {"0", "1"}:
                    raise ValueError(f"{path}:{line_no}: malformed shot line")
                dets.append([c == "1" for c in parts[0]])
                obs.append([c == "1" for c in parts[1]])
        if not dets:
            return cls.empty(detector_count or 0, observable_count or 0)
        if len({len(r) for r in dets}) != 1 or len({len(r) for r in obs}) != 1:
            raise ValueError(f"{path}: ragged shot lines")
        if detector_count is not None and len(dets[0]) != detector_count:
            raise ValueError(f"{path}: expected {detector_count} detector bits")
        if observable_count is not None and len(obs[0]) != observable_count:
            raise ValueError(f"{path}: expected {observable_count} observable bits")
        d = np.array(dets, dtype=bool).reshape(len(dets), -1)
        o = np.array(obs, dtype=bool).reshape(len(obs), -1)
        return cls.from_bool(d, o)

    def write_b8(self, path) -> None:
        """16-byte header (magic, D, O, N), then per shot its detector and observable bytes."""
        dets, obs = self.to_bool()
        db = np.packbits(dets, axis=1, bitorder="little") if self.detector_count else np.zeros((self.shots, 0), np.uint8)
        ob = np.packbits(obs, axis=1, bitorder="little") if self.observable_count else np.zeros((self.shots, 0), np.uint8)
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(B8_MAGIC, self.detector_count, self.observable_count, self.shots))
            fh.write(np.hstack([db, ob]).tobytes())

    @classmethod
    def read_b8(cls, path) -> "DetectionData":
        raw = Path(path).read_bytes()
        if len(raw) < _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, D, O, N = _HEADER.unpack_from(raw)
        if magic != B8_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        bd, bo = (D + 7) // 8, (O + 7) // 8
        body = np.frombuffer(raw, dtype=np.uint8, offset=_HEADER.size)
        if body.size != N * (bd + bo):
            raise ValueError(f"{path}: expected {N * (bd + bo)} payload bytes, found {body.size}")
        body = body.reshape(N, bd + bo)
        dets = np.unpackbits(body[:, :bd], axis=1, count=D, bitorder="little").astype(bool)
        obs = np.unpackbits(body[:, bd:], axis=1, count=O, bitorder="little").astype(bool)
        return cls.from_bool(dets, obs)

    def write(self, path, fmt: str = "b8") -> None:
        if fmt == "01":
            self.write_01(path)
        elif fmt == "b8":
            self.write_b8(path)
        else:
            raise ValueError(f"unknown detection format {fmt!r}")

    @classmethod
    def read(cls, path, fmt: str | None = None) -> "DetectionData":
        if fmt is None:
            with open(path, "rb") as fh:
                fmt = "b8" if fh.read(4) == B8_MAGIC else "01"
        return cls.read_b8(path) if fmt == "b8" else cls.read_01(path)


def merge(a: DetectionData, b: DetectionData) -> DetectionData:
    """Concatenate shots of ``a`` then ``b``."""
    if a.detector_count != b.detector_count or a.observable_count != b.observable_count:
        raise ValueError(
            f"cannot merge widths ({a.detector_count}, {a.observable_count}) and ({b.detector_count}, {b.observable_count})"
        )
    prov = dict(a.provenance)
    if b.provenance:
        prov.setdefault("merged", []).append(b.provenance)
    if a.shots % 64 == 0:
        return DetectionData(
            np.hstack([a.detectors, b.detectors]), np.hstack([a.observables, b.observables]), a.shots + b.shots, prov
        )
    ad, ao = a.to_bool()
    bd, bo = b.to_bool()
    out = DetectionData.from_bool(np.vstack([ad, bd]), np.vstack([ao, bo]))
    out.provenance = prov
    return out
