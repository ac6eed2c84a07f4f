"""Per-mechanism comparison of an estimated DEM against a reference."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .model import DEM, Signature, format_signature, mechanism_class


@dataclass
class RelErrRow:
    signature: Signature
    kind: str
    p_ref: float
    p_est: float

    @property
    def rel_err(self) -> float:
        if self.p_ref == 0:
            return 0.0 if self.p_est == 0 else float("inf")
        return abs(self.p_est - self.p_ref) / self.p_ref

    @property
    def order(self) -> int:
        return len(self.signature[0])


@dataclass
class RelErrReport:
    rows: list[RelErrRow]
    only_reference: list[tuple[Signature, float]] = field(default_factory=list)
    only_estimated: list[tuple[Signature, float]] = field(default_factory=list)

    def by_class(self, kind: str) -> list[RelErrRow]:
        return [r for r in self.rows if r.kind == kind]

    def by_order(self, order: int) -> list[RelErrRow]:
        return [r for r in self.rows if r.order == order]

    def summary(self) -> dict[str, dict[str, float]]:
        """``{class: {"count", "max", "mean"}}`` over boundary / bulk / hyperedge and ``all``."""
        out = {}
        for kind in ("boundary", "bulk", "hyperedge", "all"):
            rows = self.rows if kind == "all" else self.by_class(kind)
            errs = np.array([r.rel_err for r in rows])
            out[kind] = {
                "count": len(rows),
                "max": float(errs.max()) if len(errs) else 0.0,
                "mean": float(errs.mean()) if len(errs) else 0.0,
            }
        return out

    def max_rel_err(self, kind: str | None = None, order: int | None = None) -> float:
        rows = self.rows
        if kind is not None:
            rows = [r for r in rows if r.kind == kind]
        if order is not None:
            rows = [r for r in rows if r.order == order]
        return max((r.rel_err for r in rows), default=0.0)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["signature", "class", "p_ref", "p_est", "rel_err"])
            for r in self.rows:
                w.writerow([format_signature(r.signature), r.kind, repr(r.p_ref), repr(r.p_est), repr(r.rel_err)])
            for sig, p in self.only_reference:
                w.writerow([format_signature(sig), mechanism_class(len(sig[0])), repr(p), "", ""])
            for sig, p in self.only_estimated:
                w.writerow([format_signature(sig), mechanism_class(len(sig[0])), "", repr(p), ""])


def compare_dems(reference: DEM, estimated: DEM) -> RelErrReport:
    if (reference.detector_count, reference.observable_count) != (estimated.detector_count, estimated.observable_count):
        raise ValueError(
            "DEM counts differ: "
            f"({reference.detector_count}, {reference.observable_count}) vs "
            f"({estimated.detector_count}, {estimated.observable_count})"
        )
    ref, est = reference.probabilities(), estimated.probabilities()
    rows = [RelErrRow(s, mechanism_class(len(s[0])), ref[s], est[s]) for s in sorted(ref) if s in est]
    only_ref = [(s, ref[s]) for s in sorted(ref) if s not in est]
    only_est = [(s, est[s]) for s in sorted(est) if s not in ref]
    return RelErrReport(rows, only_ref, only_est)
