"""Run an experiment configuration point by point and write result files.

Every (grid point, repetition) is an independent task seeded from
``SeedSequence(seed, spawn_key=(point, rep, stream))`` with separate streams
for the rate configuration, the estimation shots and the decoding shots, so
results do not depend on scheduling or worker count. Wall-clock timings go
to ``timings.csv`` and never into ``results.csv``, which keeps the latter
byte-identical across reruns.
"""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..circuit import NoiseConfig
from ..decoder import logical_error_rate
from ..estimator import DemSkeleton, EstimatorOptions, estimate_dem
from ..refdem import compare_dems, derive_dem
from ..refdem.model import format_signature
from ..sampler import sample_shots
from .config import ExperimentConfig
from .families import build_family, family_bases

STREAM_RATES, STREAM_EST, STREAM_DEC = 0, 1, 2

COLUMNS = {
    "logical": [
        "experiment", "point", "rep", "family", "d", "rounds", "x", "y", "p_data", "p_anc", "p_gate",
        "p_idle", "p_meas", "sigma", "basis", "n_est", "n_dec", "pL_ref", "stderr_ref", "pL_est",
        "stderr_est", "pL_true", "stderr_true", "improvement_pct", "flags", "status",
    ],
    "dem-accuracy": [
        "experiment", "point", "rep", "family", "d", "rounds", "x", "y", "basis", "n_est", "mechanisms",
        "max_boundary", "max_bulk", "max_hyperedge", "max_order4", "max_all", "mean_all", "flags", "status",
    ],
    "runtime-scaling": [
        "experiment", "point", "rep", "family", "d", "rounds", "qubits", "detectors", "mechanisms",
        "n_est", "status",
    ],
    "convergence": [
        "experiment", "point", "rep", "family", "n_est", "mechanisms", "mean_abs_err", "max_rel_err", "status",
    ],
}
MECHANISM_COLUMNS = ["point", "rep", "basis", "signature", "class", "order", "p_ref", "p_est", "rel_err"]
TIMING_COLUMNS = ["point", "rep", "seconds_estimate", "seconds_total"]


def column_set(kind: str) -> list[str]:
    return COLUMNS.get(kind, COLUMNS["logical"])


def improvement_pct(p_ref: float, p_est: float) -> float | None:
    """Relative logical-rate change in percent; undefined when ``p_ref`` is 0."""
    if not p_ref > 0:
        return None
    return abs(p_ref - p_est) / p_ref * 100.0


@dataclass(frozen=True)
class GridPoint:
    index: int
    d: int
    rounds: int
    x: float | None = None
    y: float | None = None
    shots: int | None = None


def grid_points(cfg: ExperimentConfig) -> list[GridPoint]:
    xs = cfg.grid_x if cfg.uses_axis("x") else [None]
    ys = cfg.grid_y if cfg.uses_axis("y") else [None]
    shots = cfg.shots_list if cfg.kind == "convergence" else [None]
    out = []
    for d in cfg.distances:
        rounds_opts = cfg.rounds_list if cfg.kind == "rounds-sweep" else [d if cfg.rounds == "d" else cfg.rounds]
        for r, x, y, n in product(rounds_opts, xs, ys, shots):
            out.append(GridPoint(len(out), d, r, x, y, n))
    return out


def _seed(cfg: ExperimentConfig, point: int, rep: int, stream: int, n: int = 1) -> list[int]:
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(point, rep, stream))
    return [int(v) for v in ss.generate_state(n, dtype=np.uint32)]


def point_noise(cfg: ExperimentConfig, pt: GridPoint, rep: int) -> NoiseConfig:
    vals = {}
    for k, v in cfg.noise.items():
        vals[k] = {"x": pt.x, "y": pt.y}[v] if isinstance(v, str) else float(v)
    sd, sa, sg = _seed(cfg, pt.index, rep, STREAM_RATES, 3)
    return NoiseConfig(**vals, seed_data=sd, seed_anc=sa, seed_gate=sg)


@dataclass
class TaskResult:
    rows: list[dict]
    timing: dict
    mechanisms: list[dict] = field(default_factory=list)


def _options(cfg: ExperimentConfig) -> EstimatorOptions:
    return EstimatorOptions(region_order=cfg.region_order, disambiguation_order=cfg.disambiguation_order,
                            bounds=tuple(cfg.bounds))


def _restricted(data, dem):
    ids = getattr(dem, "detector_ids", None)
    if ids is None:
        return data
    return data.select_detectors(ids, dem.observable_ids)


def _base_row(cfg, pt, rep, noise) -> dict:
    return {
        "experiment": cfg.name, "point": pt.index, "rep": rep, "family": cfg.family, "d": pt.d,
        "rounds": pt.rounds, "x": pt.x, "y": pt.y, "p_data": noise.p_data, "p_anc": noise.p_anc,
        "p_gate": noise.p_gate, "p_idle": noise.p_idle, "p_meas": noise.p_meas, "sigma": noise.sigma,
    }


def _run_logical(cfg, pt, rep, timing) -> TaskResult:
    noise = point_noise(cfg, pt, rep)
    circuit = build_family(cfg.family, pt.d, pt.rounds, noise, cfg.checks)
    basis = family_bases(cfg.family, cfg.bases)[0]
    fluctuating = noise.sigma > 0
    ref_circuit = build_family(cfg.family, pt.d, pt.rounds, noise.fixed(), cfg.checks) if fluctuating else circuit
    ref = derive_dem(ref_circuit, basis)
    true = derive_dem(circuit, basis) if fluctuating else None
    skeleton = DemSkeleton.from_dem(ref)
    data = _restricted(sample_shots(circuit, cfg.shots_est, _seed(cfg, pt.index, rep, STREAM_EST)[0]), ref)
    t0 = time.perf_counter()
    est, report = estimate_dem(data, skeleton, _options(cfg), with_report=True)
    timing["seconds_estimate"] = time.perf_counter() - t0
    dec = _restricted(sample_shots(circuit, cfg.shots_dec, _seed(cfg, pt.index, rep, STREAM_DEC)[0]), ref)
    r_ref = logical_error_rate(ref, dec, cfg.decoder)
    r_est = logical_error_rate(est, dec, cfg.decoder)
    row = _base_row(cfg, pt, rep, noise)
    row.update(basis=basis or "", n_est=cfg.shots_est, n_dec=cfg.shots_dec, pL_ref=r_ref.rate,
               stderr_ref=r_ref.stderr, pL_est=r_est.rate, stderr_est=r_est.stderr,
               improvement_pct=improvement_pct(r_ref.rate, r_est.rate), flags=len(report.flags), status="ok")
    if true is not None:
        r_true = logical_error_rate(true, dec, cfg.decoder)
        row.update(pL_true=r_true.rate, stderr_true=r_true.stderr)
    return TaskResult([row], timing)


def _run_accuracy(cfg, pt, rep, timing) -> TaskResult:
    noise = point_noise(cfg, pt, rep)
    circuit = build_family(cfg.family, pt.d, pt.rounds, noise, cfg.checks)
    raw = sample_shots(circuit, cfg.shots_est, _seed(cfg, pt.index, rep, STREAM_EST)[0])
    rows, mechs = [], []
    timing["seconds_estimate"] = 0.0
    for basis in family_bases(cfg.family, cfg.bases):
        ref = derive_dem(circuit, basis)
        t0 = time.perf_counter()
        est, report = estimate_dem(_restricted(raw, ref), DemSkeleton.from_dem(ref), _options(cfg), with_report=True)
        timing["seconds_estimate"] += time.perf_counter() - t0
        cmp = compare_dems(ref, est)
        summary = cmp.summary()
        row = {k: v for k, v in _base_row(cfg, pt, rep, noise).items() if k in COLUMNS["dem-accuracy"]}
        row.update(
            basis=basis or "", n_est=cfg.shots_est, mechanisms=len(ref.mechanisms),
            max_boundary=cmp.max_rel_err("boundary"), max_bulk=cmp.max_rel_err("bulk"),
            max_hyperedge=cmp.max_rel_err("hyperedge"), max_order4=cmp.max_rel_err(order=4),
            max_all=cmp.max_rel_err(), mean_all=summary["all"]["mean"], flags=len(report.flags), status="ok")
        rows.append(row)
        for r in cmp.rows:
            mechs.append({"point": pt.index, "rep": rep, "basis": basis or "", "signature": format_signature(r.signature),
                          "class": r.kind, "order": r.order, "p_ref": r.p_ref, "p_est": r.p_est, "rel_err": r.rel_err})
    return TaskResult(rows, timing, mechs)


def _run_runtime(cfg, pt, rep, timing) -> TaskResult:
    noise = point_noise(cfg, pt, rep)
    circuit = build_family(cfg.family, pt.d, pt.rounds, noise, cfg.checks)
    basis = family_bases(cfg.family, cfg.bases)[0]
    ref = derive_dem(circuit, basis)
    skeleton = DemSkeleton.from_dem(ref)
    data = _restricted(sample_shots(circuit, cfg.shots_est, _seed(cfg, pt.index, rep, STREAM_EST)[0]), ref)
    # only the estimation itself is timed
    t0 = time.perf_counter()
    estimate_dem(data, skeleton, _options(cfg))
    timing["seconds_estimate"] = time.perf_counter() - t0
    row = {"experiment": cfg.name, "point": pt.index, "rep": rep, "family": cfg.family, "d": pt.d,
           "rounds": pt.rounds, "qubits": circuit.qubit_count, "detectors": ref.detector_count,
           "mechanisms": len(ref.mechanisms), "n_est": cfg.shots_est, "status": "ok"}
    return TaskResult([row], timing)


def _run_convergence(cfg, pt, rep, timing) -> TaskResult:
    noise = point_noise(cfg, pt, rep)
    circuit = build_family(cfg.family, pt.d, pt.rounds, noise, cfg.checks)
    basis = family_bases(cfg.family, cfg.bases)[0]
    ref = derive_dem(circuit, basis)
    data = _restricted(sample_shots(circuit, pt.shots, _seed(cfg, pt.index, rep, STREAM_EST)[0]), ref)
    t0 = time.perf_counter()
    est = estimate_dem(data, DemSkeleton.from_dem(ref), _options(cfg))
    timing["seconds_estimate"] = time.perf_counter() - t0
    cmp = compare_dems(ref, est)
    errs = [abs(r.p_est - r.p_ref) for r in cmp.rows]
    row = {"experiment": cfg.name, "point": pt.index, "rep": rep, "family": cfg.family, "n_est": pt.shots,
           "mechanisms": len(ref.mechanisms), "mean_abs_err": float(np.mean(errs)),
           "max_rel_err": cmp.max_rel_err(), "status": "ok"}
    return TaskResult([row], timing)


_RUNNERS = {
    "logical-sweep": _run_logical,
    "rounds-sweep": _run_logical,
    "fluctuation-heatmap": _run_logical,
    "dem-accuracy": _run_accuracy,
    "runtime-scaling": _run_runtime,
    "convergence": _run_convergence,
}


def run_task(args) -> TaskResult:
    cfg, pt, rep = args
    timing = {"point": pt.index, "rep": rep, "seconds_estimate": None}
    t0 = time.perf_counter()
    try:
        res = _RUNNERS[cfg.kind](cfg, pt, rep, timing)
    except Exception as exc:  # recorded in-row; the sweep carries on
        row = {"experiment": cfg.name, "point": pt.index, "rep": rep, "family": cfg.family,
               "d": pt.d, "rounds": pt.rounds, "x": pt.x, "y": pt.y, "n_est": pt.shots or cfg.shots_est,
               "status": f"error: {type(exc).__name__}: {exc}".replace("\n", " ")}
        res = TaskResult([row], timing)
    timing["seconds_total"] = time.perf_counter() - t0
    return res


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[dict]
    timings: list[dict]
    mechanisms: list[dict]
    outdir: str | None = None

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.rows if r.get("status") != "ok"]


def run_experiment(cfg: ExperimentConfig, outdir=None, workers: int = 1) -> ExperimentResult:
    """Run every grid point and repetition of ``cfg``.

    With ``outdir`` set, writes ``config.toml``, ``results.csv``,
    ``timings.csv`` and, for accuracy runs, ``mechanisms.csv``. An empty grid
    produces a header-only ``results.csv``.
    """
    cfg.validate()
    tasks = [(cfg, pt, rep) for pt in grid_points(cfg) for rep in range(cfg.repetitions)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_task, tasks))
    else:
        parts = [run_task(t) for t in tasks]
    rows = [r for p in parts for r in p.rows]
    timings = [p.timing for p in parts]
    mechs = [m for p in parts for m in p.mechanisms]
    result = ExperimentResult(cfg, rows, timings, mechs, None if outdir is None else str(outdir))
    if outdir is not None:
        write_results(result, outdir)
    return result


def write_results(result: ExperimentResult, outdir) -> None:
    os.makedirs(outdir, exist_ok=True)
    files = {
        "config.toml": result.config.to_toml(),
        "results.csv": rows_to_csv(result.rows, column_set(result.config.kind)),
        "timings.csv": rows_to_csv(result.timings, TIMING_COLUMNS),
    }
    if result.config.kind == "dem-accuracy":
        files["mechanisms.csv"] = rows_to_csv(result.mechanisms, MECHANISM_COLUMNS)
    for name, text in files.items():
        with open(os.path.join(outdir, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
