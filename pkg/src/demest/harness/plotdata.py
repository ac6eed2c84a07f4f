"""Turn a results directory into per-view CSV files plus a schema sidecar.

Views by experiment kind:

* logical-sweep: ``curves.csv`` (logical rate against physical rate, per d)
* rounds-sweep: ``rounds.csv``
* fluctuation-heatmap: ``heatmap_<quantity>_d<d>.csv`` matrices with x values
  as rows and y values as columns, plus ``fluctuation_points.csv``
* dem-accuracy: ``relerr_bars.csv`` and ``relerr_summary.csv``
* runtime-scaling: ``runtime.csv`` and ``runtime_fit.json``
* convergence: ``convergence.csv`` and ``convergence_fit.json``

``schema.json`` documents every column of every emitted CSV.
"""

from __future__ import annotations

import csv
import json
import math
import os
from collections import defaultdict

import numpy as np

from .analysis import loglog_slope
from .config import ExperimentConfig
from .runner import MECHANISM_COLUMNS, improvement_pct

DESCRIPTIONS = {
    "d": "code distance",
    "rounds": "syndrome extraction rounds",
    "x": "value of grid axis x",
    "y": "value of grid axis y",
    "basis": "detector basis of the decoded or estimated model",
    "reps": "number of repetitions averaged",
    "pL_ref": "logical error rate with the reference model (mean over repetitions)",
    "pL_ref_std": "standard deviation of pL_ref over repetitions",
    "stderr_ref": "binomial standard error of pL_ref",
    "pL_est": "logical error rate with the estimated model (mean over repetitions)",
    "pL_est_std": "standard deviation of pL_est over repetitions",
    "stderr_est": "binomial standard error of pL_est",
    "pL_true": "logical error rate with the exact model of the fluctuating circuit",
    "improvement_pct": "|pL_ref - pL_est| / pL_ref in percent, of the repetition means; empty when pL_ref = 0",
    "mean_improvement_pct": "mean over repetitions of the per-repetition improvement in percent",
    "est_le_ref": "1 when mean pL_est <= mean pL_ref",
    "point": "grid point index",
    "rep": "repetition index",
    "signature": "detectors and observables flipped by the mechanism",
    "class": "boundary, bulk or hyperedge",
    "order": "number of detectors in the signature",
    "p_ref": "reference probability",
    "p_est": "estimated probability",
    "rel_err": "|p_est - p_ref| / p_ref",
    "max_boundary": "max relative error over boundary mechanisms",
    "max_bulk": "max relative error over bulk mechanisms",
    "max_hyperedge": "max relative error over hyperedges",
    "max_order4": "max relative error over four-detector mechanisms",
    "max_all": "max relative error over all mechanisms",
    "mean_all": "mean relative error over all mechanisms",
    "qubits": "total qubit count of the circuit",
    "mean_seconds": "mean estimation wall-clock time in seconds",
    "std_seconds": "standard deviation of the estimation time",
    "n_est": "shots used for estimation",
    "mean_abs_err": "mean over repetitions of the mean absolute probability error",
    "std_abs_err": "standard deviation of the absolute error over repetitions",
}

REQUIRED = {
    "logical-sweep": ["d", "x", "y", "status", "pL_ref", "stderr_ref", "pL_est", "stderr_est"],
    "rounds-sweep": ["d", "rounds", "x", "y", "status", "pL_ref", "pL_est"],
    "fluctuation-heatmap": ["d", "x", "y", "status", "pL_ref", "pL_est"],
    "dem-accuracy": ["point", "rep", "basis", "status", "max_boundary", "max_bulk", "max_hyperedge", "max_all"],
    "runtime-scaling": ["point", "rep", "d", "qubits", "status"],
    "convergence": ["n_est", "status", "mean_abs_err"],
}


class SchemaError(ValueError):
    pass


def _read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _num(v):
    if v in ("", None):
        return None
    try:
        return int(v)
    except ValueError:
        return float(v)


def _write(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])


def _check(rows, header, kind) -> None:
    missing = [c for c in REQUIRED[kind] if c not in header]
    if missing:
        raise SchemaError(f"results for {kind} lack column(s): {', '.join(missing)}")


def _mean(vals):
    vals = [v for v in vals if v is not None]
    return float(np.mean(vals)) if vals else None


def _std(vals):
    vals = [v for v in vals if v is not None]
    return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0 if vals else None


def _grouped(rows, keys):
    groups = defaultdict(list)
    for r in rows:
        if r["status"] == "ok":
            groups[tuple(_num(r[k]) for k in keys)].append(r)
    return sorted(groups.items(), key=lambda kv: tuple(-math.inf if v is None else v for v in kv[0]))


def _curves(rows, out, schema):
    header = ["d", "x", "y", "reps", "pL_ref", "stderr_ref", "pL_est", "stderr_est", "improvement_pct"]
    data = []
    for (d, x, y), g in _grouped(rows, ["d", "x", "y"]):
        ref = _mean(_num(r["pL_ref"]) for r in g)
        est = _mean(_num(r["pL_est"]) for r in g)
        # mean of independent repetitions: standard errors combine in quadrature / M
        se_ref = math.sqrt(sum(_num(r["stderr_ref"]) ** 2 for r in g)) / len(g)
        se_est = math.sqrt(sum(_num(r["stderr_est"]) ** 2 for r in g)) / len(g)
        data.append([d, x, y, len(g), ref, se_ref, est, se_est, improvement_pct(ref, est)])
    _emit(out, "curves.csv", header, data, schema, "logical rate against physical rate, one curve per d")


def _rounds(rows, out, schema):
    header = ["d", "rounds", "x", "y", "reps", "pL_ref", "pL_ref_std", "pL_est", "pL_est_std", "improvement_pct"]
    data = []
    for (d, r_, x, y), g in _grouped(rows, ["d", "rounds", "x", "y"]):
        ref = [_num(r["pL_ref"]) for r in g]
        est = [_num(r["pL_est"]) for r in g]
        data.append([d, r_, x, y, len(g), _mean(ref), _std(ref), _mean(est), _std(est),
                     improvement_pct(_mean(ref), _mean(est))])
    _emit(out, "rounds.csv", header, data, schema, "logical rate against round count, one bar pair per (d, rounds)")


def _heatmap(rows, out, schema):
    header = ["d", "x", "y", "reps", "pL_ref", "pL_est", "pL_est_std", "pL_true", "improvement_pct",
              "mean_improvement_pct", "est_le_ref"]
    data, cells = [], defaultdict(dict)
    for (d, x, y), g in _grouped(rows, ["d", "x", "y"]):
        ref = _mean(_num(r["pL_ref"]) for r in g)
        est = _mean(_num(r["pL_est"]) for r in g)
        true = _mean(_num(r.get("pL_true")) for r in g)
        per = [improvement_pct(_num(r["pL_ref"]), _num(r["pL_est"])) for r in g]
        rec = [d, x, y, len(g), ref, est, _std([_num(r["pL_est"]) for r in g]), true,
               improvement_pct(ref, est), _mean(per), int(est <= ref)]
        data.append(rec)
        cells[d][(x, y)] = dict(zip(header, rec))
    _emit(out, "fluctuation_points.csv", header, data, schema, "one row per (d, x, y) cell")
    for d, cell in cells.items():
        xs = sorted({k[0] for k in cell})
        ys = sorted({k[1] for k in cell})
        for q in ("improvement_pct", "pL_est_std", "ratio"):
            mat = []
            for x in xs:
                line = [x]
                for y in ys:
                    c = cell.get((x, y))
                    if c is None:
                        line.append(None)
                    elif q == "ratio":
                        line.append(c["pL_ref"] / c["pL_est"] if c["pL_est"] else None)
                    else:
                        line.append(c[q])
                mat.append(line)
            name = f"heatmap_{q}_d{d}.csv"
            _write(os.path.join(out, name), ["x\\y"] + ys, mat)
            schema[name] = {"description": f"matrix of {q} for d={d}: rows are x values, columns are y values",
                            "columns": {"x\\y": "x value of the row", "<y>": "value of the cell at that y"}}


def _accuracy(rows, mechs, out, schema):
    header = ["point", "rep", "basis", "max_boundary", "max_bulk", "max_hyperedge", "max_all"]
    data = [[_num(r["point"]), _num(r["rep"]), r["basis"]] + [_num(r[k]) for k in header[3:]]
            for r in rows if r["status"] == "ok"]
    _emit(out, "relerr_summary.csv", header, data, schema, "per-class maximum relative error")
    if mechs is not None:
        data = [[m[c] for c in MECHANISM_COLUMNS] for m in mechs]
        _emit(out, "relerr_bars.csv", MECHANISM_COLUMNS, data, schema, "relative error of every mechanism")


def _runtime(rows, timings, out, schema):
    secs = {(t["point"], t["rep"]): _num(t["seconds_estimate"]) for t in (timings or [])}
    header = ["d", "qubits", "reps", "mean_seconds", "std_seconds"]
    data = []
    for (d, q), g in _grouped(rows, ["d", "qubits"]):
        s = [secs.get((r["point"], r["rep"])) for r in g]
        data.append([d, q, len(g), _mean(s), _std(s)])
    _emit(out, "runtime.csv", header, data, schema, "estimation time against qubit count")
    usable = [(r[1], r[3]) for r in data if r[3]]
    fit = {"exponent": loglog_slope(*zip(*usable)) if len(usable) > 1 else None}
    with open(os.path.join(out, "runtime_fit.json"), "w") as fh:
        json.dump(fit, fh, indent=2)
        fh.write("\n")
    schema["runtime_fit.json"] = {"description": "log-log fit of mean_seconds against qubits",
                                  "columns": {"exponent": "fitted power of the qubit count"}}


def _convergence(rows, out, schema):
    header = ["n_est", "reps", "mean_abs_err", "std_abs_err"]
    data = []
    for (n,), g in _grouped(rows, ["n_est"]):
        e = [_num(r["mean_abs_err"]) for r in g]
        data.append([n, len(g), _mean(e), _std(e)])
    _emit(out, "convergence.csv", header, data, schema, "estimation error against shot count")
    fit = {"slope": loglog_slope([r[0] for r in data], [r[2] for r in data]) if len(data) > 1 else None}
    with open(os.path.join(out, "convergence_fit.json"), "w") as fh:
        json.dump(fit, fh, indent=2)
        fh.write("\n")
    schema["convergence_fit.json"] = {"description": "log-log fit of mean_abs_err against n_est",
                                      "columns": {"slope": "fitted power of the shot count"}}


def _emit(out, name, header, data, schema, description):
    _write(os.path.join(out, name), header, data)
    schema[name] = {"description": description, "columns": {c: DESCRIPTIONS.get(c, c) for c in header}}


def emit_plot_data(results_dir, outdir=None, kind: str | None = None) -> dict:
    """Write the plot views of the results in ``results_dir``.

    ``kind`` defaults to the one recorded in ``config.toml``. Output goes to
    ``outdir`` (default ``<results_dir>/plot``). Returns the schema mapping,
    which is also written to ``schema.json``.

    Raises
    ------
    SchemaError
        If ``results.csv`` lacks a column the view needs.
    """
    if kind is None:
        kind = ExperimentConfig.read(os.path.join(results_dir, "config.toml")).kind
    if kind not in REQUIRED:
        raise SchemaError(f"no plot views for kind {kind!r}")
    path = os.path.join(results_dir, "results.csv")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        rows = list(reader)
    _check(rows, header, kind)
    out = outdir or os.path.join(results_dir, "plot")
    os.makedirs(out, exist_ok=True)
    schema: dict = {}
    if kind == "logical-sweep":
        _curves(rows, out, schema)
    elif kind == "rounds-sweep":
        _rounds(rows, out, schema)
    elif kind == "fluctuation-heatmap":
        _heatmap(rows, out, schema)
    elif kind == "dem-accuracy":
        mp = os.path.join(results_dir, "mechanisms.csv")
        _accuracy(rows, _read_csv(mp) if os.path.exists(mp) else None, out, schema)
    elif kind == "runtime-scaling":
        tp = os.path.join(results_dir, "timings.csv")
        _runtime(rows, _read_csv(tp) if os.path.exists(tp) else None, out, schema)
    else:
        _convergence(rows, out, schema)
    with open(os.path.join(out, "schema.json"), "w", encoding="utf-8") as fh:
        json.dump(schema, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return schema
