"""Command-line interface.

Exit status is 0 on success, 1 on a usage error (bad arguments, malformed
config or input files) and 2 when a run fails.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..circuit import CircuitError, NoiseConfig, parse_circuit, serialize_circuit
from ..decoder import logical_error_rate
from ..estimator import DemSkeleton, EstimatorOptions, estimate_dem
from ..refdem import DEM, DemFormatError, compare_dems, derive_dem
from ..sampler import DetectionData, sample_shots
from .config import FAMILIES, ConfigError, ExperimentConfig
from .families import build_family
from .plotdata import SchemaError, emit_plot_data
from .presets import get_preset, preset_names
from .runner import run_experiment

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_circuit(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_circuit(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read circuit: {exc}") from None


def _read_dem(path) -> DEM:
    try:
        return DEM.read(path)
    except OSError as exc:
        raise UsageError(f"cannot read DEM: {exc}") from None


def _read_dets(path) -> DetectionData:
    try:
        return DetectionData.read(path)
    except OSError as exc:
        raise UsageError(f"cannot read detection events: {exc}") from None


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_build(a):
    noise = NoiseConfig(p_data=a.p_data, p_anc=a.p_anc, p_gate=a.p_gate, p_idle=a.p_idle, p_meas=a.p_meas,
                        p_reset=a.p_reset, p_init=a.p_init, sigma=a.sigma, seed_data=a.seed,
                        seed_anc=a.seed + 1, seed_gate=a.seed + 2)
    rounds = a.d if a.rounds is None else a.rounds
    _write_text(a.out, serialize_circuit(build_family(a.family, a.d, rounds, noise, a.checks)))


def cmd_sample(a):
    circuit = _read_circuit(a.circuit)
    data = sample_shots(circuit, a.shots, a.seed, workers=a.workers)
    if a.basis:
        ref = derive_dem(circuit, a.basis)
        data = data.select_detectors(ref.detector_ids, ref.observable_ids)
    data.write(a.out, a.format)


def cmd_derive(a):
    dem = derive_dem(_read_circuit(a.circuit), a.basis)
    _write_text(a.out, dem.to_text())


def cmd_estimate(a):
    skeleton = DemSkeleton.from_dem(_read_dem(a.skeleton))
    data = _read_dets(a.dets)
    if (data.detector_count, data.observable_count) != (skeleton.detector_count, skeleton.observable_count):
        raise UsageError(
            f"detection data has {data.detector_count} detectors / {data.observable_count} observables, "
            f"skeleton expects {skeleton.detector_count} / {skeleton.observable_count}")
    opts = EstimatorOptions(region_order=a.order, disambiguation_order=a.disambiguation_order)
    dem, report = estimate_dem(data, skeleton, opts, with_report=True)
    for where, reason in report.flags:
        print(f"warning: {where}: {reason}", file=sys.stderr)
    _write_text(a.out, dem.to_text())


def cmd_decode(a):
    dem = _read_dem(a.dem)
    data = _read_dets(a.dets)
    if (data.detector_count, data.observable_count) != (dem.detector_count, dem.observable_count):
        raise UsageError("detection data and DEM disagree on detector/observable counts")
    _write_text(a.out, logical_error_rate(dem, data, a.backend).to_json())


def cmd_compare(a):
    rep = compare_dems(_read_dem(a.reference), _read_dem(a.estimated))
    if a.out:
        rep.write_csv(a.out)
    print(json.dumps(rep.summary(), indent=2, sort_keys=True))


def cmd_experiment(a):
    if a.list:
        print("\n".join(preset_names()))
        return
    if a.preset is None and a.config is None:
        raise UsageError("give a preset name, --config, or both")
    try:
        base = get_preset(a.preset, a.full) if a.preset else None
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    cfg = ExperimentConfig.read(a.config, base) if a.config else base
    if a.outdir is None:
        raise UsageError("--outdir is required")
    result = run_experiment(cfg, a.outdir, workers=a.workers)
    emit_plot_data(a.outdir)
    for row in result.failures:
        print(f"point {row['point']} rep {row['rep']}: {row['status']}", file=sys.stderr)
    print(f"{len(result.rows)} rows written to {a.outdir}")
    # every point ran and was written; failed points still make the run a failure
    return EXIT_RUNTIME if result.failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="demest", description="Estimate detector error models from detection events.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="emit a memory-experiment circuit")
    b.add_argument("family", choices=FAMILIES)
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--rounds", type=int, help="defaults to d")
    b.add_argument("--checks", choices=("x", "both"), default="x")
    for name in ("p-data", "p-anc", "p-gate", "p-idle", "p-meas", "p-reset", "p-init", "sigma"):
        b.add_argument(f"--{name}", type=float, default=0.0)
    b.add_argument("--seed", type=int, default=1, help="rate-fluctuation seed")
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("sample", help="sample detection events")
    s.add_argument("--circuit", required=True)
    s.add_argument("--shots", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("01", "b8"), default="b8")
    s.add_argument("--basis", choices=("Z", "X"), help="keep only detectors and observables of this basis")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sample)

    r = sub.add_parser("derive-dem", help="exact reference DEM of a circuit")
    r.add_argument("--circuit", required=True)
    r.add_argument("--basis", choices=("Z", "X"))
    r.add_argument("--out")
    r.set_defaults(func=cmd_derive)

    e = sub.add_parser("estimate", help="estimate a DEM from detection events")
    e.add_argument("--dets", required=True)
    e.add_argument("--skeleton", required=True, help="DEM file whose mechanisms fix the structure")
    e.add_argument("--order", type=int, default=7, help="truncation order of region equations")
    e.add_argument("--disambiguation-order", type=int, default=2)
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    d = sub.add_parser("decode", help="logical error rate of a DEM on detection events")
    d.add_argument("--dem", required=True)
    d.add_argument("--dets", required=True)
    d.add_argument("--backend", choices=("pymatching", "exact"), default="pymatching")
    d.add_argument("--out")
    d.set_defaults(func=cmd_decode)

    c = sub.add_parser("compare-dems", help="per-mechanism relative errors")
    c.add_argument("--reference", required=True)
    c.add_argument("--estimated", required=True)
    c.add_argument("--out", help="CSV of per-mechanism errors")
    c.set_defaults(func=cmd_compare)

    x = sub.add_parser("experiment", help="run a preset or config file")
    x.add_argument("preset", nargs="?")
    x.add_argument("--config", help="TOML file; its values override the preset")
    x.add_argument("--outdir")
    x.add_argument("--workers", type=int, default=1)
    x.add_argument("--full", action="store_true", help="use full-size shot counts")
    x.add_argument("--list", action="store_true", help="list presets")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        status = args.func(args)
    except (UsageError, ConfigError, CircuitError, DemFormatError, SchemaError) as exc:
        print(f"demest: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # malformed detection files and out-of-range parameters
        print(f"demest: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"demest: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK if status is None else status


if __name__ == "__main__":
    sys.exit(main())
