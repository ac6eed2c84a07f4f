"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--shots 1000000] [--repeat 5] [--end-to-end]

Kernel timings call both implementations directly on the same inputs. With
``--end-to-end`` the script also samples and estimates a d=5 surface-code DEM
in two subprocesses, one with ``DEMEST_PURE_PYTHON=1``.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from demest import _kernels_py

try:
    from demest import _kernels
except ImportError:
    _kernels = None

END_TO_END = """
import json, time
from demest import kernels
from demest.circuit import NoiseConfig
from demest.estimator import DemSkeleton, estimate_dem
from demest.harness.families import build_family, family_bases
from demest.refdem import derive_dem
from demest.sampler import sample_shots
c = build_family("surface", 5, 3, NoiseConfig(p_data=0.005, p_anc=0.005, p_gate=0.005))
ref = derive_dem(c, family_bases("surface", [])[0])
t0 = time.perf_counter(); data = sample_shots(c, {shots}, 7); t1 = time.perf_counter()
data = data.select_detectors(ref.detector_ids, ref.observable_ids)
estimate_dem(data, DemSkeleton.from_dem(ref)); t2 = time.perf_counter()
print(json.dumps({{"backend": kernels.BACKEND, "sample_s": t1 - t0, "estimate_s": t2 - t1, "mechanisms": len(ref.mechanisms)}}))
"""


def make_inputs(shots: int, rng):
    rows = 64
    w = (shots + 63) // 64
    words = rng.integers(0, np.iinfo(np.uint64).max, size=(rows, w), dtype=np.uint64, endpoint=True)
    if shots & 63:
        words[:, -1] &= np.uint64((1 << (shots & 63)) - 1)
    sets = np.full((512, 4), -1, dtype=np.int64)
    for s in range(512):
        k = int(rng.integers(2, 5))
        sets[s, :k] = np.sort(rng.choice(rows, k, replace=False))
    positions = np.ascontiguousarray(rng.integers(0, shots, size=shots // 100), dtype=np.int64)
    idx = np.arange(7, dtype=np.int64)
    d = rng.uniform(0.1, 5.0, size=(12, 12))
    return {
        "words": np.ascontiguousarray(words),
        "row": np.ascontiguousarray(words[0].copy()),
        "sets": sets,
        "positions": positions,
        "idx": idx,
        "dist": np.ascontiguousarray((d + d.T) / 2),
        "bdist": rng.uniform(0.1, 5.0, size=12),
    }


def cases(mod, x, shots):
    return {
        "xor_bits": lambda: mod.xor_bits(x["row"], x["positions"]),
        "coincidence_counts (512 sets)": lambda: mod.coincidence_counts(x["words"], x["sets"]),
        "pattern_counts (7 detectors)": lambda: mod.pattern_counts(x["words"], x["idx"], shots),
        "match_dp (12 defects)": lambda: mod.match_dp(x["dist"], x["bdist"]),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)

    x = make_inputs(args.shots, np.random.default_rng(0))
    py_cases = cases(_kernels_py, x, args.shots)
    cy_cases = cases(_kernels, x, args.shots) if _kernels is not None else {}
    print(f"{'kernel':<32}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, fn in py_cases.items():
        t_py = min(timeit.repeat(fn, number=1, repeat=args.repeat)) * 1e3
        if name in cy_cases:
            t_cy = min(timeit.repeat(cy_cases[name], number=1, repeat=args.repeat)) * 1e3
            print(f"{name:<32}{t_py:>14.2f}{t_cy:>14.2f}{t_py / t_cy:>9.1f}x")
        else:
            print(f"{name:<32}{t_py:>14.2f}{'n/a':>14}{'':>10}")

    if args.end_to_end:
        code = END_TO_END.format(shots=min(args.shots, 200_000))
        for pure in (False, True):
            env = dict(os.environ)
            env.pop("DEMEST_PURE_PYTHON", None)
            if pure:
                env["DEMEST_PURE_PYTHON"] = "1"
            out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
            r = json.loads(out.stdout.strip().splitlines()[-1])
            print(f"end-to-end surface d5 r3 [{r['backend']:>6}]: sample {r['sample_s']:.2f} s, "
                  f"estimate {r['estimate_s']:.2f} s ({r['mechanisms']} mechanisms)")


if __name__ == "__main__":
    main()
