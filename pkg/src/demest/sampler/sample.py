"""Seeded, batched Monte Carlo sampling of detection events."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..circuit.ir import Circuit
from .data import DetectionData
from .frame import FrameSimulator, random_noise

DEFAULT_BATCH = 1 << 18


def batch_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for batch ``index``; independent of how batches are scheduled."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _run_batch(sim: FrameSimulator, seed: int, index: int, shots: int):
    rng = batch_rng(seed, index)
    return sim.run(shots, random_noise(rng), rng)


def _worker(args):
    circuit, seed, index, shots = args
    return _run_batch(FrameSimulator(circuit), seed, index, shots)


def sample_shots(
    circuit: Circuit,
    shots: int,
    seed: int = 0,
    *,
    batch_size: int = DEFAULT_BATCH,
    workers: int = 1,
    simulator: FrameSimulator | None = None,
) -> DetectionData:
    """Sample ``shots`` shots of ``circuit``.

    Shots are split into batches of ``batch_size`` (a multiple of 64); batch
    ``i`` draws from ``SeedSequence(seed, spawn_key=(i,))``. The output depends
    only on ``(circuit, shots, seed, batch_size)``, not on ``workers``.
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    if batch_size <= 0 or batch_size % 64:
        raise ValueError("batch_size must be a positive multiple of 64")
    sim = simulator or FrameSimulator(circuit)
    sizes = [min(batch_size, shots - s) for s in range(0, shots, batch_size)]
    if workers > 1 and len(sizes) > 1:
        jobs = [(circuit, seed, i, n) for i, n in enumerate(sizes)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_worker, jobs))
    else:
        parts = [_run_batch(sim, seed, i, n) for i, n in enumerate(sizes)]
    D, O = len(sim.detector_records), len(sim.observable_records)
    dets = np.hstack([p[0] for p in parts]) if parts else np.zeros((D, 0), np.uint64)
    obs = np.hstack([p[1] for p in parts]) if parts else np.zeros((O, 0), np.uint64)
    return DetectionData(dets, obs, shots, {"seed": seed, "batch_size": batch_size})
