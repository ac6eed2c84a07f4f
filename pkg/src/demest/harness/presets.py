"""Named experiment presets at desk scale.

Shot counts are shrunk where the full-size runs take hours on one core; the
``full`` variants keep the original counts and grids. Every preset pins its
seed so reruns are bit-for-bit identical.
"""

from __future__ import annotations

from .config import ExperimentConfig

_PRESETS: dict[str, dict] = {
    # phenomenological surface code, data rate x and ancilla rate y fluctuating
    "surface-fluctuation-d3": dict(
        kind="fluctuation-heatmap", family="surface", distances=[3], rounds=3,
        noise={"p_data": "x", "p_anc": "y", "sigma": 1e-3},
        grid_x=[0.01, 0.02, 0.03], grid_y=[0.01, 0.02, 0.03],
        shots_est=500_000, shots_dec=500_000, seed=11),
    "surface-fluctuation-d3-wide": dict(
        kind="fluctuation-heatmap", family="surface", distances=[3], rounds=3,
        noise={"p_data": "x", "p_anc": "y", "sigma": 5e-3},
        grid_x=[0.01, 0.02, 0.03], grid_y=[0.01, 0.02, 0.03],
        shots_est=500_000, shots_dec=500_000, seed=12),
    "surface-fluctuation-d5": dict(
        kind="fluctuation-heatmap", family="surface", distances=[5], rounds=5,
        noise={"p_data": "x", "p_anc": "y", "sigma": 1e-3},
        grid_x=[0.01, 0.02, 0.03], grid_y=[0.01, 0.02, 0.03],
        shots_est=500_000, shots_dec=500_000, seed=13),
    # circuit-level: qubit rate x on data and ancillas, gate rate y, averaged over configurations
    "surface-fluctuation-gates": dict(
        kind="fluctuation-heatmap", family="surface", distances=[3], rounds=3,
        noise={"p_data": "x", "p_anc": "x", "p_gate": "y", "sigma": 5e-4},
        grid_x=[0.002, 0.004, 0.006], grid_y=[0.002, 0.004, 0.006],
        repetitions=10, shots_est=5_000_000, shots_dec=5_000_000, seed=14),
    # gate errors only, logical rate against round count
    "repcode-bare-rounds": dict(
        kind="rounds-sweep", family="repetition-bare", distances=[3], rounds_list=[1, 2, 3, 4, 5, 6, 7, 8],
        noise={"p_gate": 0.025}, repetitions=5, shots_est=500_000, shots_dec=500_000, seed=21),
    "repcode-bare-rounds-d5-d7": dict(
        kind="rounds-sweep", family="repetition-bare", distances=[5, 7], rounds_list=[1, 3, 5, 7, 9],
        noise={"p_gate": 0.025}, repetitions=5, shots_est=500_000, shots_dec=500_000, seed=22),
    "repcode-bare-sweep": dict(
        kind="logical-sweep", family="repetition-bare", distances=[3, 5, 7], rounds="d",
        noise={"p_data": "x", "p_anc": "x", "p_gate": 0.025},
        grid_x=[0.02, 0.04, 0.06, 0.08, 0.10, 0.12],
        shots_est=1_000_000, shots_dec=1_000_000, seed=31),
    "surface-threshold": dict(
        kind="logical-sweep", family="surface", distances=[3, 5], rounds="d",
        noise={"p_data": "x", "p_anc": "x", "p_gate": "x"},
        grid_x=[0.004, 0.006, 0.008, 0.010, 0.012, 0.014, 0.016],
        shots_est=200_000, shots_dec=200_000, seed=41),
    "steane-threshold": dict(
        kind="logical-sweep", family="repetition-steane", distances=[3, 5], rounds="d",
        noise={"p_data": "x", "p_anc": "x", "p_gate": "x"},
        grid_x=[0.03, 0.045, 0.06, 0.075, 0.09, 0.105],
        shots_est=1_000_000, shots_dec=1_000_000, seed=51),
    "steane-dem-accuracy": dict(
        kind="dem-accuracy", family="repetition-steane", distances=[3], rounds=3,
        noise={"p_data": 0.05, "p_anc": 0.08, "p_gate": 0.025},
        shots_est=10_000_000, shots_dec=1, seed=5),
    "color-dem-accuracy": dict(
        kind="dem-accuracy", family="color", distances=[5], rounds=2, basis="Z,X",
        noise={"p_gate": 2e-3, "p_idle": 2e-3, "p_meas": 2e-3, "p_reset": 2e-3, "p_init": 2e-3},
        shots_est=10_000_000, shots_dec=1, seed=1),
    "color-disambiguation-d3": dict(
        kind="dem-accuracy", family="color", distances=[3], rounds=1, basis="Z",
        noise={"p_gate": 1e-3, "p_idle": 1e-3, "p_meas": 1e-3, "p_reset": 1e-3, "p_init": 1e-3},
        shots_est=20_000_000, shots_dec=1, seed=1),
    # p = 0.001 for both distances (the d = 7 panel text disagrees with its own caption)
    "color-rounds": dict(
        kind="rounds-sweep", family="color", distances=[5, 7], rounds_list=[1, 2, 3, 4, 5, 6, 7],
        noise={"p_gate": 1e-3, "p_idle": 1e-3, "p_meas": 1e-3, "p_reset": 1e-3, "p_init": 1e-3},
        shots_est=1_000_000, shots_dec=1_000_000, seed=61),
    "color-sweep": dict(
        kind="logical-sweep", family="color", distances=[5, 7, 9], rounds="d",
        noise={"p_gate": "x", "p_idle": "x", "p_meas": "x", "p_reset": "x", "p_init": "x"},
        grid_x=[0.001, 0.002, 0.004, 0.006],
        shots_est=1_000_000, shots_dec=1_000_000, seed=62),
    "runtime-scaling": dict(
        kind="runtime-scaling", family="surface", distances=[3, 5, 7, 9, 11, 13, 15, 17, 19], rounds=3,
        noise={"p_data": 0.01, "p_anc": 0.01, "p_gate": 0.01},
        repetitions=5, shots_est=100_000, shots_dec=1, seed=71),
    "runtime-scaling-desk": dict(
        kind="runtime-scaling", family="surface", distances=[3, 5, 7, 9, 11, 13], rounds=3,
        noise={"p_data": 0.01, "p_anc": 0.01, "p_gate": 0.01},
        repetitions=3, shots_est=100_000, shots_dec=1, seed=72),
    "convergence": dict(
        kind="convergence", family="single-mechanism", distances=[1], rounds=1,
        noise={"p_data": 0.05}, shots_list=[10_000, 100_000, 1_000_000, 10_000_000],
        repetitions=20, shots_est=1, shots_dec=1, seed=81),
}

_FULL = {
    "surface-fluctuation-d3": dict(shots_est=5_000_000, shots_dec=5_000_000),
    "surface-fluctuation-d5": dict(shots_est=5_000_000, shots_dec=5_000_000),
    "surface-fluctuation-gates": dict(repetitions=50),
    "repcode-bare-rounds": dict(repetitions=25),
    "repcode-bare-rounds-d5-d7": dict(repetitions=50),
    "steane-threshold": dict(distances=[3, 5, 7, 9], shots_est=5_000_000, shots_dec=5_000_000),
    "color-dem-accuracy": dict(shots_est=50_000_000),
    "runtime-scaling": dict(repetitions=400),
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def get_preset(name: str, full: bool = False) -> ExperimentConfig:
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    kw = dict(_PRESETS[name], name=name)
    if full:
        kw.update(_FULL.get(name, {}))
    return ExperimentConfig(**kw)
