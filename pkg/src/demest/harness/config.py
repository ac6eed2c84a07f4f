"""Experiment configuration and its TOML file format.

Layout::

    [experiment]   name, kind, family, distances, rounds, rounds_list, checks,
                   basis, repetitions, seed, shots_est, shots_dec, shots_list
    [noise]        p_data, p_anc, p_gate, p_idle, p_meas, p_reset, p_init, sigma
    [grid]         x, y
    [estimator]    region_order, disambiguation_order, bounds
    [decoder]      backend

A noise field is a number or the name of a grid axis (``"x"`` / ``"y"``).
Unknown sections or keys are rejected.
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib
import tomli_w

KINDS = ("logical-sweep", "rounds-sweep", "dem-accuracy", "fluctuation-heatmap", "runtime-scaling", "convergence")
FAMILIES = ("repetition-bare", "repetition-steane", "surface", "color", "single-mechanism")
NOISE_FIELDS = ("p_data", "p_anc", "p_gate", "p_idle", "p_meas", "p_reset", "p_init", "sigma")
AXES = ("x", "y")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str = "custom"
    kind: str = "logical-sweep"
    family: str = "surface"
    distances: list[int] = field(default_factory=lambda: [3])
    # "d" ties the round count to the distance
    rounds: int | str = "d"
    rounds_list: list[int] = field(default_factory=list)
    checks: str = "x"
    # "" picks the family default; several bases as "Z,X"
    basis: str = ""
    repetitions: int = 1
    seed: int = 1
    shots_est: int = 100_000
    shots_dec: int = 100_000
    shots_list: list[int] = field(default_factory=list)
    noise: dict = field(default_factory=dict)
    grid_x: list[float] = field(default_factory=list)
    grid_y: list[float] = field(default_factory=list)
    region_order: int = 7
    disambiguation_order: int = 2
    bounds: list[float] = field(default_factory=lambda: [1e-12, 0.6])
    decoder: str = "pymatching"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if not self.distances or any(int(d) != d or d < 1 for d in self.distances):
            raise ConfigError("distances must be a non-empty list of positive integers")
        if not (self.rounds == "d" or (isinstance(self.rounds, int) and self.rounds >= 1)):
            raise ConfigError("rounds must be a positive integer or \"d\"")
        if any(r < 1 for r in self.rounds_list):
            raise ConfigError("rounds_list entries must be positive")
        if self.kind == "rounds-sweep" and not self.rounds_list:
            raise ConfigError("rounds-sweep needs rounds_list")
        if self.kind == "convergence" and not self.shots_list:
            raise ConfigError("convergence needs shots_list")
        for name in ("repetitions", "shots_est", "shots_dec", "region_order", "disambiguation_order"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if any(n < 1 for n in self.shots_list):
            raise ConfigError("shots_list entries must be positive")
        if self.checks not in ("x", "both"):
            raise ConfigError("checks must be \"x\" or \"both\"")
        for b in self.bases:
            if b not in ("Z", "X"):
                raise ConfigError(f"basis {b!r} must be Z or X")
        for k, v in self.noise.items():
            if k not in NOISE_FIELDS:
                raise ConfigError(f"unknown noise field {k!r}")
            if isinstance(v, str):
                if v not in AXES:
                    raise ConfigError(f"noise field {k} = {v!r}: strings must name a grid axis (x or y)")
            elif not isinstance(v, (int, float)) or v < 0:
                raise ConfigError(f"noise field {k} must be a non-negative number or a grid axis")
        if len(self.bounds) != 2 or not 0 < self.bounds[0] < self.bounds[1]:
            raise ConfigError("bounds must be [lo, hi] with 0 < lo < hi")
        if self.decoder not in ("pymatching", "exact"):
            raise ConfigError("decoder must be pymatching or exact")

    @property
    def bases(self) -> list[str]:
        return [b.strip().upper() for b in self.basis.split(",") if b.strip()]

    def uses_axis(self, axis: str) -> bool:
        return any(v == axis for v in self.noise.values())

    # -- TOML -------------------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        return {
            "experiment": {k: d[k] for k in (
                "name", "kind", "family", "distances", "rounds", "rounds_list", "checks", "basis",
                "repetitions", "seed", "shots_est", "shots_dec", "shots_list")},
            "noise": dict(d["noise"]),
            "grid": {"x": d["grid_x"], "y": d["grid_y"]},
            "estimator": {k: d[k] for k in ("region_order", "disambiguation_order", "bounds")},
            "decoder": {"backend": d["decoder"]},
        }

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        """Build from parsed TOML; values override ``base`` when given."""
        known = {
            "experiment": {"name", "kind", "family", "distances", "rounds", "rounds_list", "checks", "basis",
                           "repetitions", "seed", "shots_est", "shots_dec", "shots_list"},
            "noise": set(NOISE_FIELDS),
            "grid": {"x", "y"},
            "estimator": {"region_order", "disambiguation_order", "bounds"},
            "decoder": {"backend"},
        }
        kw = asdict(base) if base is not None else {}
        for section, values in data.items():
            if section not in known:
                raise ConfigError(f"unknown section [{section}]")
            if not isinstance(values, dict):
                raise ConfigError(f"[{section}] must be a table")
            for key, value in values.items():
                if key not in known[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                if section == "noise":
                    kw.setdefault("noise", {})
                    kw["noise"] = dict(kw["noise"], **{key: value})
                elif section == "grid":
                    kw["grid_" + key] = [float(v) for v in value]
                elif section == "decoder":
                    kw["decoder"] = value
                else:
                    kw[key] = value
        names = {f.name for f in fields(cls)}
        try:
            return cls(**{k: v for k, v in kw.items() if k in names})
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_toml(cls, text: str, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from None
        return cls.from_dict(data, base)

    @classmethod
    def read(cls, path, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_toml(fh.read(), base)
