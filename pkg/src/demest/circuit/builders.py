"""Memory-experiment circuit builders.

All builders are pure functions of their arguments (rates fluctuating with
``sigma > 0`` are drawn from the seeded streams in :class:`NoiseConfig`).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .channels import sample_lognormal_rates
from .ir import Circuit


@dataclass(frozen=True)
class NoiseConfig:
    """Circuit noise strengths.

    ``p_data`` / ``p_anc`` are single-qubit depolarizing rates applied to data
    and ancilla qubits at the start of every round, ``p_gate`` is two-qubit
    depolarizing after each CNOT and ``p_idle`` single-qubit depolarizing on
    qubits idling through a CNOT layer or an ancilla measurement. Measurement,
    reset and initialization errors are classical flips of strength
    ``p_meas``, ``p_reset`` and ``p_init``.

    With ``sigma > 0`` the data, ancilla and gate rates are drawn per qubit
    (per CNOT location for gates) from a log-normal with the configured mean,
    using the ``seed_*`` streams; they stay fixed across rounds and shots.
    """

    p_data: float = 0.0
    p_anc: float = 0.0
    p_gate: float = 0.0
    p_idle: float = 0.0
    p_meas: float = 0.0
    p_reset: float = 0.0
    p_init: float = 0.0
    sigma: float = 0.0
    seed_data: int = 1
    seed_anc: int = 2
    seed_gate: int = 3

    def __post_init__(self):
        for name in ("p_data", "p_anc", "p_gate", "p_idle", "p_meas", "p_reset", "p_init"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @classmethod
    def phenomenological(cls, p: float, q: float | None = None, **kw) -> "NoiseConfig":
        return cls(p_data=p, p_anc=p if q is None else q, **kw)

    @classmethod
    def circuit_level(cls, p: float, **kw) -> "NoiseConfig":
        return cls(p_data=p, p_anc=p, p_gate=p, **kw)

    @classmethod
    def uniform(cls, p: float, **kw) -> "NoiseConfig":
        """Same strength for gates, idling, measurement, reset and initialization."""
        return cls(p_gate=p, p_idle=p, p_meas=p, p_reset=p, p_init=p, **kw)

    def fixed(self) -> "NoiseConfig":
        """The same model with every fluctuating rate pinned to its mean."""
        return replace(self, sigma=0.0)

    def data_rates(self, n: int) -> list[float]:
        return sample_lognormal_rates(self.p_data, self.sigma if self.p_data > 0 else 0.0, n, self.seed_data)

    def anc_rates(self, n: int) -> list[float]:
        return sample_lognormal_rates(self.p_anc, self.sigma if self.p_anc > 0 else 0.0, n, self.seed_anc)

    def gate_rates(self, n: int) -> list[float]:
        return sample_lognormal_rates(self.p_gate, self.sigma if self.p_gate > 0 else 0.0, n, self.seed_gate)


class _Writer:
    """Circuit assembly helper tracking absolute measurement indices."""

    def __init__(self):
        self.c = Circuit()
        self.n_meas = 0

    def op(self, name, targets, args=(), tag=""):
        targets = list(targets)
        if targets or name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
            self.c.append(name, targets, args, tag)

    def noise1(self, name, qubits, rates):
        """Single-qubit channel with per-qubit rates, grouped by equal rate."""
        groups: dict[float, list[int]] = {}
        for q, p in zip(qubits, rates):
            if p > 0:
                groups.setdefault(p, []).append(q)
        for p, qs in groups.items():
            self.op(name, qs, (p,))

    def cx_layer(self, pairs, gate_rate, idle_qubits=(), p_idle=0.0):
        flat = [q for pr in pairs for q in pr]
        if not flat:
            return
        self.op("CX", flat)
        groups: dict[float, list[int]] = {}
        for pr in pairs:
            p = gate_rate(pr)
            if p > 0:
                groups.setdefault(p, []).extend(pr)
        for p, qs in groups.items():
            self.op("DEPOLARIZE2", qs, (p,))
        if p_idle > 0:
            busy = set(flat)
            self.op("DEPOLARIZE1", [q for q in idle_qubits if q not in busy], (p_idle,))

    def measure(self, qubits, p=0.0) -> list[int]:
        qubits = list(qubits)
        self.op("M", qubits, (p,) if p > 0 else ())
        recs = list(range(self.n_meas, self.n_meas + len(qubits)))
        self.n_meas += len(qubits)
        return recs

    def detector(self, records, coords=(), tag=""):
        self.op("DETECTOR", [r - self.n_meas for r in records], coords, tag)

    def observable(self, index, records, tag=""):
        self.op("OBSERVABLE_INCLUDE", [r - self.n_meas for r in records], (index,), tag)

    def reset(self, qubits, flip=0.0, basis="Z"):
        qubits = list(qubits)
        self.op("R", qubits)
        if basis == "X":
            self.op("H", qubits)
        if flip > 0:
            self.op("X_ERROR" if basis == "Z" else "Z_ERROR", qubits, (flip,))


def _gate_rate_table(noise: NoiseConfig, layers: Sequence[Sequence[tuple[int, int]]]):
    seen: dict[tuple[int, int], None] = {}
    for layer in layers:
        for pr in layer:
            seen.setdefault(tuple(pr), None)
    rates = noise.gate_rates(len(seen))
    table = dict(zip(seen, rates))
    return lambda pr: table[tuple(pr)]


def _check_odd(name: str, d: int, rounds: int) -> None:
    if not isinstance(d, int) or d < 3 or d % 2 == 0:
        raise ValueError(f"{name}: distance must be an odd integer >= 3, got {d}")
    if not isinstance(rounds, int) or rounds < 1:
        raise ValueError(f"{name}: rounds must be a positive integer, got {rounds}")


def build_repetition_bare(d: int, rounds: int, noise: NoiseConfig = NoiseConfig()) -> Circuit:
    """Z-memory repetition code with one bare ancilla per ZZ check.

    Qubits ``0..d-1`` are data, ``d + i`` is the ancilla between data ``i``
    and ``i + 1``. Each round: input depolarizing on data and ancillas, CNOT
    layer ``(data i -> anc i)`` then ``(data i+1 -> anc i)``, ancilla
    measurement and reset. A final data measurement rebuilds the checks. The
    observable is the parity of all data qubits. Detector count
    ``(d - 1) * (rounds + 1)``.
    """
    _check_odd("repetition", d, rounds)
    data = list(range(d))
    anc = [d + i for i in range(d - 1)]
    layers = [[(data[i], anc[i]) for i in range(d - 1)], [(data[i + 1], anc[i]) for i in range(d - 1)]]
    gate = _gate_rate_table(noise, layers)
    p_data, p_anc = noise.data_rates(d), noise.anc_rates(d - 1)
    w = _Writer()
    w.reset(data, noise.p_init)
    w.reset(anc, noise.p_reset)
    prev = None
    for r in range(rounds):
        if r:
            w.reset(anc, noise.p_reset)
        w.noise1("DEPOLARIZE1", data, p_data)
        w.noise1("DEPOLARIZE1", anc, p_anc)
        for layer in layers:
            w.cx_layer(layer, gate, data + anc, noise.p_idle)
        if noise.p_idle > 0:
            w.op("DEPOLARIZE1", data, (noise.p_idle,))
        recs = w.measure(anc, noise.p_meas)
        for i, m in enumerate(recs):
            w.detector([m] if prev is None else [m, prev[i]], (i, r), "Z")
        prev = recs
    final = w.measure(data, noise.p_meas)
    for i in range(d - 1):
        w.detector([final[i], final[i + 1], prev[i]], (i, rounds), "Z")
    w.observable(0, final, "Z")
    return w.c


def build_repetition_steane(d: int, rounds: int, noise: NoiseConfig = NoiseConfig()) -> Circuit:
    """Z-memory repetition code read out through a GHZ ancilla block.

    Data ``0..d-1``, ancilla block ``d..2d-1``. Each round the block is reset,
    prepared as GHZ by ``H`` on its first qubit and a CNOT chain, hit by
    input depolarizing (``p_anc``, after preparation; data gets ``p_data`` at
    the round start), coupled by transversal CNOTs data -> ancilla and
    measured. Detector ``i`` of round ``r`` is
    ``m_i ^ m_{i+1}`` of round ``r`` XOR the same pair of round ``r - 1``.
    No flag qubits; detector count ``(d - 1) * (rounds + 1)``.
    """
    _check_odd("steane repetition", d, rounds)
    data = list(range(d))
    anc = [d + i for i in range(d)]
    chain = [[(anc[k], anc[k + 1])] for k in range(d - 1)]
    transversal = [(data[i], anc[i]) for i in range(d)]
    gate = _gate_rate_table(noise, chain + [transversal])
    p_data, p_anc = noise.data_rates(d), noise.anc_rates(d)
    allq = data + anc
    w = _Writer()
    w.reset(data, noise.p_init)
    prev = None
    for r in range(rounds):
        w.reset(anc, noise.p_reset)
        w.noise1("DEPOLARIZE1", data, p_data)
        w.op("H", [anc[0]])
        for layer in chain:
            w.cx_layer(layer, gate, allq, noise.p_idle)
        w.noise1("DEPOLARIZE1", anc, p_anc)
        w.cx_layer(transversal, gate, allq, noise.p_idle)
        recs = w.measure(anc, noise.p_meas)
        for i in range(d - 1):
            pair = [recs[i], recs[i + 1]]
            if prev is not None:
                pair += [prev[i], prev[i + 1]]
            w.detector(pair, (i, r), "Z")
        prev = recs
    final = w.measure(data, noise.p_meas)
    for i in range(d - 1):
        w.detector([final[i], final[i + 1], prev[i], prev[i + 1]], (i, rounds), "Z")
    w.observable(0, final, "Z")
    return w.c


@dataclass(frozen=True)
class SurfaceLayout:
    L: int
    data: dict[tuple[int, int], int]
    x_checks: dict[tuple[int, int], int]
    z_checks: dict[tuple[int, int], int]

    def neighbours(self, site: tuple[int, int]) -> list[int]:
        """Data qubits around a check in the fixed order north, west, east, south."""
        i, j = site
        out = []
        for di, dj in ((-1, 0), (0, -1), (0, 1), (1, 0)):
            q = self.data.get((i + di, j + dj))
            if q is not None:
                out.append(q)
        return out


def surface_layout(L: int) -> SurfaceLayout:
    """Unrotated planar layout on a ``(2L-1) x (2L-1)`` grid.

    Data at ``i + j`` even, X checks (stars) at odd row / even column and Z
    checks at even row / odd column. ``X_L`` is row 0 of the data.
    """
    size = 2 * L - 1
    data, xs, zs = {}, {}, {}
    for i in range(size):
        for j in range(size):
            if (i + j) % 2 == 0:
                data[(i, j)] = len(data)
    n = len(data)
    for i in range(size):
        for j in range(size):
            if i % 2 == 1 and j % 2 == 0:
                xs[(i, j)] = n + len(xs)
    n += len(xs)
    for i in range(size):
        for j in range(size):
            if i % 2 == 0 and j % 2 == 1:
                zs[(i, j)] = n + len(zs)
    return SurfaceLayout(L, data, xs, zs)


def build_surface_unrotated(L: int, rounds: int, noise: NoiseConfig = NoiseConfig(), checks: str = "x") -> Circuit:
    """X-memory unrotated surface code with bare-ancilla extraction.

    ``L**2 + (L-1)**2`` data qubits and ``L(L-1)`` ancillas per check type.
    ``checks="x"`` measures only the star operators, ``checks="both"`` adds the
    plaquettes (measured after the stars in every round; their first round is
    random so Z detectors start at round 2). CNOTs visit the neighbours of
    every check in the order north, west, east, south.

    With ``p_gate == 0`` this is the phenomenological model (perfect gates,
    input depolarizing only).
    """
    _check_odd("surface", L, rounds)
    checks = checks.lower()
    if checks in ("x-only", "x_only"):
        checks = "x"
    if checks not in ("x", "both"):
        raise ValueError("checks must be 'x' or 'both'")
    lay = surface_layout(L)
    data = list(lay.data.values())
    xsites = list(lay.x_checks)
    zsites = list(lay.z_checks) if checks == "both" else []
    xanc = [lay.x_checks[s] for s in xsites]
    zanc = [lay.z_checks[s] for s in zsites]
    anc = xanc + zanc

    def layers(sites, table, anc_is_control):
        out = []
        for k in range(4):
            layer = []
            for s in sites:
                nb = _ordered_neighbours(lay, s)
                if nb[k] is None:
                    continue
                a = table[s]
                layer.append((a, nb[k]) if anc_is_control else (nb[k], a))
            out.append(layer)
        return out

    xl = layers(xsites, lay.x_checks, True)
    zl = layers(zsites, lay.z_checks, False)
    gate = _gate_rate_table(noise, xl + zl)
    p_data, p_anc = noise.data_rates(len(data)), noise.anc_rates(len(anc))
    allq = data + anc
    w = _Writer()
    w.reset(data, noise.p_init, basis="X")
    prev_x = prev_z = None
    for r in range(rounds):
        w.op("R", anc)
        if noise.p_reset > 0:
            w.op("X_ERROR", anc, (noise.p_reset,))
        w.noise1("DEPOLARIZE1", data, p_data)
        w.noise1("DEPOLARIZE1", anc, p_anc)
        w.op("H", xanc)
        for layer in xl:
            w.cx_layer(layer, gate, allq, noise.p_idle)
        w.op("H", xanc)
        for layer in zl:
            w.cx_layer(layer, gate, allq, noise.p_idle)
        if noise.p_idle > 0:
            w.op("DEPOLARIZE1", data, (noise.p_idle,))
        rx = w.measure(xanc, noise.p_meas)
        rz = w.measure(zanc, noise.p_meas)
        for k, (s, m) in enumerate(zip(xsites, rx)):
            w.detector([m] if prev_x is None else [m, prev_x[k]], (s[0], s[1], r), "X")
        if prev_z is not None:
            for k, (s, m) in enumerate(zip(zsites, rz)):
                w.detector([m, prev_z[k]], (s[0], s[1], r), "Z")
        prev_x, prev_z = rx, rz
    w.op("H", data)
    final = w.measure(data, noise.p_meas)
    rec_of = dict(zip(lay.data, final))
    for k, s in enumerate(xsites):
        nb = [final[q] for q in lay.neighbours(s)]
        w.detector(nb + [prev_x[k]], (s[0], s[1], rounds), "X")
    w.observable(0, [rec_of[(0, j)] for j in range(0, 2 * L - 1, 2)], "X")
    return w.c


def _ordered_neighbours(lay: SurfaceLayout, site):
    i, j = site
    return [lay.data.get((i + di, j + dj)) for di, dj in ((-1, 0), (0, -1), (0, 1), (1, 0))]


# Face -> data offsets on the triangular 6.6.6 patch, indexed 0..5.
_COLOR_OFFSETS = ((-1, 1), (1, 1), (2, 0), (1, -1), (-1, -1), (-2, 0))
# Time slice of each offset for Z checks (first six) and X checks (last six).
COLOR_CNOT_SCHEDULE = (2, 3, 6, 5, 4, 1, 3, 4, 7, 6, 5, 2)


@dataclass(frozen=True)
class ColorLayout:
    d: int
    data: dict[tuple[int, int], int]
    faces: dict[tuple[int, int], str]

    def face_qubits(self, face) -> list[int | None]:
        fx, fy = face
        return [self.data.get((fx + dx, fy + dy)) for dx, dy in _COLOR_OFFSETS]


def color_layout(d: int) -> ColorLayout:
    """Triangular 6.6.6 color code of odd distance ``d`` on a sheared grid.

    Sites ``(x, y)`` with ``0 <= y <= 3(d-1)/2`` and ``y <= x <= 3(d-1) - y``,
    ``x = y (mod 2)``; every third site of a row is a face. The bottom row
    ``y == 0`` carries the logical ``Z_L``.
    """
    L = 3 * (d - 1) // 2
    data, faces = {}, {}
    for y in range(L + 1):
        anc_pos = (2, 0, 1)[y % 3]
        colour = ("g", "b", "r")[y % 3]
        for x in range(y, 2 * L - y + 1, 2):
            if ((x - y) // 2) % 3 == anc_pos:
                faces[(x, y)] = colour
            else:
                data[(x, y)] = len(data)
    return ColorLayout(d, data, faces)


def build_color_code(d: int, rounds: int, noise: NoiseConfig = NoiseConfig(),
                     schedule: Sequence[int] = COLOR_CNOT_SCHEDULE) -> Circuit:
    """Z-memory triangular color code, bare ancillas for both check types.

    Every face has a Z ancilla (CNOT data -> ancilla) and an X ancilla (reset
    in the X basis, CNOT ancilla -> data, X-basis readout). The CNOT to the
    face neighbour at offset slot ``k`` happens in time slice
    ``schedule[k]`` for Z checks and ``schedule[6 + k]`` for X checks.
    Detectors are tagged ``Z`` or ``X``; X detectors exist from round 2 on.
    Noise uses ``p_gate``, ``p_idle``, ``p_meas``, ``p_reset``, ``p_init`` and
    optionally ``p_data`` as input depolarizing on data each round.
    """
    if d not in (3, 5, 7, 9, 11):
        raise ValueError(f"color code: unsupported distance {d}")
    _check_odd("color", d, rounds)
    if len(schedule) != 12:
        raise ValueError("schedule needs 12 time slices")
    lay = color_layout(d)
    faces = list(lay.faces)
    n_data = len(lay.data)
    data = list(range(n_data))
    zanc = [n_data + k for k in range(len(faces))]
    xanc = [n_data + len(faces) + k for k in range(len(faces))]
    allq = data + zanc + xanc
    slices: list[list[tuple[int, int]]] = []
    for t in range(1, max(schedule) + 1):
        layer = []
        for k, face in enumerate(faces):
            nb = lay.face_qubits(face)
            for slot in range(6):
                q = nb[slot]
                if q is None:
                    continue
                if schedule[slot] == t:
                    layer.append((q, zanc[k]))
                if schedule[6 + slot] == t:
                    layer.append((xanc[k], q))
        used = [q for pr in layer for q in pr]
        if len(used) != len(set(used)):
            raise ValueError("CNOT schedule puts a qubit in two gates of one time slice")
        slices.append(layer)
    gate = _gate_rate_table(noise, slices)
    p_data = noise.data_rates(n_data)
    w = _Writer()
    w.reset(data, noise.p_init)
    prev_z = prev_x = None
    for r in range(rounds):
        w.reset(zanc, noise.p_reset)
        w.reset(xanc, noise.p_reset, basis="X")
        w.noise1("DEPOLARIZE1", data, p_data)
        for layer in slices:
            w.cx_layer(layer, gate, allq, noise.p_idle)
        w.op("H", xanc)
        if noise.p_idle > 0:
            w.op("DEPOLARIZE1", data, (noise.p_idle,))
        rz = w.measure(zanc, noise.p_meas)
        rx = w.measure(xanc, noise.p_meas)
        for k, face in enumerate(faces):
            w.detector([rz[k]] if prev_z is None else [rz[k], prev_z[k]], (face[0], face[1], r), "Z")
        if prev_x is not None:
            for k, face in enumerate(faces):
                w.detector([rx[k], prev_x[k]], (face[0], face[1], r), "X")
        prev_z, prev_x = rz, rx
    final = w.measure(data, noise.p_meas)
    for k, face in enumerate(faces):
        qs = [final[q] for q in lay.face_qubits(face) if q is not None]
        w.detector(qs + [prev_z[k]], (face[0], face[1], rounds), "Z")
    bottom = [final[q] for (x, y), q in lay.data.items() if y == 0]
    w.observable(0, bottom, "Z")
    return w.c
