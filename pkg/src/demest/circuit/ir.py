"""Circuit intermediate representation and its line-oriented text format.

Supported instructions::

    R q...                  reset to |0>
    H q...                  Hadamard
    CX c t [c t ...]        CNOT pairs
    M q...  /  M(p) q...    Z-basis measurement, optional classical record flip
    DEPOLARIZE1(p) q...     single-qubit depolarizing
    DEPOLARIZE2(p) a b ...  two-qubit depolarizing on pairs
    X_ERROR(p) q...         (also Y_ERROR, Z_ERROR)
    DETECTOR[tag](coords) rec[-k] ...
    OBSERVABLE_INCLUDE[tag](n) rec[-k] ...

``#`` starts a comment. The optional ``[tag]`` on detectors and observables
labels the check basis (``Z`` or ``X``) used to split a DEM by basis.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

GATES = {"R", "H", "CX", "M"}
NOISE_1Q = {"DEPOLARIZE1", "X_ERROR", "Y_ERROR", "Z_ERROR"}
NOISE_2Q = {"DEPOLARIZE2"}
ANNOTATIONS = {"DETECTOR", "OBSERVABLE_INCLUDE"}
ALL_NAMES = GATES | NOISE_1Q | NOISE_2Q | ANNOTATIONS
PAIR_NAMES = {"CX", "DEPOLARIZE2"}


class CircuitError(ValueError):
    """Raised for structurally invalid circuits."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class CircuitParseError(CircuitError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Instruction:
    """One circuit operation.

    For ``DETECTOR`` and ``OBSERVABLE_INCLUDE`` the targets are negative
    measurement-record offsets; ``args`` holds detector coordinates or the
    observable index. For noise (and ``M``) ``args`` holds the probability.
    """

    name: str
    targets: tuple[int, ...]
    args: tuple[float, ...] = ()
    tag: str = ""

    def __post_init__(self):
        if self.name not in ALL_NAMES:
            raise CircuitError(f"unknown instruction {self.name!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "args", tuple(float(a) for a in self.args))

    @property
    def probability(self) -> float:
        return self.args[0] if self.args else 0.0

    @property
    def pairs(self) -> list[tuple[int, int]]:
        t = self.targets
        return [(t[i], t[i + 1]) for i in range(0, len(t), 2)]

    @property
    def is_noise(self) -> bool:
        return self.name in NOISE_1Q or self.name in NOISE_2Q


class NoiseComponent(NamedTuple):
    """An independent Pauli (or record-flip) event with its probability.

    ``paulis`` is a tuple of ``(qubit, 'X'|'Y'|'Z')``; ``record`` is the
    absolute measurement index flipped classically, or -1.
    """

    position: int
    paulis: tuple[tuple[int, str], ...]
    record: int
    probability: float


@dataclass
class Circuit:
    instructions: list[Instruction] = field(default_factory=list)
    qubit_count: int = 0

    def __post_init__(self):
        self.qubit_count = max(self.qubit_count, self._max_qubit() + 1)

    def _max_qubit(self) -> int:
        m = -1
        for ins in self.instructions:
            if ins.name not in ANNOTATIONS and ins.targets:
                m = max(m, max(ins.targets))
        return m

    def append(self, name: str, targets: Iterable[int] = (), args: Iterable[float] = (), tag: str = "") -> None:
        ins = Instruction(name, tuple(targets), tuple(args), tag)
        if ins.name not in ANNOTATIONS and ins.targets:
            self.qubit_count = max(self.qubit_count, max(ins.targets) + 1)
        self.instructions.append(ins)

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def __len__(self) -> int:
        return len(self.instructions)

    def __str__(self) -> str:
        return serialize_circuit(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return self.instructions == other.instructions and self.qubit_count == other.qubit_count

    @property
    def measurement_count(self) -> int:
        return sum(len(i.targets) for i in self.instructions if i.name == "M")

    @property
    def detector_count(self) -> int:
        return sum(1 for i in self.instructions if i.name == "DETECTOR")

    @property
    def observable_count(self) -> int:
        idx = [int(i.args[0]) for i in self.instructions if i.name == "OBSERVABLE_INCLUDE"]
        return max(idx) + 1 if idx else 0

    def detector_tags(self) -> list[str]:
        return [i.tag for i in self.instructions if i.name == "DETECTOR"]

    def observable_tags(self) -> list[str]:
        tags = [""] * self.observable_count
        for i in self.instructions:
            if i.name == "OBSERVABLE_INCLUDE" and i.tag:
                tags[int(i.args[0])] = i.tag
        return tags

    def detector_coords(self) -> list[tuple[float, ...]]:
        return [i.args for i in self.instructions if i.name == "DETECTOR"]

    def without_noise(self) -> "Circuit":
        out = [i for i in self.instructions if not i.is_noise]
        out = [Instruction("M", i.targets) if i.name == "M" else i for i in out]
        return Circuit(out, self.qubit_count)

    def validate(self) -> None:
        """Check target counts, probability ranges and record references."""
        n_meas = 0
        for k, ins in enumerate(self.instructions):
            where = f"instruction {k} ({ins.name})"
            if ins.name in ANNOTATIONS:
                if ins.name == "OBSERVABLE_INCLUDE" and (len(ins.args) != 1 or ins.args[0] < 0):
                    raise CircuitError(f"{where}: observable index required", k)
                for off in ins.targets:
                    if off >= 0:
                        raise CircuitError(f"{where}: record offsets must be negative", k)
                    if -off > n_meas:
                        raise CircuitError(f"{where}: rec[{off}] precedes the first measurement", k)
                continue
            if any(q < 0 or q >= self.qubit_count for q in ins.targets):
                raise CircuitError(f"{where}: qubit index out of range", k)
            if ins.name in PAIR_NAMES:
                if len(ins.targets) % 2:
                    raise CircuitError(f"{where}: needs an even number of targets", k)
                for a, b in ins.pairs:
                    if a == b:
                        raise CircuitError(f"{where}: pair targets must differ", k)
            if ins.is_noise or ins.name == "M":
                if len(ins.args) > 1 or (ins.is_noise and len(ins.args) != 1):
                    raise CircuitError(f"{where}: expected one probability argument", k)
                if ins.args and not 0.0 <= ins.args[0] <= 1.0:
                    raise CircuitError(f"{where}: probability {ins.args[0]} outside [0, 1]", k)
            if ins.name == "M":
                n_meas += len(ins.targets)

    def noise_components(self) -> list[NoiseComponent]:
        """Expand every noise channel into independent components.

        Depolarizing channels are split with :func:`decompose_depol1` /
        :func:`decompose_depol2`; zero-probability components are dropped.
        """
        from .channels import decompose_depol1, decompose_depol2, PAULIS_1Q, PAULIS_2Q

        comps: list[NoiseComponent] = []
        n_meas = 0
        for pos, ins in enumerate(self.instructions):
            name = ins.name
            if name == "M":
                if ins.args and ins.args[0] > 0:
                    for j in range(len(ins.targets)):
                        comps.append(NoiseComponent(pos, (), n_meas + j, ins.args[0]))
                n_meas += len(ins.targets)
                continue
            if not ins.is_noise:
                continue
            p = ins.args[0]
            if p == 0:
                continue
            if name in ("X_ERROR", "Y_ERROR", "Z_ERROR"):
                for q in ins.targets:
                    comps.append(NoiseComponent(pos, ((q, name[0]),), -1, p))
            elif name == "DEPOLARIZE1":
                pp = decompose_depol1(p)
                for q in ins.targets:
                    for s in PAULIS_1Q:
                        comps.append(NoiseComponent(pos, ((q, s),), -1, pp))
            else:
                pp = decompose_depol2(p)
                for a, b in ins.pairs:
                    for sa, sb in PAULIS_2Q:
                        paulis = tuple((q, s) for q, s in ((a, sa), (b, sb)) if s != "I")
                        comps.append(NoiseComponent(pos, paulis, -1, pp))
        return comps


_LINE = re.compile(r"^([A-Z_0-9]+)(?:\[([^\]]*)\])?(?:\(([^)]*)\))?(.*)$")
_REC = re.compile(r"^rec\[(-\d+)\]$")


def _fmt(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _fmt_prob(p: float) -> str:
    # repr is the shortest exact round-trip form of a double
    return repr(float(p))


def serialize_circuit(circuit: Circuit) -> str:
    lines = []
    for ins in circuit.instructions:
        head = ins.name
        if ins.tag:
            head += f"[{ins.tag}]"
        if ins.args:
            if ins.is_noise or ins.name == "M":
                head += "(" + ", ".join(_fmt_prob(a) for a in ins.args) + ")"
            else:
                head += "(" + ", ".join(_fmt(a) for a in ins.args) + ")"
        if ins.name in ANNOTATIONS:
            tail = " ".join(f"rec[{t}]" for t in ins.targets)
        else:
            tail = " ".join(str(t) for t in ins.targets)
        lines.append(f"{head} {tail}".rstrip())
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    """Parse the text format; raises :class:`CircuitParseError` with a line number."""
    circuit = Circuit()
    line_of: list[int] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise CircuitParseError(line_no, f"cannot parse {raw!r}")
        name, tag, arg_text, rest = m.groups()
        if name not in ALL_NAMES:
            raise CircuitParseError(line_no, f"unknown instruction {name!r}")
        if rest and not rest[0].isspace():
            raise CircuitParseError(line_no, f"cannot parse {raw!r}")
        try:
            args = tuple(float(a) for a in arg_text.split(",")) if arg_text and arg_text.strip() else ()
        except ValueError:
            raise CircuitParseError(line_no, f"bad argument list ({arg_text})") from None
        targets = []
        for tok in rest.split():
            if name in ANNOTATIONS:
                rm = _REC.match(tok)
                if not rm:
                    raise CircuitParseError(line_no, f"expected rec[-k], got {tok!r}")
                targets.append(int(rm.group(1)))
            else:
                if not tok.isdigit():
                    raise CircuitParseError(line_no, f"expected qubit index, got {tok!r}")
                targets.append(int(tok))
        if name in PAIR_NAMES and len(targets) % 2:
            raise CircuitParseError(line_no, f"{name} needs an even number of targets")
        if (name in NOISE_1Q or name in NOISE_2Q) and len(args) != 1:
            raise CircuitParseError(line_no, f"{name} needs one probability")
        if name == "OBSERVABLE_INCLUDE" and len(args) != 1:
            raise CircuitParseError(line_no, "OBSERVABLE_INCLUDE needs an index")
        try:
            circuit.append(name, targets, args, tag or "")
        except CircuitError as exc:
            raise CircuitParseError(line_no, str(exc)) from None
        line_of.append(line_no)
    try:
        circuit.validate()
    except CircuitError as exc:
        raise CircuitParseError(line_of[exc.index] if exc.index is not None else 0, str(exc)) from None
    return circuit


def record_targets(circuit: Circuit) -> tuple[list[list[int]], list[list[int]]]:
    """Absolute record indices feeding each detector and each observable."""
    detectors: list[list[int]] = []
    observables: list[list[int]] = [[] for _ in range(circuit.observable_count)]
    n_meas = 0
    for ins in circuit.instructions:
        if ins.name == "M":
            n_meas += len(ins.targets)
        elif ins.name == "DETECTOR":
            detectors.append([n_meas + off for off in ins.targets])
        elif ins.name == "OBSERVABLE_INCLUDE":
            observables[int(ins.args[0])].extend(n_meas + off for off in ins.targets)
    return detectors, observables


def measurement_qubits(circuit: Circuit) -> Sequence[int]:
    out = []
    for ins in circuit.instructions:
        if ins.name == "M":
            out.extend(ins.targets)
    return out
