"""Circuit instruction set with a bit-exact text format (.fcir).

One instruction per line, ``#`` comments, whitespace separated.  Targets
are qubit indices, ``rec[-k]`` record references, or Pauli products like
``X3*Z7`` (MPP only).  Record references are relative only.  Probabilities
print with the shortest round-trip decimal so serialize(parse(s)) == s for
canonical s.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from .pauli import PauliString, pauli_from_text

# fixed two-qubit Pauli order for PAULI_CHANNEL_2 arguments
PAIR_ORDER = (
    "IX", "IY", "IZ",
    "XI", "XX", "XY", "XZ",
    "YI", "YX", "YY", "YZ",
    "ZI", "ZX", "ZY", "ZZ",
)


class CircuitError(ValueError):
    pass


class CircuitSyntaxError(CircuitError):
    def __init__(self, message: str, line: int, column: int = 0):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class CircuitSemanticError(CircuitError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class RecordRef:
    """Relative reference rec[-k] into the measurement record, k >= 1."""
    offset: int

    def __post_init__(self):
        if self.offset >= 0:
            raise CircuitError("record references must be negative (rec[-k])")

    def __str__(self) -> str:
        return f"rec[{self.offset}]"


Target = Union[int, RecordRef, PauliString]


@dataclass(frozen=True)
class Instruction:
    name: str
    args: Tuple[float, ...] = ()
    targets: Tuple[Target, ...] = ()

    def __str__(self) -> str:
        parts = [self.name]
        if self.args:
            parts[0] += "(" + ", ".join(_fmt_num(a) for a in self.args) + ")"
        for t in self.targets:
            if isinstance(t, PauliString):
                parts.append(t.to_text())
            else:
                parts.append(str(t))
        return " ".join(parts)


_GATES = {"H", "S", "CX", "CZ"}
_KNOWN = {
    "QUBIT_COORDS", "R", "RX", "M", "MX", "MPP",
    "PAULI_CHANNEL_1", "PAULI_CHANNEL_2",
    "H", "S", "CX", "CZ",
    "DETECTOR", "OBSERVABLE_INCLUDE", "TICK",
}


def _fmt_num(x: float) -> str:
    """Shortest decimal that round-trips; integers print bare."""
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


@dataclass
class Circuit:
    """Ordered instruction list with derived counts."""

    instructions: List[Instruction] = field(default_factory=list)

    def append(self, name: str, args: Sequence[float] = (), targets: Sequence[Target] = ()) -> None:
        self.instructions.append(Instruction(name, tuple(args), tuple(targets)))

    # -- derived counts ------------------------------------------------------
    @property
    def n_qubits(self) -> int:
        n = 0
        for ins in self.instructions:
            for t in ins.targets:
                if isinstance(t, int):
                    n = max(n, t + 1)
                elif isinstance(t, PauliString):
                    n = max(n, max(t.support) + 1)
        return n

    @property
    def n_measurements(self) -> int:
        n = 0
        for ins in self.instructions:
            n += _measure_count(ins)
        return n

    @property
    def n_detectors(self) -> int:
        return sum(1 for ins in self.instructions if ins.name == "DETECTOR")

    @property
    def n_observables(self) -> int:
        idx = [int(ins.args[0]) for ins in self.instructions if ins.name == "OBSERVABLE_INCLUDE"]
        return (max(idx) + 1) if idx else 0

    def validate(self) -> None:
        """Semantic checks: probability ranges and record-ref bounds."""
        _check_semantics(self.instructions, raise_line=None)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Circuit) and self.instructions == other.instructions


def _measure_count(ins: Instruction) -> int:
    if ins.name in ("M", "MX"):
        return sum(1 for t in ins.targets if isinstance(t, int))
    if ins.name == "MPP":
        return sum(1 for t in ins.targets if isinstance(t, PauliString))
    return 0


def _check_semantics(instructions: Sequence[Instruction], raise_line) -> None:
    measured = 0
    for i, ins in enumerate(instructions):
        line = raise_line[i] if raise_line else i + 1

        def err(msg: str):
            raise CircuitSemanticError(msg, line)

        if ins.name in ("M", "MX", "MPP", "PAULI_CHANNEL_1", "PAULI_CHANNEL_2"):
            for a in ins.args:
                if not (0.0 <= a <= 1.0):
                    err(f"probability {a} out of [0, 1]")
        if ins.name == "PAULI_CHANNEL_1":
            if len(ins.args) != 3:
                err("PAULI_CHANNEL_1 takes 3 arguments")
            if sum(ins.args) > 1.0 + 1e-12:
                err("PAULI_CHANNEL_1 totals exceed 1")
        if ins.name == "PAULI_CHANNEL_2":
            if len(ins.args) != 15:
                err("PAULI_CHANNEL_2 takes 15 arguments")
            if sum(ins.args) > 1.0 + 1e-12:
                err("PAULI_CHANNEL_2 totals exceed 1")
            nq = sum(1 for t in ins.targets if isinstance(t, int))
            if nq % 2 != 0:
                err("PAULI_CHANNEL_2 needs an even number of qubit targets")
        if ins.name in ("M", "MX") and len(ins.args) > 1:
            err(f"{ins.name} takes at most one argument")
        if ins.name == "MPP" and len(ins.args) > 1:
            err("MPP takes at most one argument")
        if ins.name == "QUBIT_COORDS" and len(ins.args) != 2:
            err("QUBIT_COORDS takes 2 coordinate arguments")

        for t in ins.targets:
            if isinstance(t, RecordRef):
                if ins.name not in ("DETECTOR", "OBSERVABLE_INCLUDE", "CX"):
                    err(f"{ins.name} does not accept record references")
                if -t.offset > measured:
                    err(f"record reference {t} underflows the measurement record")
            elif isinstance(t, PauliString):
                if ins.name != "MPP":
                    err(f"{ins.name} does not accept Pauli product targets")
        if ins.name == "CX":
            qt = [t for t in ins.targets if isinstance(t, (int, RecordRef))]
            if len(qt) % 2 != 0:
                err("CX takes control/target pairs")
            for ctrl, tgt in zip(qt[::2], qt[1::2]):
                if isinstance(tgt, RecordRef):
                    err("CX target cannot be a record reference")
        if ins.name == "OBSERVABLE_INCLUDE":
            if len(ins.args) != 1 or ins.args[0] != int(ins.args[0]) or ins.args[0] < 0:
                err("OBSERVABLE_INCLUDE takes one nonnegative index argument")

        measured += _measure_count(ins)


# -- parsing -----------------------------------------------------------------

def parse(text: str) -> Circuit:
    instructions: List[Instruction] = []
    lines: List[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        instructions.append(_parse_line(line, lineno))
        lines.append(lineno)
    _check_semantics(instructions, raise_line=lines)
    return Circuit(instructions)


def _parse_line(line: str, lineno: int) -> Instruction:
    head, _, rest = line.partition(" ")
    name = head
    args: Tuple[float, ...] = ()
    if "(" in head:
        name, _, argpart = head.partition("(")
        if not argpart.endswith(")"):
            # arguments may contain spaces: re-split the full line
            idx = line.find("(")
            end = line.find(")")
            if end < 0:
                raise CircuitSyntaxError("unterminated argument list, expected ')'", lineno, idx)
            name = line[:idx]
            argpart = line[idx + 1:end] + ")"
            rest = line[end + 1:].strip()
        argtext = argpart[:-1]
        try:
            args = tuple(float(a) for a in argtext.split(",")) if argtext.strip() else ()
        except ValueError:
            raise CircuitSyntaxError(f"bad numeric argument in {argtext!r}", lineno, line.find("("))
    name = name.strip().upper()
    if name not in _KNOWN:
        raise CircuitSyntaxError(f"unknown instruction {name!r}", lineno, 0)

    targets: List[Target] = []
    for tok in rest.split():
        col = line.find(tok)
        if tok.startswith("rec["):
            if not tok.endswith("]"):
                raise CircuitSyntaxError("malformed record reference, expected ']'", lineno, col)
            body = tok[4:-1]
            try:
                off = int(body)
            except ValueError:
                raise CircuitSyntaxError(f"bad record offset {body!r}", lineno, col)
            if off >= 0:
                raise CircuitSemanticError(f"record reference must be negative, got rec[{off}]", lineno)
            targets.append(RecordRef(off))
        elif tok[0].upper() in "XYZ" and not tok.isdigit():
            if name != "MPP":
                raise CircuitSyntaxError(f"Pauli product target {tok!r} outside MPP", lineno, col)
            try:
                targets.append(pauli_from_text(tok))
            except ValueError as e:
                raise CircuitSyntaxError(str(e), lineno, col)
        else:
            try:
                targets.append(int(tok))
            except ValueError:
                raise CircuitSyntaxError(f"bad target {tok!r}", lineno, col)
            if targets[-1] < 0:
                raise CircuitSyntaxError(f"negative qubit index {tok}", lineno, col)
    return Instruction(name, args, tuple(targets))


def serialize(circuit: Circuit) -> str:
    """Canonical text: one instruction per line, trailing newline if nonempty."""
    if not circuit.instructions:
        return ""
    return "\n".join(str(ins) for ins in circuit.instructions) + "\n"


# -- record bookkeeping helpers ----------------------------------------------

def absolute_records(circuit: Circuit) -> List[List[int]]:
    """For DETECTOR/OBSERVABLE instructions, resolve rec[-k] to absolute indices.

    Returns one list per instruction (empty for non-record instructions).
    """
    out: List[List[int]] = []
    measured = 0
    for ins in circuit.instructions:
        if ins.name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
            out.append([measured + t.offset for t in ins.targets if isinstance(t, RecordRef)])
        else:
            out.append([])
        measured += _measure_count(ins)
    return out
