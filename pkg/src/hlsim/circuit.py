"""Circuit IR: registers, Boolean predicates, gates and validation.

Conventions used throughout the package:

* Qubit 0 is the leftmost character of a bit-string.
* A register's value reads its qubits most-significant first, in the order
  the register lists them.
* ``Rz(theta)`` is the phase gate ``diag(1, e^{i theta})`` and
  ``Rx(theta) = H Rz(theta) H``.  This is not the physics convention
  ``exp(-i theta Z / 2)``; the two differ by a global phase and a factor 2
  in the angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence, Union

import numpy as np

from .stabilizer import CliffordOp


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        where = f"{self.line}:{self.col}: " if self.line else ""
        return f"{where}{self.code}: {self.message}"


@dataclass(frozen=True)
class Register:
    name: str
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))

    @property
    def width(self) -> int:
        return len(self.qubits)

    def value(self, bits: Sequence[int]) -> int:
        out = 0
        for q in self.qubits:
            out = (out << 1) | int(bits[q])
        return out


# ---------------------------------------------------------------------------
# predicates


@dataclass(frozen=True)
class PTrue:
    pass


@dataclass(frozen=True)
class PFalse:
    pass


@dataclass(frozen=True)
class EqVars:
    a: Register
    b: Register


@dataclass(frozen=True)
class EqConst:
    reg: Register
    value: int


@dataclass(frozen=True)
class Gt:
    """a > b as unsigned integers."""

    a: Register
    b: Register


@dataclass(frozen=True)
class Inc:
    """b = a + 1 mod 2^k."""

    a: Register
    b: Register


@dataclass(frozen=True)
class TruthTable:
    """Satisfying assignments of the concatenated registers, as sorted integers."""

    regs: tuple[Register, ...]
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "regs", tuple(self.regs))
        object.__setattr__(self, "rows", tuple(sorted(set(int(r) for r in self.rows))))

    @property
    def width(self) -> int:
        return sum(r.width for r in self.regs)


@dataclass(frozen=True)
class Not:
    child: "Predicate"


@dataclass(frozen=True)
class And:
    children: tuple["Predicate", ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class Or:
    """Disjunction.  ``exclusive`` marks children that never hold together.

    Exclusive disjunctions are produced internally by the lowering of
    conditional queries; their children may share registers.
    """

    children: tuple["Predicate", ...]
    exclusive: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))


Predicate = Union[PTrue, PFalse, EqVars, EqConst, Gt, Inc, TruthTable, Not, And, Or]
ATOMS = (PTrue, PFalse, EqVars, EqConst, Gt, Inc, TruthTable)


def atom_registers(p: Predicate) -> tuple[Register, ...]:
    if isinstance(p, (EqVars, Gt, Inc)):
        return (p.a, p.b)
    if isinstance(p, EqConst):
        return (p.reg,)
    if isinstance(p, TruthTable):
        return p.regs
    return ()


def iter_atoms(p: Predicate) -> Iterator[Predicate]:
    if isinstance(p, Not):
        yield from iter_atoms(p.child)
    elif isinstance(p, (And, Or)):
        for c in p.children:
            yield from iter_atoms(c)
    else:
        yield p


def pred_registers(p: Predicate) -> tuple[Register, ...]:
    """Distinct registers in order of first appearance."""
    seen: dict[str, Register] = {}
    for atom in iter_atoms(p):
        for r in atom_registers(atom):
            seen.setdefault(r.name, r)
    return tuple(seen.values())


def pred_qubits(p: Predicate) -> tuple[int, ...]:
    return tuple(q for r in pred_registers(p) for q in r.qubits)


def evaluate_predicate(p: Predicate, values: Mapping[str, int]) -> bool:
    """Evaluate with register values given by name."""
    if isinstance(p, PTrue):
        return True
    if isinstance(p, PFalse):
        return False
    if isinstance(p, EqVars):
        return values[p.a.name] == values[p.b.name]
    if isinstance(p, EqConst):
        return values[p.reg.name] == p.value
    if isinstance(p, Gt):
        return values[p.a.name] > values[p.b.name]
    if isinstance(p, Inc):
        return values[p.b.name] == (values[p.a.name] + 1) % (1 << p.a.width)
    if isinstance(p, TruthTable):
        row = 0
        for r in p.regs:
            row = (row << r.width) | values[r.name]
        return row in p.rows
    if isinstance(p, Not):
        return not evaluate_predicate(p.child, values)
    if isinstance(p, And):
        return all(evaluate_predicate(c, values) for c in p.children)
    if isinstance(p, Or):
        return any(evaluate_predicate(c, values) for c in p.children)
    raise TypeError(f"not a predicate: {p!r}")


def check_predicate(p: Predicate) -> list[Diagnostic]:
    """Width and constant checks that do not need a circuit."""
    out: list[Diagnostic] = []
    for atom in iter_atoms(p):
        regs = atom_registers(atom)
        names = [r.name for r in regs]
        if len(set(names)) != len(names):
            out.append(Diagnostic("duplicate-register", f"register repeated inside one atom: {names}"))
        if isinstance(atom, (EqVars, Gt, Inc)) and atom.a.width != atom.b.width:
            out.append(Diagnostic(
                "width-mismatch",
                f"{atom.a.name} has width {atom.a.width} but {atom.b.name} has width {atom.b.width}",
            ))
        elif isinstance(atom, EqConst) and not 0 <= atom.value < (1 << atom.reg.width):
            out.append(Diagnostic("width-mismatch", f"constant {atom.value} does not fit {atom.reg.width} bit(s)"))
        elif isinstance(atom, TruthTable):
            if not atom.regs:
                out.append(Diagnostic("arity", "table needs at least one register"))
            bad = [r for r in atom.rows if not 0 <= r < (1 << atom.width)]
            if bad:
                out.append(Diagnostic("width-mismatch", f"table row {bad[0]} does not fit {atom.width} bit(s)"))
    return out


# ---------------------------------------------------------------------------
# single-qubit unitaries


@dataclass(frozen=True)
class Unitary2:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self) -> None:
        for k in "abcd":
            object.__setattr__(self, k, complex(getattr(self, k)))

    @classmethod
    def from_matrix(cls, m) -> "Unitary2":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def is_unitary(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        return bool(np.abs(m.conj().T @ m - np.eye(2)).max() <= tol)


# ---------------------------------------------------------------------------
# query functions


@dataclass(frozen=True)
class IncFn:
    """g(x) = x + 1 mod 2^k."""


@dataclass(frozen=True)
class TableFn:
    """g given by its full value list; values[x] is the output for input x."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))


QueryFn = Union[IncFn, TableFn]


def query_output(fn: QueryFn, x: int, in_width: int) -> int:
    if isinstance(fn, IncFn):
        return (x + 1) % (1 << in_width)
    return fn.values[x]


# ---------------------------------------------------------------------------
# gates


@dataclass(frozen=True)
class Rz:
    theta: float
    qubit: int


@dataclass(frozen=True)
class T:
    qubit: int


@dataclass(frozen=True)
class MCX:
    controls: tuple[int, ...]
    target: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))


@dataclass(frozen=True)
class MCU:
    controls: tuple[int, ...]
    target: int
    u: Unitary2

    def __post_init__(self) -> None:
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))


@dataclass(frozen=True)
class OracleRz:
    pred: Predicate
    theta: float


@dataclass(frozen=True)
class OracleX:
    pred: Predicate
    target: int


@dataclass(frozen=True)
class OracleRx:
    pred: Predicate
    theta: float
    target: int


@dataclass(frozen=True)
class OracleU:
    pred: Predicate
    target: int
    u: Unitary2


@dataclass(frozen=True)
class Query:
    fn: QueryFn
    x: Register
    y: Register


@dataclass(frozen=True)
class CondQuery:
    pred: Predicate
    fn: QueryFn
    x: Register
    y: Register


@dataclass(frozen=True)
class Postselect:
    qubit: int
    outcome: int


Gate = Union[CliffordOp, Rz, T, MCX, MCU, OracleRz, OracleX, OracleRx, OracleU, Query, CondQuery, Postselect]
HIGH_LEVEL = (Rz, T, MCX, MCU, OracleRz, OracleX, OracleRx, OracleU, Query, CondQuery)


def gate_qubits(g: Gate) -> tuple[int, ...]:
    if isinstance(g, CliffordOp):
        return g.qubits
    if isinstance(g, (Rz, T, Postselect)):
        return (g.qubit,)
    if isinstance(g, (MCX, MCU)):
        return (*g.controls, g.target)
    if isinstance(g, OracleRz):
        return pred_qubits(g.pred)
    if isinstance(g, (OracleX, OracleRx, OracleU)):
        return (*pred_qubits(g.pred), g.target)
    if isinstance(g, Query):
        return (*g.x.qubits, *g.y.qubits)
    if isinstance(g, CondQuery):
        return tuple(dict.fromkeys((*pred_qubits(g.pred), *g.x.qubits, *g.y.qubits)))
    raise TypeError(f"not a gate: {g!r}")


def gate_predicate(g: Gate) -> Optional[Predicate]:
    return getattr(g, "pred", None)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    registers: tuple[Register, ...] = ()
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "registers", tuple(self.registers))
        object.__setattr__(self, "gates", tuple(self.gates))

    @property
    def t_count(self) -> int:
        """Number of non-Clifford, non-measurement gates."""
        return sum(isinstance(g, HIGH_LEVEL) for g in self.gates)

    def register(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise KeyError(name)


def _check_qubits(qs: Sequence[int], n: int, what: str) -> list[Diagnostic]:
    out = []
    bad = [q for q in qs if not 0 <= q < n]
    if bad:
        out.append(Diagnostic("qubit-range", f"{what}: qubit {bad[0]} out of range for {n} qubits"))
    if len(set(qs)) != len(qs):
        out.append(Diagnostic("duplicate-operands", f"{what}: duplicate qubit operands"))
    return out


def _check_fn(fn: QueryFn, x: Register, y: Register, what: str) -> list[Diagnostic]:
    if isinstance(fn, IncFn):
        if x.width != y.width:
            return [Diagnostic("width-mismatch", f"{what}: inc needs equal widths, got {x.width} and {y.width}")]
        return []
    if len(fn.values) != 1 << x.width:
        return [Diagnostic("width-mismatch", f"{what}: table has {len(fn.values)} entries for {x.width} input bit(s)")]
    if any(not 0 <= v < (1 << y.width) for v in fn.values):
        return [Diagnostic("width-mismatch", f"{what}: table output does not fit {y.width} bit(s)")]
    return []


def validate_registers(num_qubits: int, registers: Sequence[Register]) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if num_qubits < 1:
        out.append(Diagnostic("header", f"qubit count must be positive, got {num_qubits}"))
    seen: set[str] = set()
    owner: dict[int, str] = {}
    for r in registers:
        if r.name in seen:
            out.append(Diagnostic("duplicate-register", f"register {r.name} declared twice"))
        seen.add(r.name)
        if r.width < 1:
            out.append(Diagnostic("width-mismatch", f"register {r.name} is empty"))
        out += _check_qubits(r.qubits, num_qubits, f"register {r.name}")
        for q in r.qubits:
            if q in owner and owner[q] != r.name:
                out.append(Diagnostic("register-overlap", f"registers {owner[q]} and {r.name} share qubit {q}"))
            owner[q] = r.name
    return out


def validate_gate(g: Gate, num_qubits: int, registers: Mapping[str, Register]) -> list[Diagnostic]:
    """Diagnostics for one gate against a qubit count and a register table."""
    out: list[Diagnostic] = []
    n = num_qubits

    def known(reg: Register) -> list[Diagnostic]:
        if registers.get(reg.name) != reg:
            return [Diagnostic("undefined-register", f"register {reg.name} is not declared")]
        return []

    try:
        qs = gate_qubits(g)
    except TypeError as exc:
        return [Diagnostic("unknown-gate", str(exc))]
    pred = gate_predicate(g)
    if pred is not None:
        for r in pred_registers(pred):
            out += known(r)
        out += check_predicate(pred)
    if isinstance(g, (Query, CondQuery)):
        out += known(g.x) + known(g.y)
        out += _check_fn(g.fn, g.x, g.y, "query")
        if set(g.x.qubits) & set(g.y.qubits):
            out.append(Diagnostic("duplicate-operands", "input and output registers overlap"))
        if isinstance(g, CondQuery) and set(pred_qubits(g.pred)) & set(g.y.qubits):
            out.append(Diagnostic("duplicate-operands", "condition reads the output register"))
        return out + _check_qubits(list(dict.fromkeys(qs)), n, "query")
    if isinstance(g, (MCX, MCU)):
        if not g.controls:
            out.append(Diagnostic("arity", "needs at least one control"))
        if g.target in g.controls:
            out.append(Diagnostic("target-in-controls", f"target {g.target} is also a control"))
            return out + _check_qubits(list(dict.fromkeys(qs)), n, "controlled gate")
    if isinstance(g, (OracleX, OracleRx, OracleU)) and g.target in pred_qubits(g.pred):
        out.append(Diagnostic("target-in-controls", f"target {g.target} is read by the predicate"))
        return out + _check_qubits(list(dict.fromkeys(qs)), n, "oracle")
    if isinstance(g, (MCU, OracleU)) and not g.u.is_unitary():
        out.append(Diagnostic("non-unitary", "matrix is not unitary"))
    if isinstance(g, Postselect) and g.outcome not in (0, 1):
        out.append(Diagnostic("bad-outcome", "outcome must be 0 or 1"))
    if not math.isfinite(getattr(g, "theta", 0.0)):
        out.append(Diagnostic("bad-number", "angle is not finite"))
    return out + _check_qubits(qs, n, "operands")


def validate(circuit: Circuit) -> list[Diagnostic]:
    """All invariant violations as diagnostics; never raises."""
    out = validate_registers(circuit.num_qubits, circuit.registers)
    regs = {r.name: r for r in circuit.registers}
    for i, g in enumerate(circuit.gates):
        out += [Diagnostic(d.code, f"gate {i}: {d.message}") for d in validate_gate(g, circuit.num_qubits, regs)]
    return out


__all__ = [
    "And", "ATOMS", "Circuit", "CliffordOp", "CondQuery", "Diagnostic", "EqConst", "EqVars", "Gate", "Gt",
    "HIGH_LEVEL", "Inc", "IncFn", "MCU", "MCX", "Not", "Or", "OracleRx", "OracleRz", "OracleU", "OracleX",
    "PFalse", "PTrue", "Postselect", "Predicate", "Query", "QueryFn", "Register", "Rz", "T", "TableFn",
    "TruthTable", "Unitary2", "atom_registers", "check_predicate", "evaluate_predicate", "gate_predicate",
    "gate_qubits", "iter_atoms", "pred_qubits", "pred_registers", "query_output", "validate", "validate_gate",
    "validate_registers",
]
