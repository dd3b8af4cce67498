"""Lowering of high-level gates to magic-state injection gadgets.

A gadget is a Clifford+projection skeleton with slot markers.  At a slot the
listed ancillae (fresh, in |0>) receive the slot's magic state; the engine
substitutes one decomposition term at a time.  Every projection in a gadget
succeeds with a fixed, input-independent factor, whose inverse is recorded as
the gadget's compensation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .circuit import (
    And,
    Circuit,
    CondQuery,
    EqConst,
    Gate,
    Inc,
    IncFn,
    MCU,
    MCX,
    Not,
    Or,
    OracleRx,
    OracleRz,
    OracleU,
    OracleX,
    Postselect,
    Predicate,
    Query,
    Register,
    Rz,
    T,
    TableFn,
    TruthTable,
    atom_registers,
    evaluate_predicate,
    pred_registers,
    validate,
)
from .decomp import (
    MagicDecomp,
    build_effectual,
    build_magic_cond_diag,
    build_magic_phase,
)
from .stabilizer import CliffordOp, Projection
from .unitary import euler_zxz

_ANGLE_EPS = 1e-12


@dataclass(frozen=True)
class SlotRef:
    """Prepare slot ``slot``'s magic state on ``qubits`` (which must be |0...0>)."""

    slot: int
    qubits: tuple[int, ...]

    def __str__(self) -> str:
        return f"slot {self.slot} [{','.join(map(str, self.qubits))}]"


Op = Union[CliffordOp, Projection, SlotRef]


class AncillaBudgetExceeded(RuntimeError):
    pass


class AncillaPool:
    """Hands out ancilla indices above ``base``; reset between gates so they are reused."""

    def __init__(self, base: int, budget: Optional[int] = None):
        self.base = base
        self.budget = budget
        self.next = base
        self.high_water = 0

    def alloc(self, k: int) -> tuple[int, ...]:
        used = self.next - self.base + k
        if self.budget is not None and used > self.budget:
            raise AncillaBudgetExceeded(f"gate needs {used} ancillae, budget is {self.budget}")
        out = tuple(range(self.next, self.next + k))
        self.next += k
        self.high_water = max(self.high_water, used)
        return out

    def in_use(self) -> int:
        return self.next - self.base

    def reset(self) -> None:
        self.next = self.base


@dataclass(frozen=True)
class Gadget:
    skeleton: tuple[Op, ...]
    slots: tuple[MagicDecomp, ...]
    ancilla_count: int
    compensation: float
    source_gate: object

    @property
    def terms(self) -> int:
        return math.prod(len(s.terms) for s in self.slots)


@dataclass(frozen=True)
class GateReport:
    index: int
    gate: str
    terms: int
    skeleton_size: int
    ancillas: int


@dataclass(frozen=True)
class GadgetizedCircuit:
    num_qubits: int
    total_qubits: int
    ops: tuple[Op, ...]
    slots: tuple[MagicDecomp, ...]
    compensation: float
    chi: int
    per_gate_report: tuple[GateReport, ...] = ()

    @property
    def mu(self) -> int:
        return max((r.skeleton_size for r in self.per_gate_report), default=0)


@dataclass(frozen=True)
class LoweringConfig:
    ancilla_budget: Optional[int] = None
    # "auto" picks whichever of the two oracle-U constructions has fewer terms
    oracle_u_route: str = "auto"


# ---------------------------------------------------------------------------
# variable splitting


def split_shared_vars(pred: Predicate, alloc: AncillaPool) -> tuple[list[CliffordOp], Predicate, list[CliffordOp]]:
    """Give every repeated register occurrence its own ancilla copy.

    Siblings under And / Or must read disjoint registers.  Children of an
    exclusive Or are alternatives and may share.
    """
    prologue: list[CliffordOp] = []
    counter = [0]

    def copy_of(reg: Register) -> Register:
        qs = alloc.alloc(reg.width)
        counter[0] += 1
        for src, dst in zip(reg.qubits, qs):
            prologue.append(CliffordOp("cx", (src, dst)))
        return Register(f"{reg.name}'{counter[0]}", qs)

    def claim(reg: Register, used: set[str]) -> Register:
        if reg.name in used:
            return copy_of(reg)
        used.add(reg.name)
        return reg

    def walk(p: Predicate, used: set[str]) -> Predicate:
        if isinstance(p, Not):
            return Not(walk(p.child, used))
        if isinstance(p, And):
            return And(tuple(walk(c, used) for c in p.children))
        if isinstance(p, Or):
            if not p.exclusive:
                return Or(tuple(walk(c, used) for c in p.children))
            snapshot = set(used)
            kids = []
            for c in p.children:
                mine = set(snapshot)
                kids.append(walk(c, mine))
                used |= mine
            return Or(tuple(kids), exclusive=True)
        regs = atom_registers(p)
        if not regs:
            return p
        new = [claim(r, used) for r in regs]
        if isinstance(p, TruthTable):
            return TruthTable(tuple(new), p.rows)
        if isinstance(p, EqConst):
            return EqConst(new[0], p.value)
        return type(p)(new[0], new[1])

    new_pred = walk(pred, set())
    return prologue, new_pred, list(reversed(prologue))


# ---------------------------------------------------------------------------
# gadget assembly


class _Builder:
    def __init__(self, alloc: AncillaPool):
        self.alloc = alloc
        self.ops: list[Op] = []
        self.slots: list[MagicDecomp] = []
        self.compensation = 1.0

    def clifford(self, kind: str, *qs: int) -> None:
        self.ops.append(CliffordOp(kind, qs))

    def project(self, q: int, b: int) -> None:
        self.ops.append(Projection(q, b))

    def inject(self, magic: MagicDecomp, qubits: Sequence[int]) -> None:
        """Diagonal gate via its magic state: CX each qubit into its ancilla, project ancillae to 0."""
        mark = self.alloc.next
        anc = self.alloc.alloc(len(qubits))
        self.ops.append(SlotRef(len(self.slots), anc))
        self.slots.append(magic)
        for q, a in zip(qubits, anc):
            self.clifford("cx", q, a)
        for a in anc:
            self.project(a, 0)
        self.compensation *= 2.0 ** (len(qubits) / 2)
        self.alloc.next = mark

    def pred_diag(self, pred: Predicate, target: Optional[int], d0: complex, d1: complex) -> None:
        """|x>|b> -> d_b|x>|b> where pred(x) holds (no target: phase d1 on pred)."""
        mark = self.alloc.next
        pro, split, epi = split_shared_vars(pred, self.alloc)
        regs = pred_registers(split)
        eff = build_effectual(split, regs)
        qubits = [q for r in regs for q in r.qubits]
        if target is None:
            magic = build_magic_phase(eff, cmath.phase(d1))
        else:
            magic = build_magic_cond_diag(eff, d0, d1)
            qubits.append(target)
        self.ops.extend(pro)
        self.inject(magic, qubits)
        self.ops.extend(epi)
        self.alloc.next = mark

    def cond_rz(self, pred: Predicate, theta: float, target: Optional[int]) -> None:
        self.pred_diag(pred, target, 1.0, cmath.exp(1j * theta))

    def cond_rx(self, pred: Predicate, theta: float, target: int) -> None:
        self.clifford("h", target)
        self.cond_rz(pred, theta, target)
        self.clifford("h", target)

    def terms(self) -> int:
        return math.prod(len(s.terms) for s in self.slots)


def _is_zero_angle(theta: float) -> bool:
    return abs(cmath.exp(1j * theta) - 1) <= _ANGLE_EPS


def _zxz_candidates(u) -> list[tuple[float, float, float, float]]:
    d, a, b, g = euler_zxz(u)
    # H P(-b) H = e^{-ib} Z (H P(b) H) Z gives a second valid tuple
    return [(d, a, b, g), (d + b, a + math.pi, -b, g + math.pi)]


def _controlled_u_stages(b: _Builder, pred: Predicate, target: int, params, delta_first: bool) -> None:
    d, a, beta, g = params
    # U = e^{id} P(a) H P(beta) H P(g); the phase e^{id} rides on the first or last stage
    first = (cmath.exp(1j * d), cmath.exp(1j * (d + g))) if delta_first else (1.0, cmath.exp(1j * g))
    last = (cmath.exp(1j * d), cmath.exp(1j * (d + a))) if not delta_first else (1.0, cmath.exp(1j * a))
    if abs(first[0] - 1) > _ANGLE_EPS or abs(first[1] - 1) > _ANGLE_EPS:
        b.pred_diag(pred, target, *first)
    if not _is_zero_angle(beta):
        b.cond_rx(pred, beta, target)
    if abs(last[0] - 1) > _ANGLE_EPS or abs(last[1] - 1) > _ANGLE_EPS:
        b.pred_diag(pred, target, *last)


def _oracle_u_direct(alloc: AncillaPool, pred: Predicate, target: int, u) -> _Builder:
    best = None
    for params in _zxz_candidates(u):
        for delta_first in (True, False):
            mark = alloc.next
            b = _Builder(alloc)
            _controlled_u_stages(b, pred, target, params, delta_first)
            alloc.next = mark
            if best is None or b.terms() < best.terms():
                best = b
    return best


def _oracle_u_ancilla(alloc: AncillaPool, pred: Predicate, target: int, u) -> _Builder:
    """Compute pred into one ancilla, apply the singly-controlled U, erase the ancilla."""
    mark = alloc.next
    (a,) = alloc.alloc(1)
    ctrl = Register(f"anc{a}", (a,))
    inner = _oracle_u_direct(alloc, EqConst(ctrl, 1), target, u)
    b = _Builder(alloc)
    b.clifford("h", a)
    b.cond_rz(pred, math.pi, a)
    b.clifford("h", a)
    b.ops.extend(_shift_slots(inner.ops, len(b.slots)))
    b.slots.extend(inner.slots)
    b.compensation *= inner.compensation
    # <+|a> = 2^{-1/2} for either value of a: erasure by post-selection
    b.clifford("h", a)
    b.project(a, 0)
    b.compensation *= math.sqrt(2.0)
    alloc.next = mark
    return b


def _shift_slots(ops: Sequence[Op], offset: int) -> list[Op]:
    return [SlotRef(op.slot + offset, op.qubits) if isinstance(op, SlotRef) else op for op in ops]


def _oracle_u(alloc: AncillaPool, pred: Predicate, target: int, u, route: str) -> _Builder:
    mark = alloc.next
    direct = _oracle_u_direct(alloc, pred, target, u) if route in ("auto", "direct") else None
    alloc.next = mark
    anc = _oracle_u_ancilla(alloc, pred, target, u) if route in ("auto", "ancilla") else None
    alloc.next = mark
    if direct is None:
        return anc
    if anc is None:
        return direct
    return anc if anc.terms() <= direct.terms() else direct


def _relation(fn, x: Register, z: Register) -> Predicate:
    """The predicate z = fn(x)."""
    if isinstance(fn, IncFn):
        return Inc(x, z)
    ell = z.width
    return TruthTable((x, z), tuple((xin << ell) | v for xin, v in enumerate(fn.values)))


def _query_into(b: _Builder, rel_of, x: Register, y: Register) -> None:
    """|x>|y> -> |x>|y xor g(x)> via a post-sampled scratch register z = g(x)."""
    ell = y.width
    zq = b.alloc.alloc(ell)
    z = Register("z'", zq)
    (flag,) = b.alloc.alloc(1)
    for q in zq:
        b.clifford("h", q)
    b.cond_rx(rel_of(z), math.pi, flag)
    b.project(flag, 1)
    b.clifford("x", flag)
    b.compensation *= 2.0 ** (ell / 2)
    for src, dst in zip(zq, y.qubits):
        b.clifford("cx", src, dst)
    for q in zq:
        b.clifford("h", q)
    for q in zq:
        b.project(q, 0)
    b.compensation *= 2.0 ** (ell / 2)


def _cond_table(pred: Predicate, fn, x: Register, ell: int) -> Optional[TableFn]:
    """h(x) = g(x) if pred(x) else 0, when pred reads only qubits of x."""
    regs = pred_registers(pred)
    pos = {q: i for i, q in enumerate(x.qubits)}
    if not all(q in pos for r in regs for q in r.qubits):
        return None
    k = x.width
    values = []
    for xin in range(1 << k):
        bits = [(xin >> (k - 1 - i)) & 1 for i in range(k)]
        env = {r.name: _reg_value(r, bits, pos) for r in regs}
        g = (xin + 1) % (1 << k) if isinstance(fn, IncFn) else fn.values[xin]
        values.append(g if evaluate_predicate(pred, env) else 0)
    return TableFn(tuple(values))


def _reg_value(r: Register, bits, pos) -> int:
    v = 0
    for q in r.qubits:
        v = (v << 1) | bits[pos[q]]
    return v


def lower_gate(gate: Gate, alloc: AncillaPool, config: LoweringConfig = LoweringConfig()) -> Gadget:
    base = alloc.next
    if isinstance(gate, (Rz, T)):
        theta = math.pi / 4 if isinstance(gate, T) else gate.theta
        b = _Builder(alloc)
        b.cond_rz(EqConst(Register(f"q{gate.qubit}", (gate.qubit,)), 1), theta, None)
    elif isinstance(gate, OracleRz):
        b = _Builder(alloc)
        b.cond_rz(gate.pred, gate.theta, None)
    elif isinstance(gate, OracleX):
        b = _Builder(alloc)
        b.cond_rx(gate.pred, math.pi, gate.target)
    elif isinstance(gate, OracleRx):
        b = _Builder(alloc)
        b.cond_rx(gate.pred, gate.theta, gate.target)
    elif isinstance(gate, MCX):
        b = _Builder(alloc)
        b.cond_rx(EqConst(Register("ctrl'", gate.controls), (1 << len(gate.controls)) - 1), math.pi, gate.target)
    elif isinstance(gate, (MCU, OracleU)):
        if isinstance(gate, MCU):
            pred = EqConst(Register("ctrl'", gate.controls), (1 << len(gate.controls)) - 1)
        else:
            pred = gate.pred
        b = _oracle_u(alloc, pred, gate.target, gate.u, config.oracle_u_route)
    elif isinstance(gate, Query):
        b = _Builder(alloc)
        _query_into(b, lambda z: _relation(gate.fn, gate.x, z), gate.x, gate.y)
    elif isinstance(gate, CondQuery):
        b = _Builder(alloc)
        table = _cond_table(gate.pred, gate.fn, gate.x, gate.y.width) if isinstance(gate.fn, TableFn) else None
        if table is not None:
            _query_into(b, lambda z: _relation(table, gate.x, z), gate.x, gate.y)
        else:
            def rel(z: Register) -> Predicate:
                return Or((
                    And((gate.pred, _relation(gate.fn, gate.x, z))),
                    And((Not(gate.pred), EqConst(z, 0))),
                ), exclusive=True)
            _query_into(b, rel, gate.x, gate.y)
    else:
        raise TypeError(f"cannot lower {type(gate).__name__}")
    alloc.next = base
    return Gadget(tuple(b.ops), tuple(b.slots), _ancillas_used(b.ops, alloc.base), b.compensation, gate)


def _ancillas_used(skeleton: Sequence[Op], n: int) -> int:
    top = n
    for op in skeleton:
        qs = op.qubits if not isinstance(op, Projection) else (op.qubit,)
        top = max(top, max(qs, default=-1) + 1)
    return top - n


def gadgetize(circuit: Circuit, config: LoweringConfig = LoweringConfig()) -> GadgetizedCircuit:
    diags = validate(circuit)
    if diags:
        raise ValueError("invalid circuit:\n" + "\n".join(map(str, diags)))
    n = circuit.num_qubits
    ops: list[Op] = []
    slots: list[MagicDecomp] = []
    reports: list[GateReport] = []
    compensation = 1.0
    pool_size = 0
    for i, g in enumerate(circuit.gates):
        if isinstance(g, CliffordOp):
            ops.append(g)
        elif isinstance(g, Postselect):
            ops.append(Projection(g.qubit, g.outcome))
        else:
            pool = AncillaPool(n, config.ancilla_budget)
            gad = lower_gate(g, pool, config)
            ops.extend(_shift_slots(gad.skeleton, len(slots)))
            slots.extend(gad.slots)
            compensation *= gad.compensation
            anc = gad.ancilla_count
            pool_size = max(pool_size, anc)
            reports.append(GateReport(i, type(g).__name__, gad.terms, len(gad.skeleton), anc))
    chi = math.prod(len(s.terms) for s in slots)
    return GadgetizedCircuit(n, n + pool_size, tuple(ops), tuple(slots), compensation, chi, tuple(reports))


def rank_report(circuit: Circuit, config: LoweringConfig = LoweringConfig()) -> dict:
    gc = gadgetize(circuit, config)
    return {
        "chi": gc.chi,
        "mu": gc.mu,
        "num_qubits": gc.num_qubits,
        "total_qubits": gc.total_qubits,
        "ancilla_pool": gc.total_qubits - gc.num_qubits,
        "compensation": gc.compensation,
        "slots": [len(s.terms) for s in gc.slots],
        "gates": [r.__dict__ for r in gc.per_gate_report],
    }


def format_gadgetized(gc: GadgetizedCircuit) -> str:
    lines = [f"qubits {gc.total_qubits}", f"data_qubits {gc.num_qubits}"]
    for op in gc.ops:
        lines.append(str(op))
    for j, s in enumerate(gc.slots):
        lines.append(f"slot_decomp {j} arity {s.arity} terms {len(s.terms)}")
        for t in s.terms:
            lines.append(f"  {t}")
    p = 2 * math.log2(gc.compensation) if gc.compensation > 0 else 0.0
    lines.append(f"compensation 2^{{{round(p)}/2}}" if abs(p - round(p)) < 1e-9 else f"compensation {gc.compensation!r}")
    lines.append(f"chi {gc.chi}")
    return "\n".join(lines) + "\n"
