"""Brute-force dense reference implementations.

Nothing here reuses the stabilizer kernel or the decomposition builders; gate
matrices and predicate evaluation are written out independently so that
agreement with the fast path is evidence rather than tautology.
"""

from __future__ import annotations

import cmath
import math
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import circuit as ir

DEFAULT_CAP = 14

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_ONE_QUBIT = {
    "h": _H,
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
}


class CapExceeded(ValueError):
    pass


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise CapExceeded(f"{n} qubits exceeds the dense cap of {cap}")


class DenseState:
    """Amplitude vector over n qubits; qubit 0 is the most significant index bit."""

    def __init__(self, n: int, vec: Optional[np.ndarray] = None, cap: int = DEFAULT_CAP):
        _check_cap(n, cap)
        self.n = n
        if vec is None:
            vec = np.zeros(1 << n, dtype=complex)
            vec[0] = 1.0
        self.vec = np.asarray(vec, dtype=complex)
        self._idx = np.arange(1 << n)

    def bit(self, q: int) -> np.ndarray:
        return (self._idx >> (self.n - 1 - q)) & 1

    def reg_value(self, qubits: Sequence[int]) -> np.ndarray:
        out = np.zeros(1 << self.n, dtype=np.int64)
        for q in qubits:
            out = (out << 1) | self.bit(q)
        return out

    def amplitude(self, x: Union[str, Sequence[int]]) -> complex:
        bits = [int(c) for c in x] if isinstance(x, str) else list(x)
        if len(bits) != self.n:
            raise ValueError(f"bit-string length {len(bits)} != {self.n}")
        return complex(self.vec[int("".join(map(str, bits)) or "0", 2)])

    # -- primitive actions --

    def apply_1q(self, u: np.ndarray, q: int, mask: Optional[np.ndarray] = None) -> None:
        """Apply u on qubit q to the branches where mask holds (mask must not depend on q)."""
        step = 1 << (self.n - 1 - q)
        lo = np.flatnonzero(self.bit(q) == 0)
        if mask is not None:
            lo = lo[mask[lo]]
        hi = lo + step
        a, b = self.vec[lo].copy(), self.vec[hi].copy()
        self.vec[lo] = u[0, 0] * a + u[0, 1] * b
        self.vec[hi] = u[1, 0] * a + u[1, 1] * b

    def permute(self, dest: np.ndarray) -> None:
        """Basis state i moves to dest[i]; dest must be a permutation."""
        out = np.zeros_like(self.vec)
        out[dest] = self.vec
        self.vec = out

    def phase(self, ph: np.ndarray) -> None:
        self.vec = self.vec * ph

    def project(self, q: int, b: int) -> None:
        self.vec = np.where(self.bit(q) == b, self.vec, 0)

    def clifford(self, kind: str, qubits: Sequence[int]) -> None:
        if kind in _ONE_QUBIT:
            self.apply_1q(_ONE_QUBIT[kind], qubits[0])
        elif kind == "cx":
            c, t = qubits
            self.apply_1q(_ONE_QUBIT["x"], t, self.bit(c) == 1)
        elif kind == "cz":
            c, t = qubits
            self.phase(np.where((self.bit(c) & self.bit(t)) == 1, -1.0, 1.0))
        else:
            raise ValueError(f"unknown Clifford gate {kind!r}")


# ---------------------------------------------------------------------------
# predicates


def _pred_mask(p, value) -> np.ndarray:
    """Vectorised predicate truth; value(reg) returns the register's value array."""
    if isinstance(p, ir.PTrue):
        return np.ones_like(value(None), dtype=bool)
    if isinstance(p, ir.PFalse):
        return np.zeros_like(value(None), dtype=bool)
    if isinstance(p, ir.EqVars):
        return value(p.a) == value(p.b)
    if isinstance(p, ir.EqConst):
        return value(p.reg) == p.value
    if isinstance(p, ir.Gt):
        return value(p.a) > value(p.b)
    if isinstance(p, ir.Inc):
        return value(p.b) == (value(p.a) + 1) % (1 << len(p.a.qubits))
    if isinstance(p, ir.TruthTable):
        row = np.zeros_like(value(None))
        for r in p.regs:
            row = (row << len(r.qubits)) | value(r)
        return np.isin(row, np.asarray(p.rows, dtype=np.int64))
    if isinstance(p, ir.Not):
        return ~_pred_mask(p.child, value)
    if isinstance(p, ir.And):
        out = np.ones_like(value(None), dtype=bool)
        for c in p.children:
            out &= _pred_mask(c, value)
        return out
    if isinstance(p, ir.Or):
        out = np.zeros_like(value(None), dtype=bool)
        for c in p.children:
            out |= _pred_mask(c, value)
        return out
    raise TypeError(f"not a predicate: {p!r}")


def _registers(p) -> list:
    seen: dict = {}

    def walk(node):
        if isinstance(node, ir.Not):
            walk(node.child)
        elif isinstance(node, (ir.And, ir.Or)):
            for c in node.children:
                walk(c)
        elif isinstance(node, (ir.EqVars, ir.Gt, ir.Inc)):
            seen.setdefault(node.a.name, node.a)
            seen.setdefault(node.b.name, node.b)
        elif isinstance(node, ir.EqConst):
            seen.setdefault(node.reg.name, node.reg)
        elif isinstance(node, ir.TruthTable):
            for r in node.regs:
                seen.setdefault(r.name, r)

    walk(p)
    return list(seen.values())


def predicate_mask(state: DenseState, p) -> np.ndarray:
    def value(reg):
        if reg is None:
            return np.zeros(1 << state.n, dtype=np.int64)
        return state.reg_value(reg.qubits)

    return _pred_mask(p, value)


def dense_effectual(pred, variables: Optional[Sequence] = None, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Unnormalized sum of satisfying basis states over the variables' layout."""
    regs = list(variables) if variables is not None else _registers(pred)
    w = sum(len(r.qubits) for r in regs)
    _check_cap(w, cap)
    idx = np.arange(1 << w)
    offsets, pos = {}, 0
    for r in regs:
        offsets[r.name] = pos
        pos += len(r.qubits)

    def value(reg):
        if reg is None:
            return np.zeros(1 << w, dtype=np.int64)
        k = len(reg.qubits)
        return (idx >> (w - offsets[reg.name] - k)) & ((1 << k) - 1)

    return _pred_mask(pred, value).astype(complex)


def model_count(pred, variables: Optional[Sequence] = None, cap: int = DEFAULT_CAP) -> int:
    return int(round(dense_effectual(pred, variables, cap).real.sum()))


# ---------------------------------------------------------------------------
# decompositions


def dense_prep(prep: Iterable, n: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    st = DenseState(n, cap=cap)
    for op in prep:
        st.clifford(op.kind, op.qubits)
    return st.vec


def dense_of_decomp(d, cap: int = DEFAULT_CAP) -> np.ndarray:
    out = np.zeros(1 << d.arity, dtype=complex)
    for t in d.terms:
        out += t.weight * dense_prep(t.prep, d.arity, cap)
    return out


# ---------------------------------------------------------------------------
# circuits


def _controlled_u(state: DenseState, u: np.ndarray, target: int, mask: np.ndarray) -> None:
    state.apply_1q(u, target, mask)


def _query(state: DenseState, fn, x, y, cond: Optional[np.ndarray] = None) -> None:
    xv = state.reg_value(x.qubits)
    if isinstance(fn, ir.IncFn):
        g = (xv + 1) % (1 << len(x.qubits))
    else:
        g = np.asarray(fn.values, dtype=np.int64)[xv]
    if cond is not None:
        g = np.where(cond, g, 0)
    flip = np.zeros_like(g)
    k = len(y.qubits)
    for i, q in enumerate(y.qubits):
        flip |= ((g >> (k - 1 - i)) & 1) << (state.n - 1 - q)
    state.permute(state._idx ^ flip)


def apply_gate(state: DenseState, g) -> None:
    """Apply one IR gate by its defining action."""
    if isinstance(g, ir.CliffordOp):
        state.clifford(g.kind, g.qubits)
    elif isinstance(g, ir.Rz):
        state.phase(np.where(state.bit(g.qubit) == 1, cmath.exp(1j * g.theta), 1.0))
    elif isinstance(g, ir.T):
        state.phase(np.where(state.bit(g.qubit) == 1, cmath.exp(1j * math.pi / 4), 1.0))
    elif isinstance(g, (ir.MCX, ir.MCU)):
        mask = np.ones(1 << state.n, dtype=bool)
        for c in g.controls:
            mask &= state.bit(c) == 1
        u = _ONE_QUBIT["x"] if isinstance(g, ir.MCX) else g.u.matrix
        _controlled_u(state, u, g.target, mask)
    elif isinstance(g, ir.OracleRz):
        state.phase(np.where(predicate_mask(state, g.pred), cmath.exp(1j * g.theta), 1.0))
    elif isinstance(g, ir.OracleX):
        _controlled_u(state, _ONE_QUBIT["x"], g.target, predicate_mask(state, g.pred))
    elif isinstance(g, ir.OracleRx):
        rx = _H @ np.diag([1, cmath.exp(1j * g.theta)]) @ _H
        _controlled_u(state, rx, g.target, predicate_mask(state, g.pred))
    elif isinstance(g, ir.OracleU):
        _controlled_u(state, g.u.matrix, g.target, predicate_mask(state, g.pred))
    elif isinstance(g, ir.Query):
        _query(state, g.fn, g.x, g.y)
    elif isinstance(g, ir.CondQuery):
        _query(state, g.fn, g.x, g.y, predicate_mask(state, g.pred))
    elif isinstance(g, ir.Postselect):
        state.project(g.qubit, g.outcome)
    else:
        raise TypeError(f"unsupported gate {g!r}")


def dense_state(circuit, cap: int = DEFAULT_CAP, initial: Optional[np.ndarray] = None) -> DenseState:
    st = DenseState(circuit.num_qubits, None if initial is None else np.array(initial, dtype=complex), cap=cap)
    for g in circuit.gates:
        apply_gate(st, g)
    return st


def dense_simulate(circuit, x: Union[str, Sequence[int]], cap: int = DEFAULT_CAP) -> complex:
    """<x| C |0^n> with high-level gates applied by definition and unnormalized projections."""
    return dense_state(circuit, cap).amplitude(x)


# ---------------------------------------------------------------------------
# gadgetized op streams


def run_ops(n: int, ops: Iterable, slots: Sequence = (), initial: Optional[np.ndarray] = None,
            cap: int = DEFAULT_CAP) -> np.ndarray:
    """Run Clifford ops, projections and slot markers densely.

    At a slot the (supposedly fresh) ancilla qubits are projected to 0 and
    replaced by the slot's full magic-state vector.
    """
    st = DenseState(n, None if initial is None else np.array(initial, dtype=complex), cap=cap)
    magic = [dense_of_decomp(s, cap) for s in slots]
    for op in ops:
        kind = type(op).__name__
        if kind == "CliffordOp":
            st.clifford(op.kind, op.qubits)
        elif kind == "Projection":
            st.project(op.qubit, op.outcome)
        elif kind == "SlotRef":
            anc = op.qubits
            for q in anc:
                st.project(q, 0)
            vec = magic[op.slot]
            k = len(anc)
            out = np.zeros_like(st.vec)
            base = np.flatnonzero(st.vec)
            for a in range(1 << k):
                if vec[a] == 0:
                    continue
                shift = 0
                for i, q in enumerate(anc):
                    if (a >> (k - 1 - i)) & 1:
                        shift |= 1 << (n - 1 - q)
                out[base + shift] += vec[a] * st.vec[base]
            st.vec = out
        else:
            raise TypeError(f"unsupported op {op!r}")
    return st.vec
