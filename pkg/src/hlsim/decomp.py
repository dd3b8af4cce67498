"""Stabilizer decompositions of effectual states and predicate-controlled magic states.

An effectual decomposition is unnormalized: its weighted terms sum to
``E(phi) = sum over satisfying x of |x>``.  A magic decomposition is
normalized: it sums to ``2^{-k/2} sum_x D_x |x>`` for a diagonal gate D.

Every term's prep circuit acts on local qubits ``0..arity-1`` laid out as the
concatenation of the decomposition's variables (registers), each register
most-significant bit first.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .circuit import (
    And,
    EqConst,
    EqVars,
    Gt,
    Inc,
    Not,
    Or,
    PFalse,
    Predicate,
    PTrue,
    Register,
    TruthTable,
    pred_registers,
)
from .stabilizer import CliffordOp

PRUNE_EPS = 1e-12
_SQRT2 = math.sqrt(2.0)
# complement tables are only considered below this width
_MAX_COMPLEMENT_WIDTH = 16

Prep = tuple[CliffordOp, ...]


@dataclass(frozen=True)
class DecompTerm:
    weight: complex
    prep: Prep

    def __str__(self) -> str:
        body = "; ".join(str(op) for op in self.prep) or "id"
        return f"{self.weight.real!r} {self.weight.imag!r} : {body}"


@dataclass(frozen=True)
class EffectualDecomp:
    arity: int
    terms: tuple[DecompTerm, ...]
    model_count: int
    variables: tuple[Register, ...] = ()

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class MagicDecomp:
    arity: int
    terms: tuple[DecompTerm, ...]

    def __len__(self) -> int:
        return len(self.terms)


def format_decomp(d) -> str:
    lines = [str(t) for t in d.terms]
    lines.append(f"terms {len(d.terms)}")
    if isinstance(d, EffectualDecomp):
        lines.append(f"models {d.model_count}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# internal term lists over a register layout


@dataclass
class _Part:
    regs: tuple[Register, ...]
    terms: list[tuple[complex, Prep]]
    count: int

    @property
    def width(self) -> int:
        return sum(r.width for r in self.regs)


def _offsets(regs: Sequence[Register]) -> dict[str, int]:
    out, pos = {}, 0
    for r in regs:
        out[r.name] = pos
        pos += r.width
    return out


def _merge(terms: Iterable[tuple[complex, Prep]]) -> list[tuple[complex, Prep]]:
    acc: dict[Prep, complex] = {}
    for w, prep in terms:
        acc[prep] = acc.get(prep, 0j) + w
    return [(w, p) for p, w in acc.items() if abs(w) > PRUNE_EPS]


def _op(kind: str, *qs: int) -> CliffordOp:
    return CliffordOp(kind, qs)


def _embed(part: _Part, regs: tuple[Register, ...]) -> list[tuple[complex, Prep]]:
    """Re-index onto a larger layout, padding unused registers with a uniform sum."""
    dst = _offsets(regs)
    src_names = {r.name for r in part.regs}
    mapping: list[int] = []
    for r in part.regs:
        mapping.extend(range(dst[r.name], dst[r.name] + r.width))
    pad: list[int] = []
    for r in regs:
        if r.name not in src_names:
            pad.extend(range(dst[r.name], dst[r.name] + r.width))
    scale = _SQRT2 ** len(pad)
    pad_ops = tuple(_op("h", q) for q in pad)
    return [(w * scale, tuple(op.remap(mapping) for op in prep) + pad_ops) for w, prep in part.terms]


def _extra_width(part: _Part, regs: Sequence[Register]) -> int:
    names = {r.name for r in part.regs}
    return sum(r.width for r in regs if r.name not in names)


def _uniform(regs: tuple[Register, ...]) -> _Part:
    k = sum(r.width for r in regs)
    return _Part(regs, [(_SQRT2**k, tuple(_op("h", q) for q in range(k)))], 1 << k)


def _tensor(parts: Sequence[_Part]) -> _Part:
    regs: tuple[Register, ...] = ()
    terms: list[tuple[complex, Prep]] = [(1.0 + 0j, ())]
    count = 1
    for p in parts:
        shift = sum(r.width for r in regs)
        mapping = list(range(shift, shift + p.width))
        terms = [
            (w1 * w2, prep1 + tuple(op.remap(mapping) for op in prep2))
            for w1, prep1 in terms
            for w2, prep2 in p.terms
        ]
        regs = regs + p.regs
        count *= p.count
    return _Part(regs, _merge(terms), count)


def _negate(part: _Part) -> _Part:
    uni = _uniform(part.regs)
    terms = uni.terms + [(-w, prep) for w, prep in part.terms]
    return _Part(part.regs, _merge(terms), uni.count - part.count)


def _check_disjoint(children: Sequence[_Part]) -> None:
    seen: set[str] = set()
    for c in children:
        names = {r.name for r in c.regs}
        if names & seen:
            raise ValueError(f"children share registers {sorted(names & seen)}; split shared variables first")
        seen |= names
    qubits: set[int] = set()
    for c in children:
        qs = {q for r in c.regs for q in r.qubits}
        if qs & qubits:
            raise ValueError("children share qubits; split shared variables first")
        qubits |= qs


# ---------------------------------------------------------------------------
# atoms


def _eq_vars(a: Register, b: Register) -> _Part:
    k = a.width
    prep = tuple(_op("h", i) for i in range(k)) + tuple(_op("cx", i, k + i) for i in range(k))
    return _Part((a, b), [(_SQRT2**k, prep)], 1 << k)


def _eq_const(r: Register, value: int) -> _Part:
    k = r.width
    prep = tuple(_op("x", i) for i in range(k) if (value >> (k - 1 - i)) & 1)
    return _Part((r,), [(1.0 + 0j, prep)], 1)


def _gt(a: Register, b: Register) -> _Part:
    """a > b: one term per position of the leading differing bit."""
    k = a.width
    terms = []
    for ell in range(k):
        prep = [_op("h", i) for i in range(ell)]
        prep += [_op("cx", i, k + i) for i in range(ell)]
        prep.append(_op("x", ell))
        prep += [_op("h", i) for i in range(ell + 1, k)]
        prep += [_op("h", k + i) for i in range(ell + 1, k)]
        terms.append((_SQRT2 ** (2 * k - ell - 2), tuple(prep)))
    return _Part((a, b), terms, (1 << k) * ((1 << k) - 1) // 2)


def _inc(a: Register, b: Register) -> _Part:
    """b = a + 1 mod 2^k: a = p 0 1..1 maps to b = p 1 0..0, plus the wraparound."""
    k = a.width
    terms = []
    for ell in range(k):
        prep = [_op("h", i) for i in range(ell)]
        prep += [_op("cx", i, k + i) for i in range(ell)]
        prep.append(_op("x", k + ell))
        prep += [_op("x", i) for i in range(ell + 1, k)]
        terms.append((_SQRT2**ell, tuple(prep)))
    terms.append((1.0 + 0j, tuple(_op("x", i) for i in range(k))))
    return _Part((a, b), terms, 1 << k)


def _rows_part(regs: tuple[Register, ...], rows: Sequence[int]) -> _Part:
    w = sum(r.width for r in regs)
    terms = [(1.0 + 0j, tuple(_op("x", i) for i in range(w) if (row >> (w - 1 - i)) & 1)) for row in rows]
    return _Part(regs, terms, len(rows))


def _table(t: TruthTable) -> _Part:
    direct = _rows_part(t.regs, t.rows)
    w = t.width
    if w <= _MAX_COMPLEMENT_WIDTH and (1 << w) - len(t.rows) + 1 < len(t.rows):
        present = set(t.rows)
        comp = _rows_part(t.regs, [r for r in range(1 << w) if r not in present])
        neg = _negate(comp)
        if len(neg.terms) < len(direct.terms):
            return neg
    return direct


# ---------------------------------------------------------------------------
# connectives


def _or_eq6(children: Sequence[_Part], regs: tuple[Register, ...]) -> _Part:
    """Fold E(a or b) = E(a) + E(b) - E(a and b) over disjoint children."""
    acc = children[0]
    for nxt in children[1:]:
        layout = acc.regs + nxt.regs
        both = _tensor([acc, nxt])
        terms = _embed(acc, layout) + _embed(nxt, layout) + [(-w, p) for w, p in both.terms]
        count = acc.count * (1 << nxt.width) + nxt.count * (1 << acc.width) - acc.count * nxt.count
        acc = _Part(layout, _merge(terms), count)
    return _Part(regs, _merge(_embed(acc, regs)), acc.count)


def _or_demorgan(children: Sequence[Predicate]) -> _Part:
    return _build(Not(And(tuple(Not(c) for c in children))))


def _build(p: Predicate) -> _Part:
    if isinstance(p, PTrue):
        return _Part((), [(1.0 + 0j, ())], 1)
    if isinstance(p, PFalse):
        return _Part((), [], 0)
    if isinstance(p, EqVars):
        return _eq_vars(p.a, p.b)
    if isinstance(p, EqConst):
        return _eq_const(p.reg, p.value)
    if isinstance(p, Gt):
        return _gt(p.a, p.b)
    if isinstance(p, Inc):
        return _inc(p.a, p.b)
    if isinstance(p, TruthTable):
        return _table(p)
    if isinstance(p, Not):
        c = p.child
        if isinstance(c, Not):
            return _build(c.child)
        if isinstance(c, EqConst) and c.reg.width == 1:
            return _eq_const(c.reg, 1 - c.value)
        return _negate(_build(c))
    if isinstance(p, And):
        kids = [_build(c) for c in p.children]
        _check_disjoint(kids)
        return _tensor(kids)
    if isinstance(p, Or):
        kids = [_build(c) for c in p.children]
        regs = pred_registers(p)
        if p.exclusive:
            terms = [t for c in kids for t in _embed(c, regs)]
            count = sum(c.count << _extra_width(c, regs) for c in kids)
            return _Part(regs, _merge(terms), count)
        _check_disjoint(kids)
        if len(kids) == 1:
            return kids[0]
        eq6 = _or_eq6(kids, regs)
        dm = _or_demorgan(p.children)
        if len(dm.terms) < len(eq6.terms):
            return _Part(regs, _merge(_embed(dm, regs)), dm.count)
        return eq6
    raise TypeError(f"not a predicate: {p!r}")


def build_effectual(pred: Predicate, variables: Optional[Sequence[Register]] = None) -> EffectualDecomp:
    """Decompose E(pred) over ``variables`` (default: the predicate's registers in order).

    Conjunction and non-exclusive disjunction children must use disjoint
    registers; the lowering splits shared variables before calling this.
    """
    part = _build(pred)
    regs = tuple(variables) if variables is not None else pred_registers(pred)
    missing = {r.name for r in part.regs} - {r.name for r in regs}
    if missing:
        raise ValueError(f"variables do not cover predicate registers {sorted(missing)}")
    terms = _merge(_embed(part, regs))
    count = part.count << _extra_width(part, regs)
    arity = sum(r.width for r in regs)
    return EffectualDecomp(arity, tuple(DecompTerm(complex(w), p) for w, p in terms), count, regs)


# ---------------------------------------------------------------------------
# magic states


def _single_qubit_terms(w0: complex, w1: complex, q: int) -> list[tuple[complex, Prep]]:
    """Stabilizer terms for w0|0> + w1|1> on local qubit q."""
    if abs(w0) <= PRUNE_EPS and abs(w1) <= PRUNE_EPS:
        return []
    if abs(w1) <= PRUNE_EPS:
        return [(w0, ())]
    if abs(w0) <= PRUNE_EPS:
        return [(w1, (_op("x", q),))]
    r = w1 / w0
    for m, phase in enumerate((1, 1j, -1, -1j)):
        if abs(r - phase) <= PRUNE_EPS:
            tail = {0: (), 1: (_op("s", q),), 2: (_op("z", q),), 3: (_op("sdg", q),)}[m]
            return [(w0 * _SQRT2, (_op("h", q),) + tail)]
    return [(w0, ()), (w1, (_op("x", q),))]


def build_magic_cond_diag(effectual: EffectualDecomp, d0: complex, d1: complex) -> MagicDecomp:
    """Magic state of the gate |x,b> -> (d_b if phi(x) else 1)|x,b>; the target is the last qubit."""
    k = effectual.arity
    n = k + 1
    uniform = (1.0 + 0j, tuple(_op("h", q) for q in range(n)))
    scale = 2.0 ** (-n / 2)
    tail = _single_qubit_terms(d0 - 1, d1 - 1, k)
    terms = [uniform]
    for t in effectual.terms:
        for w, prep in tail:
            terms.append((t.weight * w * scale, t.prep + prep))
    return MagicDecomp(n, tuple(DecompTerm(complex(w), p) for w, p in _merge(terms)))


def build_magic_cond_rz(effectual: EffectualDecomp, theta: float) -> MagicDecomp:
    """Magic state of C_phi Rz(theta): 2^{-(k+1)/2}(sum |x,b> + (e^{i theta} - 1) E(phi)|1>)."""
    return build_magic_cond_diag(effectual, 1.0, cmath.exp(1j * theta))


def build_magic_phase(effectual: EffectualDecomp, theta: float) -> MagicDecomp:
    """Magic state of |x> -> e^{i theta phi(x)}|x> with no target qubit."""
    k = effectual.arity
    scale = 2.0 ** (-k / 2)
    c = cmath.exp(1j * theta) - 1
    terms = [(1.0 + 0j, tuple(_op("h", q) for q in range(k)))]
    terms += [(t.weight * c * scale, t.prep) for t in effectual.terms]
    return MagicDecomp(k, tuple(DecompTerm(complex(w), p) for w, p in _merge(terms)))
