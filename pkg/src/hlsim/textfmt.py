"""Line-oriented circuit text format (``.hqc``) and predicate s-expressions.

Truth tables may be given as a file path (relative to the circuit file) or
inline as ``{0101,1100}``.  The emitter always writes tables inline so that
an emitted circuit is self-contained.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from .circuit import (
    And,
    Circuit,
    CondQuery,
    Diagnostic,
    EqConst,
    EqVars,
    Gt,
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
    PFalse,
    PTrue,
    Postselect,
    Predicate,
    Query,
    QueryFn,
    Register,
    Rz,
    T,
    TableFn,
    TruthTable,
    Unitary2,
    validate_gate,
    validate_registers,
)
from .stabilizer import CLIFFORD_ARITY, CliffordOp


class ParseError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class _LineError(Exception):
    def __init__(self, code: str, message: str, col: int):
        super().__init__(message)
        self.code = code
        self.message = message
        self.col = col


@dataclass(frozen=True)
class _Tok:
    text: str
    col: int  # 1-based


_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = {v: k for k, v in _OPEN.items()}


def _tokenize(line: str) -> list[_Tok]:
    """Split on whitespace, keeping bracketed groups (and words glued to them) whole."""
    toks: list[_Tok] = []
    i, n = 0, len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        start = i
        stack: list[str] = []
        while i < n and (stack or not line[i].isspace()):
            ch = line[i]
            if ch in _OPEN:
                stack.append(_OPEN[ch])
            elif ch in _CLOSE:
                if not stack or stack.pop() != ch:
                    raise _LineError("lexical", f"unbalanced {ch!r}", i + 1)
            i += 1
        if stack:
            raise _LineError("lexical", f"missing {stack[-1]!r}", start + 1)
        toks.append(_Tok(line[start:i], start + 1))
    return toks


# ---------------------------------------------------------------------------
# numbers

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_angle(node: ast.AST) -> float:
    if isinstance(node, ast.Expression):
        return _eval_angle(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_angle(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_angle(node.left), _eval_angle(node.right))
    raise ValueError("unsupported expression")


def parse_angle(text: str) -> float:
    """A float, or an arithmetic expression over numbers and ``pi``."""
    try:
        value = _eval_angle(ast.parse(text, mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad angle {text!r}") from exc
    if not math.isfinite(value):
        raise ValueError(f"angle {text!r} is not finite")
    return value


def parse_complex(text: str) -> complex:
    """Complex literal in the form ``re+imi`` (either part optional)."""
    t = text.strip()
    if t.endswith("i"):
        t = t[:-1] + "j"
        if t in ("j", "+j", "-j") or t[-2] in "+-":
            t = t[:-1] + "1j"
    try:
        z = complex(t)
    except ValueError as exc:
        raise ValueError(f"bad complex number {text!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"complex number {text!r} is not finite")
    return z


def format_complex(z: complex) -> str:
    im = repr(float(z.imag))
    sign = "" if im.startswith("-") else "+"
    return f"{float(z.real)!r}{sign}{im}i"


def _int(tok: _Tok, what: str) -> int:
    if not re.fullmatch(r"\d+", tok.text):
        raise _LineError("bad-number", f"expected {what}, got {tok.text!r}", tok.col)
    return int(tok.text)


def _int_list(tok: _Tok) -> tuple[int, ...]:
    if not (tok.text.startswith("[") and tok.text.endswith("]")):
        raise _LineError("lexical", f"expected [i,j,...], got {tok.text!r}", tok.col)
    body = tok.text[1:-1].strip()
    if not body:
        return ()
    out = []
    for part in body.split(","):
        part = part.strip()
        if not re.fullmatch(r"\d+", part):
            raise _LineError("bad-number", f"bad qubit index {part!r}", tok.col)
        out.append(int(part))
    return tuple(out)


# ---------------------------------------------------------------------------
# truth tables


def _parse_rows(lines: Sequence[str], width: int, col: int) -> list[int]:
    rows = []
    for raw in lines:
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        if not re.fullmatch(r"[01]+", s):
            raise _LineError("lexical", f"bad table row {s!r}", col)
        if len(s) != width:
            raise _LineError("width-mismatch", f"table row {s!r} has {len(s)} bits, expected {width}", col)
        rows.append(int(s, 2))
    return rows


def _load_rows(spec: str, width: int, col: int, base_dir: Optional[Path]) -> list[int]:
    if spec.startswith("{"):
        if not spec.endswith("}"):
            raise _LineError("lexical", f"bad inline table {spec!r}", col)
        return _parse_rows(re.split(r"[,\s]+", spec[1:-1]), width, col)
    path = Path(spec)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _LineError("file", f"cannot read table file {spec!r}: {exc.strerror}", col) from exc
    return _parse_rows(text.splitlines(), width, col)


def _format_rows(rows: Sequence[int], width: int) -> str:
    return "{" + ",".join(format(r, f"0{width}b") for r in rows) + "}"


# ---------------------------------------------------------------------------
# predicates


def _sexpr_tokens(text: str, col0: int) -> list[_Tok]:
    toks = []
    for m in re.finditer(r"\(|\)|\{[^}]*\}|[^\s(){}]+", text):
        toks.append(_Tok(m.group(0), col0 + m.start()))
    return toks


class _PredParser:
    def __init__(self, text: str, col0: int, regs: Mapping[str, Register], base_dir: Optional[Path]):
        self.toks = _sexpr_tokens(text, col0)
        self.pos = 0
        self.regs = regs
        self.base_dir = base_dir
        self.end_col = col0 + len(text)

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise _LineError("malformed-predicate", "unexpected end of predicate", self.end_col)
        self.pos += 1
        return tok

    def reg(self) -> Register:
        tok = self.take()
        if tok.text in "()":
            raise _LineError("malformed-predicate", f"expected a register, got {tok.text!r}", tok.col)
        if tok.text not in self.regs:
            raise _LineError("undefined-register", f"unknown register {tok.text!r}", tok.col)
        return self.regs[tok.text]

    def close(self, head: _Tok) -> None:
        tok = self.take()
        if tok.text != ")":
            raise _LineError("arity", f"too many operands for {head.text!r}", tok.col)

    def parse(self) -> Predicate:
        p = self.node()
        extra = self.peek()
        if extra is not None:
            raise _LineError("malformed-predicate", f"trailing input {extra.text!r}", extra.col)
        return p

    def node(self) -> Predicate:
        open_tok = self.take()
        if open_tok.text != "(":
            raise _LineError("malformed-predicate", f"expected '(', got {open_tok.text!r}", open_tok.col)
        head = self.take()
        op = head.text
        if op == "true":
            self.close(head)
            return PTrue()
        if op == "false":
            self.close(head)
            return PFalse()
        if op in ("eq", "gt", "inc"):
            a = self.reg()
            nxt = self.peek()
            if op == "eq" and nxt is not None and re.fullmatch(r"\d+", nxt.text):
                self.take()
                value = int(nxt.text)
                if value >= 1 << a.width:
                    raise _LineError("width-mismatch", f"constant {value} does not fit register {a.name} of width {a.width}", nxt.col)
                self.close(head)
                return EqConst(a, value)
            b = self.reg()
            if a.width != b.width:
                raise _LineError("width-mismatch", f"{a.name} has width {a.width} but {b.name} has width {b.width}", head.col)
            if a.name == b.name:
                raise _LineError("duplicate-register", f"register {a.name} used twice in one atom", head.col)
            self.close(head)
            return {"eq": EqVars, "gt": Gt, "inc": Inc}[op](a, b)
        if op == "table":
            regs = []
            while True:
                tok = self.peek()
                if tok is None or tok.text == ")":
                    raise _LineError("arity", "table needs registers and a FILE", head.col)
                if tok.text in self.regs:
                    regs.append(self.reg())
                    continue
                break
            spec = self.take()
            if not regs:
                raise _LineError("arity", "table needs at least one register", head.col)
            if len({r.name for r in regs}) != len(regs):
                raise _LineError("duplicate-register", "register repeated in table", head.col)
            width = sum(r.width for r in regs)
            rows = _load_rows(spec.text, width, spec.col, self.base_dir)
            self.close(head)
            return TruthTable(tuple(regs), tuple(rows))
        if op == "not":
            child = self.node()
            self.close(head)
            return Not(child)
        if op in ("and", "or"):
            kids = []
            while (tok := self.peek()) is not None and tok.text != ")":
                kids.append(self.node())
            self.take()
            if not kids:
                raise _LineError("arity", f"{op} needs at least one operand", head.col)
            return And(tuple(kids)) if op == "and" else Or(tuple(kids))
        raise _LineError("malformed-predicate", f"unknown predicate {op!r}", head.col)


def parse_predicate(
    text: str,
    registers: Union[Mapping[str, Register], Sequence[Register]],
    base_dir: Optional[Union[str, Path]] = None,
) -> Predicate:
    """Parse one predicate s-expression; raises ParseError with diagnostics."""
    regs = registers if isinstance(registers, Mapping) else {r.name: r for r in registers}
    try:
        return _PredParser(text.strip(), 1, regs, Path(base_dir) if base_dir else None).parse()
    except _LineError as exc:
        raise ParseError([Diagnostic(exc.code, exc.message, 1, exc.col)]) from None


def emit_predicate(p: Predicate) -> str:
    if isinstance(p, PTrue):
        return "(true)"
    if isinstance(p, PFalse):
        return "(false)"
    if isinstance(p, EqVars):
        return f"(eq {p.a.name} {p.b.name})"
    if isinstance(p, EqConst):
        return f"(eq {p.reg.name} {p.value})"
    if isinstance(p, Gt):
        return f"(gt {p.a.name} {p.b.name})"
    if isinstance(p, Inc):
        return f"(inc {p.a.name} {p.b.name})"
    if isinstance(p, TruthTable):
        names = " ".join(r.name for r in p.regs)
        return f"(table {names} {_format_rows(p.rows, p.width)})"
    if isinstance(p, Not):
        return f"(not {emit_predicate(p.child)})"
    if isinstance(p, And):
        return "(and " + " ".join(emit_predicate(c) for c in p.children) + ")"
    if isinstance(p, Or):
        return "(or " + " ".join(emit_predicate(c) for c in p.children) + ")"
    raise TypeError(f"not a predicate: {p!r}")


# ---------------------------------------------------------------------------
# circuits


def _parse_unitary(tok: _Tok) -> Unitary2:
    m = re.fullmatch(r"u=\((.*)\)", tok.text)
    if not m:
        raise _LineError("lexical", f"expected u=(a,b;c,d), got {tok.text!r}", tok.col)
    rows = m.group(1).split(";")
    entries = [e for r in rows for e in r.split(",")]
    if len(rows) != 2 or len(entries) != 4:
        raise _LineError("lexical", "unitary needs two rows of two entries", tok.col)
    try:
        return Unitary2(*(parse_complex(e) for e in entries))
    except ValueError as exc:
        raise _LineError("bad-number", str(exc), tok.col) from None


def _parse_fn(tok: _Tok, x: Register, y: Register, base_dir: Optional[Path]) -> QueryFn:
    if tok.text == "inc":
        return IncFn()
    if not tok.text.startswith("table:"):
        raise _LineError("unknown-function", f"unknown query function {tok.text!r}", tok.col)
    rows = _load_rows(tok.text[len("table:"):], x.width + y.width, tok.col + 6, base_dir)
    values = [0] * (1 << x.width)
    seen: set[int] = set()
    mask = (1 << y.width) - 1
    for row in rows:
        xin, out = row >> y.width, row & mask
        if xin in seen:
            raise _LineError("duplicate-row", f"input {xin} listed twice in query table", tok.col)
        seen.add(xin)
        values[xin] = out
    return TableFn(tuple(values))


def _emit_fn(fn: QueryFn, x: Register, y: Register) -> str:
    if isinstance(fn, IncFn):
        return "inc"
    rows = [(xin << y.width) | v for xin, v in enumerate(fn.values) if v]
    return "table:" + _format_rows(rows, x.width + y.width)


class _CircuitParser:
    def __init__(self, base_dir: Optional[Path]):
        self.base_dir = base_dir
        self.num_qubits: Optional[int] = None
        self.registers: dict[str, Register] = {}
        self.gates: list = []
        self.diags: list[Diagnostic] = []
        self.headless = False
        self.lineno = 0

    def expect(self, toks: list[_Tok], count: int, head: _Tok) -> None:
        if len(toks) != count:
            col = toks[count].col if len(toks) > count else head.col
            raise _LineError("arity", f"{head.text} takes {count - 1} operand(s), got {len(toks) - 1}", col)

    def qubit(self, tok: _Tok) -> int:
        """A qubit index, or the name of a one-qubit register."""
        reg = self.registers.get(tok.text)
        if reg is not None:
            if reg.width != 1:
                raise _LineError("width-mismatch", f"register {reg.name} has width {reg.width}, expected a single qubit", tok.col)
            return reg.qubits[0]
        return _int(tok, "qubit index")

    def qubits(self, tok: _Tok) -> tuple[int, ...]:
        if tok.text.startswith("[") and tok.text.endswith("]"):
            body = tok.text[1:-1].strip()
            if not body:
                return ()
            return tuple(self.qubit(_Tok(part.strip(), tok.col)) for part in body.split(","))
        raise _LineError("lexical", f"expected [i,j,...], got {tok.text!r}", tok.col)

    def reg(self, tok: _Tok) -> Register:
        if tok.text not in self.registers:
            raise _LineError("undefined-register", f"unknown register {tok.text!r}", tok.col)
        return self.registers[tok.text]

    def pred(self, tok: _Tok) -> Predicate:
        if not tok.text.startswith("("):
            raise _LineError("malformed-predicate", f"expected a predicate, got {tok.text!r}", tok.col)
        return _PredParser(tok.text, tok.col, self.registers, self.base_dir).parse()

    def angle(self, tok: _Tok) -> float:
        try:
            return parse_angle(tok.text)
        except ValueError as exc:
            raise _LineError("bad-number", str(exc), tok.col) from None

    def arrow(self, tok: _Tok) -> None:
        if tok.text != "->":
            raise _LineError("lexical", f"expected '->', got {tok.text!r}", tok.col)

    def line(self, toks: list[_Tok]):
        head = toks[0]
        op = head.text
        if op == "qubits":
            self.expect(toks, 2, head)
            if self.num_qubits is not None:
                raise _LineError("header", "duplicate qubits header", head.col)
            n = _int(toks[1], "qubit count")
            if n < 1:
                raise _LineError("header", "qubit count must be positive", toks[1].col)
            self.num_qubits = n
            return None
        if self.num_qubits is None and not self.headless:
            self.headless = True
            self.diags.append(Diagnostic("header", "missing 'qubits N' header before first statement", self.lineno, head.col))
        if op == "reg":
            self.expect(toks, 3, head)
            name = toks[1].text
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
                raise _LineError("lexical", f"bad register name {name!r}", toks[1].col)
            if name in self.registers:
                raise _LineError("duplicate-register", f"register {name} declared twice", toks[1].col)
            spec = toks[2]
            m = re.fullmatch(r"(\d+)\.\.(\d+)", spec.text)
            if m:
                lo, hi = int(m.group(1)), int(m.group(2))
                if lo > hi:
                    raise _LineError("lexical", f"empty range {spec.text}", spec.col)
                qubits = tuple(range(lo, hi + 1))
            elif re.fullmatch(r"\d+", spec.text):
                qubits = (int(spec.text),)
            else:
                qubits = _int_list(spec)
            reg = Register(name, qubits)
            diags = validate_registers(self.num_qubits or 1 << 30, [*self.registers.values(), reg])
            if diags:
                raise _LineError(diags[0].code, diags[0].message, spec.col)
            self.registers[name] = reg
            return None
        if op in CLIFFORD_ARITY:
            k = CLIFFORD_ARITY[op]
            self.expect(toks, k + 1, head)
            qs = tuple(self.qubit(t) for t in toks[1:])
            if len(set(qs)) != len(qs):
                raise _LineError("duplicate-operands", "duplicate qubit operands", toks[2].col)
            return CliffordOp(op, qs)
        if op == "t":
            self.expect(toks, 2, head)
            return T(self.qubit(toks[1]))
        if op == "rz":
            self.expect(toks, 3, head)
            return Rz(self.angle(toks[1]), self.qubit(toks[2]))
        if op == "mcx":
            self.expect(toks, 3, head)
            return MCX(self.qubits(toks[1]), self.qubit(toks[2]))
        if op == "mcu":
            self.expect(toks, 4, head)
            return MCU(self.qubits(toks[1]), self.qubit(toks[2]), _parse_unitary(toks[3]))
        if op == "oracle_rz":
            self.expect(toks, 3, head)
            return OracleRz(self.pred(toks[1]), self.angle(toks[2]))
        if op == "oracle_x":
            self.expect(toks, 3, head)
            return OracleX(self.pred(toks[1]), self.qubit(toks[2]))
        if op == "oracle_rx":
            self.expect(toks, 4, head)
            return OracleRx(self.pred(toks[1]), self.angle(toks[2]), self.qubit(toks[3]))
        if op == "oracle_u":
            self.expect(toks, 4, head)
            return OracleU(self.pred(toks[1]), self.qubit(toks[2]), _parse_unitary(toks[3]))
        if op == "query":
            self.expect(toks, 5, head)
            self.arrow(toks[3])
            x, y = self.reg(toks[2]), self.reg(toks[4])
            return Query(_parse_fn(toks[1], x, y, self.base_dir), x, y)
        if op == "cond_query":
            self.expect(toks, 6, head)
            self.arrow(toks[4])
            x, y = self.reg(toks[3]), self.reg(toks[5])
            return CondQuery(self.pred(toks[1]), _parse_fn(toks[2], x, y, self.base_dir), x, y)
        if op == "postselect":
            self.expect(toks, 4, head)
            self.arrow(toks[2])
            b = _int(toks[3], "outcome")
            if b not in (0, 1):
                raise _LineError("bad-outcome", "outcome must be 0 or 1", toks[3].col)
            return Postselect(self.qubit(toks[1]), b)
        raise _LineError("unknown-gate", f"unknown gate {op!r}", head.col)

    def run(self, text: str) -> Circuit:
        for lineno, raw in enumerate(text.splitlines(), start=1):
            self.lineno = lineno
            body = raw.split("#", 1)[0]
            try:
                toks = _tokenize(body)
                if not toks:
                    continue
                gate = self.line(toks)
                if gate is None:
                    continue
                for d in validate_gate(gate, self.num_qubits or 1 << 30, self.registers):
                    self.diags.append(Diagnostic(d.code, d.message, lineno, toks[0].col))
                self.gates.append(gate)
            except _LineError as exc:
                self.diags.append(Diagnostic(exc.code, exc.message, lineno, exc.col))
            except ValueError as exc:
                self.diags.append(Diagnostic("invalid", str(exc), lineno, 1))
        if self.num_qubits is None and not self.diags:
            self.diags.append(Diagnostic("header", "missing 'qubits N' header", 1, 1))
        if self.diags:
            raise ParseError(self.diags)
        return Circuit(self.num_qubits, tuple(self.registers.values()), tuple(self.gates))


def parse_circuit(text: str, base_dir: Optional[Union[str, Path]] = None) -> Circuit:
    """Parse and validate a circuit; raises ParseError carrying every diagnostic."""
    return _CircuitParser(Path(base_dir) if base_dir else None).run(text)


def parse_circuit_file(path: Union[str, Path]) -> Circuit:
    path = Path(path)
    return parse_circuit(path.read_text(encoding="utf-8"), base_dir=path.parent)


def _emit_list(qs: Sequence[int]) -> str:
    return "[" + ",".join(str(q) for q in qs) + "]"


def _emit_unitary(u: Unitary2) -> str:
    return f"u=({format_complex(u.a)},{format_complex(u.b)};{format_complex(u.c)},{format_complex(u.d)})"


def emit_gate(g) -> str:
    if isinstance(g, CliffordOp):
        return str(g)
    if isinstance(g, T):
        return f"t {g.qubit}"
    if isinstance(g, Rz):
        return f"rz {g.theta!r} {g.qubit}"
    if isinstance(g, MCX):
        return f"mcx {_emit_list(g.controls)} {g.target}"
    if isinstance(g, MCU):
        return f"mcu {_emit_list(g.controls)} {g.target} {_emit_unitary(g.u)}"
    if isinstance(g, OracleRz):
        return f"oracle_rz {emit_predicate(g.pred)} {g.theta!r}"
    if isinstance(g, OracleX):
        return f"oracle_x {emit_predicate(g.pred)} {g.target}"
    if isinstance(g, OracleRx):
        return f"oracle_rx {emit_predicate(g.pred)} {g.theta!r} {g.target}"
    if isinstance(g, OracleU):
        return f"oracle_u {emit_predicate(g.pred)} {g.target} {_emit_unitary(g.u)}"
    if isinstance(g, Query):
        return f"query {_emit_fn(g.fn, g.x, g.y)} {g.x.name} -> {g.y.name}"
    if isinstance(g, CondQuery):
        return f"cond_query {emit_predicate(g.pred)} {_emit_fn(g.fn, g.x, g.y)} {g.x.name} -> {g.y.name}"
    if isinstance(g, Postselect):
        return f"postselect {g.qubit} -> {g.outcome}"
    raise TypeError(f"not a gate: {g!r}")


def emit_circuit(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.num_qubits}"]
    for r in circuit.registers:
        qs = r.qubits
        if len(qs) > 1 and list(qs) == list(range(qs[0], qs[0] + len(qs))):
            lines.append(f"reg {r.name} {qs[0]}..{qs[-1]}")
        else:
            lines.append(f"reg {r.name} {_emit_list(qs)}")
    lines += [emit_gate(g) for g in circuit.gates]
    return "\n".join(lines) + "\n"
