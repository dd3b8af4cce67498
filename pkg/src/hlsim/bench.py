"""Seeded benchmark circuit generators and CSV reporting."""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .circuit import (
    And,
    Circuit,
    CliffordOp,
    EqConst,
    Gt,
    MCU,
    Or,
    OracleRz,
    OracleX,
    Register,
    TruthTable,
    Unitary2,
    validate,
)

FAMILIES = ("cvo-qram", "oracle-chain", "grover-allneg", "grover-cnf", "comparator")
CSV_HEADER = ("family", "n", "k", "rounds", "seed", "chi", "total_qubits", "terms", "zero_terms", "probability", "time_ms")


@dataclass(frozen=True)
class BenchmarkSpec:
    family: str
    n: int = 3
    k: int = 1
    rounds: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        for name in ("n", "k"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.rounds is not None and self.rounds < 0:
            raise ValueError("rounds must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _h_all(qubits) -> list:
    return [CliffordOp("h", (q,)) for q in qubits]


def _qubit_regs(n: int) -> list[Register]:
    return [Register(f"q{i}", (i,)) for i in range(n)]


def _all_zero(regs) -> And:
    return And(tuple(EqConst(r, 0) for r in regs))


def default_rounds(n: int, solutions: int) -> int:
    if solutions <= 0:
        return 0
    return int(math.floor(math.pi / 4 * math.sqrt((1 << n) / solutions)))


def _grover(n: int, oracle, rounds: int) -> Circuit:
    regs = _qubit_regs(n)
    gates = _h_all(range(n))
    for _ in range(rounds):
        gates.append(OracleRz(oracle, math.pi))
        gates += _h_all(range(n))
        gates.append(OracleRz(_all_zero(regs), math.pi))
        gates += _h_all(range(n))
    return Circuit(n, tuple(regs), tuple(gates))


def grover_allneg(n: int, rounds: Optional[int] = None) -> Circuit:
    """Grover search for the all-zero string, with the oracle as a conjunction of negated literals."""
    if rounds is None:
        rounds = default_rounds(n, 1)
    return _grover(n, _all_zero(_qubit_regs(n)), rounds)


def cnf_clauses(n: int, seed: int, clauses: int = 3, width: int = 3) -> list[list[tuple[int, int]]]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(clauses):
        qs = rng.choice(n, size=min(width, n), replace=False)
        out.append([(int(q), int(rng.integers(2))) for q in qs])
    return out


def grover_cnf(n: int, rounds: Optional[int] = None, seed: int = 0) -> Circuit:
    """Grover search with a random 3-clause CNF oracle; each literal is (eq q_i b)."""
    regs = _qubit_regs(n)
    clauses = cnf_clauses(n, seed)
    pred = And(tuple(Or(tuple(EqConst(regs[q], b) for q, b in c)) for c in clauses))
    if rounds is None:
        sols = sum(
            all(any(((x >> (n - 1 - q)) & 1) == b for q, b in c) for c in clauses) for x in range(1 << n)
        )
        rounds = default_rounds(n, sols)
    return _grover(n, pred, rounds)


def comparator(k: int) -> Circuit:
    """Uniform superposition over x and y feeding one C_{x>y}X onto a flag qubit."""
    x = Register("x", tuple(range(k)))
    y = Register("y", tuple(range(k, 2 * k)))
    gates = _h_all(range(2 * k)) + [OracleX(Gt(x, y), 2 * k)]
    return Circuit(2 * k + 1, (x, y), tuple(gates))


def oracle_chain(k: int, seed: int = 0, max_rows: int = 4) -> Circuit:
    """k random 5-input truth-table oracles, each writing into the first input of the next block."""
    rng = np.random.default_rng(seed)
    n = 5 * k + 1
    regs = tuple(Register(f"b{j}", tuple(range(5 * j, 5 * j + 5))) for j in range(k))
    gates = _h_all(range(5 * k))
    for j, r in enumerate(regs):
        m = int(rng.integers(1, max_rows + 1))
        rows = tuple(int(v) for v in rng.choice(32, size=m, replace=False))
        gates.append(OracleX(TruthTable((r,), rows), 5 * j + 5))
    return Circuit(n, regs, tuple(gates))


def cvo_targets(n: int, k: int, seed: int) -> tuple[list[int], np.ndarray]:
    """k distinct n-bit patterns with a random unit-norm complex amplitude vector."""
    if k > 1 << n:
        raise ValueError(f"cannot pick {k} distinct patterns of {n} bits")
    rng = np.random.default_rng(seed)
    patterns = [int(p) for p in rng.choice(1 << n, size=k, replace=False)]
    amps = rng.normal(size=k) + 1j * rng.normal(size=k)
    return patterns, amps / np.linalg.norm(amps)


def _phase(t: float) -> np.ndarray:
    return np.diag([1.0, cmath.exp(1j * t)])


def _loader_unitary(a: complex, b: float) -> Unitary2:
    """A unitary with U|1> = a|0> + b|1>, chosen in the form P(al) H P(be) H P(ga) (no global phase)."""
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    be = 2 * math.atan2(abs(a), b)
    # column 1 of P(al) H P(be) H P(ga) is e^{i be/2} (-i sin(be/2) e^{i ga}, cos(be/2) e^{i(al+ga)})
    ga = (cmath.phase(a) if abs(a) > 1e-15 else 0.0) - be / 2 + math.pi / 2
    al = -be / 2 - ga
    return Unitary2.from_matrix(_phase(al) @ h @ _phase(be) @ h @ _phase(ga))


def cvo_qram(n: int, k: int, seed: int = 0) -> Circuit:
    """Load sum_j psi_j |x_j> into qubits 1..n; qubit 0 is the flag, returned to |0>."""
    patterns, psi = cvo_targets(n, k, seed)
    data = list(range(1, n + 1))
    gates: list = [CliffordOp("x", (0,))]
    resid = 1.0
    for j, (p, amp) in enumerate(zip(patterns, psi)):
        bits = [(p >> (n - 1 - i)) & 1 for i in range(n)]
        nxt = math.sqrt(max(0.0, resid**2 - abs(amp) ** 2)) if j < k - 1 else 0.0
        u = _loader_unitary(amp / resid, nxt / resid)
        fan = [CliffordOp("cx", (0, q)) for q, b in zip(data, bits) if b]
        flips = [CliffordOp("x", (q,)) for q, b in zip(data, bits) if not b]
        gates += fan + flips + [MCU(tuple(data), 0, u)] + flips + fan
        resid = nxt
    return Circuit(n + 1, (Register("flag", (0,)), Register("data", tuple(data))), tuple(gates))


def generate(spec: BenchmarkSpec) -> Circuit:
    f = spec.family
    if f == "cvo-qram":
        c = cvo_qram(spec.n, spec.k, spec.seed)
    elif f == "oracle-chain":
        c = oracle_chain(spec.k, spec.seed)
    elif f == "grover-allneg":
        c = grover_allneg(spec.n, spec.rounds)
    elif f == "grover-cnf":
        c = grover_cnf(spec.n, spec.rounds, spec.seed)
    else:
        c = comparator(spec.k)
    diags = validate(c)
    if diags:
        raise AssertionError("generator produced an invalid circuit: " + "; ".join(map(str, diags)))
    return c


def csv_row(spec: BenchmarkSpec, circuit: Circuit, result, total_qubits: int) -> dict:
    return {
        "family": spec.family,
        "n": circuit.num_qubits,
        "k": spec.k,
        "rounds": "" if spec.rounds is None else spec.rounds,
        "seed": spec.seed,
        "chi": result.chi,
        "total_qubits": total_qubits,
        "terms": result.terms_evaluated,
        "zero_terms": result.zero_terms,
        "probability": repr(float(result.probability)),
        "time_ms": f"{result.wall_time * 1000:.3f}",
    }


def append_csv(path: Union[str, Path], row: dict) -> None:
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        if fresh:
            w.writeheader()
        w.writerow(row)


__all__ = [
    "BenchmarkSpec", "CSV_HEADER", "FAMILIES", "append_csv", "cnf_clauses", "comparator", "csv_row",
    "cvo_qram", "cvo_targets", "default_rounds", "generate", "grover_allneg", "grover_cnf", "oracle_chain",
]
