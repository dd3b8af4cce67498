"""Phase-sensitive stabilizer states in CH-form.

A state is stored as ``omega * U_C * U_H * |s>`` where ``U_C`` is a Clifford
circuit built from S, CZ and CX (so ``U_C|0...0> = |0...0>``), ``U_H`` is a
layer of Hadamards on the qubits flagged in ``v``, ``s`` is a basis string and
``omega`` is a complex scale.  ``U_C`` is tracked through its action on Paulis:

    U_C^-1 Z_p U_C = Z(G[p])
    U_C^-1 X_p U_C = i^gamma[p] X(F[p]) Z(M[p])

Because the global scale is carried explicitly, amplitudes come out with their
exact phase, and projections are applied without renormalisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

CLIFFORD_ARITY = {"h": 1, "s": 1, "sdg": 1, "x": 1, "z": 1, "cx": 2, "cz": 2}

_SQRT2 = math.sqrt(2.0)
_I_POW = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class CliffordOp:
    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in CLIFFORD_ARITY:
            raise ValueError(f"unknown Clifford gate {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != CLIFFORD_ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {CLIFFORD_ARITY[self.kind]} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("duplicate qubit operands")
        if any(q < 0 for q in self.qubits):
            raise ValueError("negative qubit index")

    def remap(self, mapping: Sequence[int]) -> "CliffordOp":
        return CliffordOp(self.kind, tuple(mapping[q] for q in self.qubits))

    def __str__(self) -> str:
        return " ".join([self.kind, *map(str, self.qubits)])


@dataclass(frozen=True)
class Projection:
    """Unnormalised projector |outcome><outcome| on one qubit."""

    qubit: int
    outcome: int

    def __str__(self) -> str:
        return f"project {self.qubit} -> {self.outcome}"


FragmentOp = Union[CliffordOp, Projection]


def _single_qubit_form(vec: np.ndarray) -> tuple[complex, int, int, int]:
    """Write a 2-vector as lam * S^k H^h |b>; the vector must be a scaled stabilizer state."""
    for h in (0, 1):
        for b in (0, 1):
            basis = np.zeros(2, dtype=complex)
            basis[b] = 1.0
            if h:
                basis = np.array([1.0, 1.0 - 2.0 * b], dtype=complex) / _SQRT2
            for k in range(4):
                w = basis * np.array([1.0, _I_POW[k]])
                lam = np.vdot(w, vec)
                if np.abs(vec - lam * w).max() < 1e-9:
                    return complex(lam), k, h, b
    raise ArithmeticError(f"not a single-qubit stabilizer vector: {vec}")


class StabilizerState:
    """A complex scalar times a unit-norm stabilizer state on ``num_qubits`` qubits.

    All gate methods mutate the state in place and return ``self``.
    """

    __slots__ = ("n", "F", "G", "M", "gamma", "v", "s", "omega")

    def __init__(self, num_qubits: int) -> None:
        if num_qubits < 1:
            raise ValueError(f"number of qubits must be positive, got {num_qubits}")
        n = num_qubits
        self.n = n
        self.F = np.eye(n, dtype=np.uint8)
        self.G = np.eye(n, dtype=np.uint8)
        self.M = np.zeros((n, n), dtype=np.uint8)
        self.gamma = np.zeros(n, dtype=np.int64)
        self.v = np.zeros(n, dtype=np.uint8)
        self.s = np.zeros(n, dtype=np.uint8)
        self.omega: complex = 1.0 + 0.0j

    @property
    def num_qubits(self) -> int:
        return self.n

    @property
    def scale(self) -> complex:
        return self.omega

    @property
    def is_zero(self) -> bool:
        return self.omega == 0

    def copy(self) -> "StabilizerState":
        other = StabilizerState.__new__(StabilizerState)
        other.n = self.n
        other.F = self.F.copy()
        other.G = self.G.copy()
        other.M = self.M.copy()
        other.gamma = self.gamma.copy()
        other.v = self.v.copy()
        other.s = self.s.copy()
        other.omega = self.omega
        return other

    def _check(self, *qubits: int) -> None:
        for q in qubits:
            if not 0 <= q < self.n:
                raise IndexError(f"qubit {q} out of range for {self.n}-qubit state")

    def _set_zero(self) -> None:
        self.omega = 0j

    # -- right multiplication U_C <- U_C V (V in {S, CZ, CX}) --

    def _right_s(self, q: int) -> None:
        self.M[:, q] ^= self.F[:, q]
        self.gamma = (self.gamma - self.F[:, q]) % 4

    def _right_cz(self, q: int, r: int) -> None:
        self.gamma = (self.gamma + 2 * (self.F[:, q] & self.F[:, r])) % 4
        self.M[:, q] ^= self.F[:, r]
        self.M[:, r] ^= self.F[:, q]

    def _right_cx(self, q: int, r: int) -> None:
        self.G[:, q] ^= self.G[:, r]
        self.F[:, r] ^= self.F[:, q]
        self.M[:, q] ^= self.M[:, r]

    # -- Pauli pushes through U_C U_H --

    def _z_image(self, q: int) -> tuple[np.ndarray, int]:
        """Z_q U_C U_H |s> = (-1)^alpha U_C U_H |t>."""
        g, v, s = self.G[q], self.v, self.s
        t = s ^ (g & v)
        alpha = int(np.sum(g & (1 - v) & s)) & 1
        return t, alpha

    def _x_image(self, q: int) -> tuple[np.ndarray, int]:
        """X_q U_C U_H |s> = i^gamma_q (-1)^beta U_C U_H |u>."""
        f, m, v, s = self.F[q], self.M[q], self.v, self.s
        u = s ^ (f & (1 - v)) ^ (m & v)
        beta = int(np.sum(m & (1 - v) & s) + np.sum(f & v & (m ^ s))) & 1
        return u, beta

    def _superpose(self, t: np.ndarray, u: np.ndarray, delta: int) -> None:
        """Replace U_H|s> by U_H(|t> + i^delta |u>), folding the result back into CH-form."""
        delta %= 4
        diff = t ^ u
        if not diff.any():
            self.omega *= 1 + _I_POW[delta]
            self.s = t.copy()
            if abs(self.omega) < 1e-300:
                self._set_zero()
            return
        v = self.v
        v0 = np.flatnonzero(diff & (1 - v))
        v1 = np.flatnonzero(diff & v)
        if len(v0):
            q = int(v0[0])
            for j in v0[1:]:
                self._right_cx(q, int(j))
            for j in v1:
                self._right_cz(q, int(j))
        else:
            q = int(v1[0])
            for j in v1[1:]:
                self._right_cx(int(j), q)
        others = diff.copy()
        others[q] = 0
        y = t.copy()
        z = u.copy()
        if y[q]:
            y ^= others
        if z[q]:
            z ^= others
        vec = np.zeros(2, dtype=complex)
        vec[y[q]] += 1.0
        vec[z[q]] += _I_POW[delta]
        if v[q]:
            vec = np.array([vec[0] + vec[1], vec[0] - vec[1]]) / _SQRT2
        lam, k, h, b = _single_qubit_form(vec)
        for _ in range(k):
            self._right_s(q)
        self.v[q] = h
        y[q] = b
        self.s = y
        self.omega *= lam

    # -- gates --

    def h(self, q: int) -> "StabilizerState":
        self._check(q)
        if self.is_zero:
            return self
        t, alpha = self._z_image(q)
        u, beta = self._x_image(q)
        delta = int(self.gamma[q]) + 2 * (alpha + beta)
        self.omega *= (-1) ** alpha / _SQRT2
        self._superpose(t, u, delta)
        return self

    def s_gate(self, q: int) -> "StabilizerState":
        self._check(q)
        self.M[q] ^= self.G[q]
        self.gamma[q] = (self.gamma[q] - 1) % 4
        return self

    def sdg(self, q: int) -> "StabilizerState":
        self._check(q)
        self.M[q] ^= self.G[q]
        self.gamma[q] = (self.gamma[q] + 1) % 4
        return self

    def x(self, q: int) -> "StabilizerState":
        self._check(q)
        if self.is_zero:
            return self
        u, beta = self._x_image(q)
        self.omega *= _I_POW[int(self.gamma[q]) % 4] * (-1) ** beta
        self.s = u
        return self

    def z(self, q: int) -> "StabilizerState":
        self._check(q)
        if self.is_zero:
            return self
        t, alpha = self._z_image(q)
        self.omega *= (-1) ** alpha
        self.s = t
        return self

    def cz(self, q: int, r: int) -> "StabilizerState":
        self._check(q, r)
        if q == r:
            raise ValueError("duplicate qubit operands")
        self.M[q] ^= self.G[r]
        self.M[r] ^= self.G[q]
        return self

    def cx(self, q: int, r: int) -> "StabilizerState":
        self._check(q, r)
        if q == r:
            raise ValueError("duplicate qubit operands")
        mf = int(np.sum(self.M[q] & self.F[r])) & 1
        self.gamma[q] = (self.gamma[q] + self.gamma[r] + 2 * mf) % 4
        self.G[r] ^= self.G[q]
        self.F[q] ^= self.F[r]
        self.M[q] ^= self.M[r]
        return self

    def apply(self, op: CliffordOp) -> "StabilizerState":
        kind = op.kind
        if kind == "h":
            return self.h(*op.qubits)
        if kind == "s":
            return self.s_gate(*op.qubits)
        if kind == "sdg":
            return self.sdg(*op.qubits)
        if kind == "x":
            return self.x(*op.qubits)
        if kind == "z":
            return self.z(*op.qubits)
        if kind == "cx":
            return self.cx(*op.qubits)
        if kind == "cz":
            return self.cz(*op.qubits)
        raise ValueError(f"unknown Clifford gate {kind!r}")

    def project(self, q: int, outcome: int) -> "StabilizerState":
        """Apply |outcome><outcome| on qubit q, keeping the norm change in the scale."""
        self._check(q)
        if outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {outcome}")
        if self.is_zero:
            return self
        t, alpha = self._z_image(q)
        sign = (outcome + alpha) & 1
        if np.array_equal(t, self.s):
            # Z_q eigenstate: the projector either keeps or kills it.
            if sign:
                self._set_zero()
            return self
        self.omega *= 0.5
        self._superpose(self.s.copy(), t, 2 * sign)
        return self

    def amplitude(self, x: Union[str, Sequence[int]]) -> complex:
        bits = _as_bits(x)
        if len(bits) != self.n:
            raise ValueError(f"bit-string length {len(bits)} != {self.n} qubits")
        if self.is_zero:
            return 0j
        t = np.zeros(self.n, dtype=np.uint8)
        b = np.zeros(self.n, dtype=np.uint8)
        mu = 0
        for p in np.flatnonzero(bits):
            mu += int(self.gamma[p]) + 2 * (int(np.sum(b & self.F[p])) & 1)
            t ^= self.F[p]
            b ^= self.M[p]
        mu += 2 * (int(np.sum(t & b)) & 1)
        v, s = self.v, self.s
        if np.any((1 - v) & (t ^ s)):
            return 0j
        sign = int(np.sum(v & t & s)) & 1
        nh = int(v.sum())
        return self.omega * _I_POW[mu % 4] * (-1) ** sign * _SQRT2 ** (-nh)

    def run(self, ops: Iterable[FragmentOp]) -> "StabilizerState":
        for op in ops:
            if isinstance(op, Projection):
                self.project(op.qubit, op.outcome)
            else:
                self.apply(op)
        return self

    def to_dense(self) -> np.ndarray:
        """Full amplitude vector, qubit 0 most significant.  Only sensible for small n."""
        out = np.zeros(2**self.n, dtype=complex)
        for idx in range(2**self.n):
            out[idx] = self.amplitude([(idx >> (self.n - 1 - q)) & 1 for q in range(self.n)])
        return out


def _as_bits(x: Union[str, Sequence[int]]) -> np.ndarray:
    if isinstance(x, str):
        if any(c not in "01" for c in x):
            raise ValueError(f"not a bit-string: {x!r}")
        return np.fromiter((c == "1" for c in x), dtype=np.uint8, count=len(x))
    return np.asarray(x, dtype=np.uint8)


def init_state(n: int) -> StabilizerState:
    return StabilizerState(n)


def apply_clifford(state: StabilizerState, op: CliffordOp) -> StabilizerState:
    return state.apply(op)


def project(state: StabilizerState, qubit: int, outcome: int) -> StabilizerState:
    return state.project(qubit, outcome)


def amplitude(state: StabilizerState, x: Union[str, Sequence[int]]) -> complex:
    return state.amplitude(x)


def run_clifford_fragment(state: StabilizerState, ops: Iterable[FragmentOp]) -> StabilizerState:
    return state.run(ops)
