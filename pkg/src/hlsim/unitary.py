"""Phase-rotation decomposition of single-qubit unitaries."""

from __future__ import annotations

import cmath
import math

import numpy as np

from .circuit import Unitary2

_EPS = 1e-12


def phase_gate(theta: float) -> np.ndarray:
    return np.diag([1.0, cmath.exp(1j * theta)])


def _wrap(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    w = math.remainder(theta, 2 * math.pi)
    return math.pi if w <= -math.pi else w


def euler_zxz(u: Unitary2) -> tuple[float, float, float, float]:
    """Return (delta, alpha, beta, gamma) with U = e^{i delta} P(alpha) H P(beta) H P(gamma).

    P(theta) = diag(1, e^{i theta}).  beta is chosen in [0, pi].
    """
    if not u.is_unitary():
        raise ValueError("matrix is not unitary")
    # H P(b) H = e^{ib/2} [[cos b/2, -i sin b/2], [-i sin b/2, cos b/2]]
    m = u.matrix
    c, s = abs(m[0, 0]), abs(m[1, 0])
    beta = 2.0 * math.atan2(s, c)
    if s < _EPS:
        delta = cmath.phase(m[0, 0])
        alpha = cmath.phase(m[1, 1]) - delta
        gamma = 0.0
        beta = 0.0
    elif c < _EPS:
        # beta = pi: U = e^{i delta} [[0, e^{i gamma}], [e^{i alpha}, 0]]
        beta = math.pi
        delta = cmath.phase(m[1, 0])
        alpha = 0.0
        gamma = cmath.phase(m[0, 1]) - delta
    else:
        p00 = cmath.phase(m[0, 0])
        delta = p00 - beta / 2
        alpha = cmath.phase(m[1, 0]) - p00 + math.pi / 2
        gamma = cmath.phase(m[0, 1]) - p00 + math.pi / 2
    return _wrap(delta), _wrap(alpha), beta, _wrap(gamma)


def compose_zxz(delta: float, alpha: float, beta: float, gamma: float) -> np.ndarray:
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    return cmath.exp(1j * delta) * phase_gate(alpha) @ h @ phase_gate(beta) @ h @ phase_gate(gamma)
