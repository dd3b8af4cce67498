"""Strong simulation of circuits with high-level gates via magic-state gadgets."""

__version__ = "0.1.0"

from .circuit import Circuit, Register, Unitary2, validate  # noqa: E402
from .decomp import build_effectual, build_magic_cond_rz  # noqa: E402
from .engine import SimulationResult, strong_simulate, term_amplitude  # noqa: E402
from .lowering import gadgetize, lower_gate, rank_report  # noqa: E402
from .stabilizer import (  # noqa: E402
    CliffordOp,
    Projection,
    StabilizerState,
    amplitude,
    apply_clifford,
    init_state,
    project,
    run_clifford_fragment,
)
from .textfmt import ParseError, emit_circuit, parse_circuit, parse_predicate  # noqa: E402
from .unitary import euler_zxz  # noqa: E402

__all__ = [
    "Circuit", "CliffordOp", "ParseError", "Projection", "Register", "SimulationResult", "StabilizerState",
    "Unitary2", "amplitude", "apply_clifford", "build_effectual", "build_magic_cond_rz", "emit_circuit",
    "euler_zxz", "gadgetize", "init_state", "lower_gate", "parse_circuit", "parse_predicate", "project",
    "rank_report", "run_clifford_fragment", "strong_simulate", "term_amplitude", "validate",
]
