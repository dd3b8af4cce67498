import math
from collections import Counter

import numpy as np
import pytest

from _support import random_unitary

from hlsim.bench import comparator, cvo_qram, grover_allneg
from hlsim.circuit import (
    And,
    Circuit,
    EqConst,
    EqVars,
    Gt,
    IncFn,
    MCU,
    MCX,
    Not,
    OracleRz,
    OracleU,
    Query,
    Register,
    T,
    Unitary2,
)
from hlsim.dense import dense_simulate
from hlsim.engine import strong_simulate
from hlsim.lowering import (
    AncillaBudgetExceeded,
    AncillaPool,
    LoweringConfig,
    format_gadgetized,
    gadgetize,
    lower_gate,
    rank_report,
    split_shared_vars,
)
from hlsim.stabilizer import CliffordOp, Projection


def test_split_disjoint_is_identity():
    x, y = Register("x", (0, 1)), Register("y", (2, 3))
    pred = Gt(x, y)
    pro, p2, epi = split_shared_vars(pred, AncillaPool(4))
    assert pro == [] and epi == [] and p2 == pred


def test_split_one_bit_copy():
    a, b, c = (Register(n, (i,)) for i, n in enumerate("abc"))
    pro, p2, epi = split_shared_vars(And((Gt(a, b), EqVars(c, b))), AncillaPool(3))
    assert pro == [CliffordOp("cx", (1, 3))] and epi == pro
    assert p2.children[0] == Gt(a, b)
    assert p2.children[1].b.qubits == (3,)


def test_split_three_bit_copy_end_to_end():
    x, y, z = (Register(n, tuple(range(3 * i, 3 * i + 3))) for i, n in enumerate("xyz"))
    pred = And((Gt(x, y), EqVars(y, z)))
    pro, _, _ = split_shared_vars(pred, AncillaPool(9))
    assert len(pro) == 3
    h = tuple(CliffordOp("h", (q,)) for q in range(9))
    c = Circuit(9, (x, y, z), h + (OracleRz(pred, 1.2),) + h)
    for out in ("000000000", "110010010", "101001001"):
        assert abs(strong_simulate(c, out).amplitude - dense_simulate(c, out)) < 1e-9


def test_mcx_shape():
    g = lower_gate(MCX(tuple(range(5)), 5), AncillaPool(6))
    kinds = Counter(o.kind if isinstance(o, CliffordOp) else type(o).__name__ for o in g.skeleton)
    assert g.terms == 2
    assert kinds["cx"] == 6 and kinds["Projection"] == 6
    assert g.compensation == pytest.approx(2**3)


def test_bounds_from_examples():
    x4, y4 = Register("x", (0, 1, 2, 3)), Register("y", (4, 5, 6, 7))
    assert rank_report(Circuit(8, (x4, y4), (Query(IncFn(), x4, y4),)))["chi"] <= 6
    x5, y5 = Register("x", tuple(range(5))), Register("y", tuple(range(5, 10)))
    assert rank_report(Circuit(10, (x5, y5), (OracleRz(Not(Gt(y5, x5)), 0.4),)))["chi"] <= 7
    assert rank_report(Circuit(1, (), (T(0),)))["chi"] == 2


def test_clifford_only():
    gc = gadgetize(Circuit(2, (), (CliffordOp("h", (0,)), CliffordOp("cx", (0, 1)))))
    assert gc.slots == () or len(gc.slots) == 0
    assert gc.chi == 1 and gc.compensation == 1 and gc.total_qubits == 2


def test_chi_multiplies():
    c = Circuit(4, (), tuple(MCX((0, 1, 2), 3) for _ in range(3)))
    assert gadgetize(c).chi == 8


@pytest.mark.parametrize("r", [0, 1, 2, 3])
def test_grover_chi(r):
    assert gadgetize(grover_allneg(3, r)).chi == 4**r


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_comparator_chi(k):
    assert gadgetize(comparator(k)).chi == k + 1


@pytest.mark.parametrize("n,k", [(2, 1), (3, 2), (5, 2)])
def test_cvo_chi(n, k):
    assert gadgetize(cvo_qram(n, k, seed=4)).chi <= 8**k


def test_ancilla_budget():
    c = Circuit(5, (), (MCX((0, 1, 2, 3), 4),))
    with pytest.raises(AncillaBudgetExceeded):
        gadgetize(c, LoweringConfig(ancilla_budget=2))
    assert gadgetize(c, LoweringConfig(ancilla_budget=5)).chi == 2


def test_ancillas_are_reused():
    c = Circuit(4, (), tuple(MCX((0, 1, 2), 3) for _ in range(3)))
    one = gadgetize(Circuit(4, (), (MCX((0, 1, 2), 3),)))
    assert gadgetize(c).total_qubits == one.total_qubits


def test_oracle_u_routes_agree():
    rng = np.random.default_rng(9)
    a, b = Register("a", (0,)), Register("b", (1,))
    u = random_unitary(rng)
    h = (CliffordOp("h", (0,)), CliffordOp("h", (1,)))
    c = Circuit(3, (a, b), h + (OracleU(And((EqConst(a, 1), EqConst(b, 0))), 2, u),))
    ref = dense_simulate(c, "100")
    chis = {}
    for route in ("direct", "ancilla", "auto"):
        gc = gadgetize(c, LoweringConfig(oracle_u_route=route))
        chis[route] = gc.chi
        assert abs(strong_simulate(gc, "100").amplitude - ref) < 1e-9
    assert chis["auto"] == min(chis["direct"], chis["ancilla"])


def test_mcu_special_unitaries_are_cheaper():
    g = MCU((0, 1), 2, Unitary2(0, 1, 1, 0))
    assert rank_report(Circuit(3, (), (g,)))["chi"] == 2


def test_format():
    text = format_gadgetized(gadgetize(Circuit(2, (), (CliffordOp("h", (0,)), T(0)))))
    lines = text.splitlines()
    assert lines[-1] == "chi 2"
    assert any(line.startswith("slot 0") for line in lines)
    assert any(line.startswith("compensation") for line in lines)


def test_projection_ops_present():
    gc = gadgetize(Circuit(1, (), (T(0),)))
    assert any(isinstance(o, Projection) for o in gc.ops)
    assert math.isclose(gc.compensation, math.sqrt(2))
