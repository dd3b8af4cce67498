import math

import numpy as np
import pytest

from _support import gate_catalog, random_unitary

from hlsim.circuit import (
    And,
    Circuit,
    EqConst,
    Gt,
    Inc,
    IncFn,
    MCX,
    Not,
    OracleU,
    OracleX,
    Query,
    Register,
    TableFn,
    TruthTable,
    Unitary2,
    evaluate_predicate,
    validate,
)
from hlsim.stabilizer import CliffordOp
from hlsim.textfmt import (
    ParseError,
    emit_circuit,
    parse_angle,
    parse_circuit,
    parse_circuit_file,
    parse_complex,
    parse_predicate,
)
from hlsim.unitary import compose_zxz, euler_zxz

X4 = Register("x", (0, 1, 2, 3))
Y4 = Register("y", (4, 5, 6, 7))


def codes(text):
    with pytest.raises(ParseError) as info:
        parse_circuit(text)
    return [d.code for d in info.value.diagnostics], info.value.diagnostics


def test_bell():
    c = parse_circuit("qubits 2\nh 0\ncx 0 1")
    assert c.num_qubits == 2 and len(c.gates) == 2
    assert c.gates[1] == CliffordOp("cx", (0, 1))


def test_oracle_x_on_register_target():
    c = parse_circuit("qubits 3\nreg x 0..1\nreg t 2\noracle_x (eq x 3) t")
    g = c.gates[0]
    assert isinstance(g, OracleX) and g.target == 2
    assert g.pred == EqConst(Register("x", (0, 1)), 3)


def test_duplicate_operands():
    cs, diags = codes("qubits 2\ncx 0 0")
    assert cs == ["duplicate-operands"]
    assert "duplicate qubit operands" in diags[0].message
    assert diags[0].line == 2


def test_missing_header_still_checks_gates():
    cs, _ = codes("cx 0 0")
    assert "header" in cs and "duplicate-operands" in cs


@pytest.mark.parametrize(
    "text,code",
    [
        ("qubits 2\nfoo 0", "unknown-gate"),
        ("qubits 2\nh 5", "qubit-range"),
        ("qubits 2\nreg x 0..1\nreg y 1", "register-overlap"),
        ("qubits 2\nrz abc 0", "bad-number"),
        ("qubits 2\npostselect 0 -> 2", "bad-outcome"),
        ("qubits 3\nmcx [0,1] 1", "target-in-controls"),
        ("qubits 2\nmcu [0] 1 u=(1,1;1,1)", "non-unitary"),
        ("qubits 2\nh 0 1", "arity"),
        ("qubits 2\noracle_rz (eq z 1) 0.5", "undefined-register"),
    ],
)
def test_diagnostic_codes(text, code):
    assert code in codes(text)[0]


def test_diagnostics_accumulate():
    cs, diags = codes("qubits 2\nh 7\nfoo\ncx 1 1")
    assert len(cs) == 3
    assert [d.line for d in diags] == [2, 3, 4]


def test_predicates():
    p = parse_predicate("(and (gt x y) (not (eq x 5)))", [X4, Y4])
    assert p == And((Gt(X4, Y4), Not(EqConst(X4, 5))))
    assert parse_predicate("(inc x y)", [X4, Y4]) == Inc(X4, Y4)
    y3 = Register("y", (4, 5, 6))
    with pytest.raises(ParseError) as info:
        parse_predicate("(eq x y)", [Register("x", (0, 1, 2)), Register("y", (3, 4, 5, 6))])
    assert info.value.diagnostics[0].code == "width-mismatch"
    assert y3.width == 3


def test_table_file(tmp_path):
    (tmp_path / "t.txt").write_text("01\n10\n")
    (tmp_path / "c.hqc").write_text("qubits 3\nreg x 0..1\noracle_x (table x t.txt) 2\n")
    c = parse_circuit_file(tmp_path / "c.hqc")
    assert c.gates[0].pred == TruthTable((Register("x", (0, 1)),), (1, 2))
    assert parse_circuit(emit_circuit(c)) == c


def test_numbers():
    assert parse_angle("pi/4") == pytest.approx(math.pi / 4)
    assert parse_angle("-2*pi/3") == pytest.approx(-2 * math.pi / 3)
    with pytest.raises(ValueError):
        parse_angle("__import__('os')")
    assert parse_complex("0.5-0.25i") == complex(0.5, -0.25)
    assert parse_complex("i") == 1j


def test_validate():
    bell = Circuit(2, (), (CliffordOp("h", (0,)), CliffordOp("cx", (0, 1))))
    assert validate(bell) == []
    assert len(validate(Circuit(3, (), (MCX((0, 1), 1),)))) == 1
    x, y = Register("x", (0, 1)), Register("y", (2,))
    assert len(validate(Circuit(3, (x, y), (Query(IncFn(), x, y),)))) == 1
    assert len(validate(Circuit(3, (x, y), (Query(TableFn((0, 3, 1, 0)), x, y),)))) == 1
    assert validate(Circuit(3, (x, y), (Query(TableFn((0, 1, 1, 0)), x, y),))) == []


def test_evaluate_predicate():
    x, y = Register("x", (0, 1)), Register("y", (2, 3))
    assert evaluate_predicate(Gt(x, y), {"x": 2, "y": 1})
    assert not evaluate_predicate(Gt(x, y), {"x": 1, "y": 2})
    assert evaluate_predicate(Inc(x, y), {"x": 3, "y": 0})
    assert evaluate_predicate(Not(EqConst(x, 1)), {"x": 0})


def test_euler():
    assert np.allclose(euler_zxz(Unitary2(0, 1, 1, 0)), (0, 0, math.pi, 0))
    t = Unitary2(1, 0, 0, complex(math.cos(math.pi / 4), math.sin(math.pi / 4)))
    assert np.allclose(euler_zxz(t), (0, math.pi / 4, 0, 0))
    rng = np.random.default_rng(5)
    for _ in range(100):
        u = random_unitary(rng)
        d, a, b, g = euler_zxz(u)
        assert 0 <= b <= math.pi
        assert np.abs(compose_zxz(d, a, b, g) - u.matrix).max() < 1e-10


def test_round_trip_catalog():
    for _, c in gate_catalog(np.random.default_rng(2)):
        back = parse_circuit(emit_circuit(c))
        assert emit_circuit(back) == emit_circuit(c)
        assert back.num_qubits == c.num_qubits


def test_round_trip_nested_oracle_u():
    x, y = Register("x", (0, 1)), Register("y", (2, 3))
    u = random_unitary(np.random.default_rng(0))
    c = Circuit(5, (x, y), (OracleU(And((Not(Gt(x, y)), EqConst(y, 2))), 4, u),))
    assert parse_circuit(emit_circuit(c)) == c
