import csv

import numpy as np
import pytest

from hlsim.bench import (
    CSV_HEADER,
    BenchmarkSpec,
    append_csv,
    comparator,
    csv_row,
    cvo_qram,
    cvo_targets,
    default_rounds,
    generate,
    grover_allneg,
    grover_cnf,
    oracle_chain,
)
from hlsim.circuit import MCU, OracleRz, OracleX
from hlsim.dense import dense_simulate
from hlsim.engine import strong_simulate
from hlsim.stabilizer import CliffordOp


def test_cvo_shape():
    c = cvo_qram(5, 2, seed=3)
    assert c.num_qubits == 6
    assert sum(isinstance(g, MCU) for g in c.gates) == 2
    cx = sum(isinstance(g, CliffordOp) and g.kind == "cx" for g in c.gates)
    assert cx <= 2 * 2 * 5


def test_cvo_targets_deterministic():
    a = cvo_targets(4, 3, 11)
    b = cvo_targets(4, 3, 11)
    assert a[0] == b[0] and np.array_equal(a[1], b[1])
    assert len(set(a[0])) == 3
    assert np.linalg.norm(a[1]) == pytest.approx(1)
    with pytest.raises(ValueError):
        cvo_targets(2, 5, 0)


def test_cvo_prepares_targets():
    patterns, psi = cvo_targets(3, 3, 5)
    c = cvo_qram(3, 3, 5)
    for p, amp in zip(patterns, psi):
        assert abs(dense_simulate(c, "0" + format(p, "03b")) - amp) < 1e-10


def test_grover_shape():
    c = grover_allneg(3, 2)
    assert sum(isinstance(g, OracleRz) for g in c.gates) == 4
    assert strong_simulate(c, "000").probability == pytest.approx(0.9453125, abs=1e-8)


def test_comparator_shape():
    c = comparator(3)
    assert c.num_qubits == 7
    assert sum(isinstance(g, OracleX) for g in c.gates) == 1
    assert sum(isinstance(g, CliffordOp) and g.kind == "h" for g in c.gates) == 6


def test_generators_are_seeded():
    assert oracle_chain(3, seed=4) == oracle_chain(3, seed=4)
    assert grover_cnf(6, 1, seed=2) == grover_cnf(6, 1, seed=2)
    assert oracle_chain(3, seed=4) != oracle_chain(3, seed=5)


def test_oracle_chain_matches_dense():
    c = oracle_chain(2, seed=1)
    out = "0" * c.num_qubits
    assert abs(strong_simulate(c, out).amplitude - dense_simulate(c, out)) < 1e-9


def test_default_rounds():
    assert default_rounds(3, 1) == 2
    assert default_rounds(4, 0) == 0
    assert grover_allneg(4).gates == grover_allneg(4, 3).gates


def test_spec_validation():
    with pytest.raises(ValueError):
        BenchmarkSpec("nope")
    with pytest.raises(ValueError):
        BenchmarkSpec("comparator", k=0)
    with pytest.raises(ValueError):
        BenchmarkSpec("grover-cnf", seed=-1)


def test_csv(tmp_path):
    spec = BenchmarkSpec("comparator", k=2)
    c = generate(spec)
    r = strong_simulate(c, "0" * c.num_qubits)
    path = tmp_path / "out.csv"
    append_csv(path, csv_row(spec, c, r, 9))
    append_csv(path, csv_row(spec, c, r, 9))
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 3
    assert float(rows[1][CSV_HEADER.index("probability")]) == pytest.approx(r.probability)
