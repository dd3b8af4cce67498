"""Acceptance checks; each prints one PASS/FAIL line and the summary repeats them."""

import math
import time

import numpy as np
from _support import (
    basis_strings,
    dense_run,
    gate_catalog,
    predicate_corpus,
    random_ops,
    random_stabilizer_vector,
    random_unitary,
)

from hlsim.bench import BenchmarkSpec, cvo_qram, cvo_targets, generate, grover_allneg, grover_cnf
from hlsim.circuit import (
    And,
    Circuit,
    CliffordOp,
    EqConst,
    EqVars,
    Gt,
    Inc,
    IncFn,
    MCU,
    MCX,
    Not,
    Or,
    OracleRz,
    PFalse,
    PTrue,
    Query,
    Register,
    TruthTable,
)
from hlsim.decomp import build_effectual
from hlsim.dense import dense_effectual, dense_of_decomp, dense_simulate, dense_state, model_count, run_ops
from hlsim.engine import strong_simulate
from hlsim.lowering import gadgetize, rank_report
from hlsim.stabilizer import StabilizerState
from hlsim.textfmt import emit_circuit, parse_circuit


def test_1_stabilizer_core(criterion):
    with criterion(1, "random Clifford+projection circuits agree with dense amplitudes"):
        rng = np.random.default_rng(20240601)
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(500):
            n = int(rng.integers(1, 9))
            ops = random_ops(rng, n, int(rng.integers(1, 201)))
            st = StabilizerState(n).run(ops)
            ref = dense_run(n, ops)
            for i in range(1 << n):
                worst = max(worst, abs(st.amplitude(format(i, f"0{n}b")) - ref[i]))
        elapsed = time.perf_counter() - t0
        assert worst <= 1e-10, f"max amplitude error {worst:.3e}"
        assert elapsed < 60, f"took {elapsed:.1f}s"


def _or_bound(counts):
    b = counts[0]
    for t in counts[1:]:
        b = b + t + b * t
    return b


def _term_bound(p):
    """Upper bound on the term count by construction rule; None where the rule is exact."""
    if isinstance(p, (EqVars, EqConst)):
        return 1
    if isinstance(p, Gt):
        return p.a.width
    if isinstance(p, Inc):
        return p.a.width + 1
    if isinstance(p, TruthTable):
        return len(p.rows)
    if isinstance(p, PTrue):
        return 1
    if isinstance(p, PFalse):
        return 0
    if isinstance(p, Not):
        return len(build_effectual(p.child)) + 1
    if isinstance(p, And):
        return math.prod(len(build_effectual(c)) for c in p.children)
    if isinstance(p, Or):
        return _or_bound([len(build_effectual(c)) for c in p.children])
    raise TypeError(p)


def test_2_decomposition_soundness(criterion):
    with criterion(2, "effectual decompositions match dense vectors and term bounds"):
        t0 = time.perf_counter()
        corpus = predicate_corpus()
        for p in corpus:
            d = build_effectual(p)
            ref = dense_effectual(p, d.variables)
            err = np.abs(dense_of_decomp(d) - ref).max()
            assert err <= 1e-10, f"{p}: error {err:.3e}"
            assert d.model_count == model_count(p, d.variables), p
            bound = _term_bound(p)
            if isinstance(p, And):
                assert len(d) == bound, f"{p}: {len(d)} terms, product is {bound}"
            else:
                assert len(d) <= bound, f"{p}: {len(d)} terms exceeds {bound}"
        assert time.perf_counter() - t0 < 120


def _embed(vec, extra):
    return np.kron(vec, np.eye(1, 1 << extra, 0)[0])


def test_3_gadget_soundness(criterion):
    with criterion(3, "expanded gadgets times compensation reproduce every high-level gate"):
        rng = np.random.default_rng(7)
        for name, circuit in gate_catalog(rng):
            gc = gadgetize(circuit)
            n, total = circuit.num_qubits, gc.total_qubits
            assert total <= 10, f"{name}: {total} qubits"
            inputs = []
            for s in basis_strings(rng, n, 50):
                v = np.zeros(1 << n, dtype=complex)
                v[int(s, 2)] = 1
                inputs.append(v)
            inputs += [random_stabilizer_vector(rng, n) for _ in range(20)]
            for psi in inputs:
                want = _embed(dense_state(circuit, initial=psi).vec, total - n)
                got = run_ops(total, gc.ops, gc.slots, initial=_embed(psi, total - n)) * gc.compensation
                err = np.abs(got - want).max()
                assert err <= 1e-9, f"{name}: error {err:.3e}"


def _chi(gate, n, regs=()):
    return rank_report(Circuit(n, tuple(regs), (gate,)))["chi"]


def test_4_rank_bounds(criterion):
    with criterion(4, "term counts meet the rank bounds for k, l in 2..8"):
        misses = []
        for k in range(2, 9):
            rng = np.random.default_rng(k)
            x = Register("x", tuple(range(k)))
            y = Register("y", tuple(range(k, 2 * k)))
            ge = Or((Gt(x, y), EqVars(x, y)), exclusive=True)
            checks = [
                ("MCX", _chi(MCX(tuple(range(k)), k), k + 1), lambda t: t == 2, "== 2"),
                ("OracleRz(x>=y)", _chi(OracleRz(ge, 0.9), 2 * k, (x, y)), lambda t: t <= k + 2, f"<= {k + 2}"),
                ("OracleRz(not y>x)", _chi(OracleRz(Not(Gt(y, x)), 0.9), 2 * k, (x, y)), lambda t: t <= k + 2, f"<= {k + 2}"),
                ("Query-inc", _chi(Query(IncFn(), x, y), 2 * k, (x, y)), lambda t: t <= k + 2, f"<= {k + 2}"),
                ("MCU", _chi(MCU(tuple(range(k)), k, random_unitary(rng)), k + 1), lambda t: t <= 8, "<= 8"),
            ]
            for name, terms, ok, want in checks:
                print(f"k={k} {name}: {terms} terms (want {want})")
                if not ok(terms):
                    misses.append(f"{name} k={k}: {terms} terms, want {want}")
        assert not misses, "; ".join(misses)


def test_5_end_to_end(criterion):
    with criterion(5, "Grover, Bell and CVO-QRAM probabilities match references"):
        bell = parse_circuit("qubits 2\nh 0\ncx 0 1\n")
        assert abs(strong_simulate(bell, "00").probability - 0.5) <= 1e-12
        assert abs(strong_simulate(bell, "11").probability - 0.5) <= 1e-12

        g = grover_allneg(3, 2)
        p = strong_simulate(g, "000").probability
        assert abs(p - abs(dense_simulate(g, "000")) ** 2) <= 1e-8
        # two iterations from angle asin(1/sqrt 8): sin^2(5 theta)
        assert abs(p - math.sin(5 * math.asin(1 / math.sqrt(8))) ** 2) <= 1e-8

        for n, k, seed in ((2, 2, 0), (3, 3, 1), (4, 2, 2), (6, 3, 3)):
            c = cvo_qram(n, k, seed)
            gc = gadgetize(c)
            patterns, psi = cvo_targets(n, k, seed)
            for pat, amp in zip(patterns, psi):
                bits = "0" + format(pat, f"0{n}b")
                got = strong_simulate(gc, bits, workers=None).amplitude
                assert abs(got - amp) <= 1e-8, f"n={n} k={k}: {got} vs {amp}"


def test_6_chi_independent_of_controls(criterion):
    with criterion(6, "MCX keeps chi = 2 and polynomial time as controls grow"):
        ks, times = (5, 10, 20, 40), []
        for k in ks:
            c = Circuit(k + 1, (), tuple([CliffordOp("h", (q,)) for q in range(k)] + [MCX(tuple(range(k)), k)]))
            gc = gadgetize(c)
            assert gc.chi == 2 and [r.terms for r in gc.per_gate_report] == [2]
            samples = []
            for _ in range(5):
                r = strong_simulate(gc, "1" * (k + 1))
                samples.append(r.wall_time)
            assert abs(r.probability - 2.0 ** -k) <= 1e-12
            times.append(float(np.median(samples)))
        slope = np.polyfit(np.log(ks), np.log(times), 1)[0]
        print(f"log-log slope {slope:.2f}")
        assert slope <= 3, f"fit exponent {slope:.2f}"


def test_7_worker_invariance(criterion):
    with criterion(7, "grover-cnf probability identical across worker counts"):
        gc = gadgetize(grover_cnf(10, 1, seed=0))
        probs = [strong_simulate(gc, "0" * 10, workers=w).probability for w in (1, 2, 4, 8)]
        assert max(probs) - min(probs) <= 1e-12, probs


def _corpus():
    out = []
    for fam, kw in (
        ("grover-allneg", [dict(n=n, rounds=r) for n in (2, 3, 5) for r in (0, 1, 2)]),
        ("grover-cnf", [dict(n=n, rounds=1, seed=s) for n in (3, 6, 10) for s in (0, 1, 2)]),
        ("comparator", [dict(k=k) for k in (1, 2, 4)]),
        ("oracle-chain", [dict(k=k, seed=s) for k in (1, 2, 3) for s in (0, 5)]),
        ("cvo-qram", [dict(n=n, k=k, seed=s) for n in (2, 4, 6) for k in (1, 3) for s in (0, 9)]),
    ):
        out += [generate(BenchmarkSpec(fam, **p)) for p in kw]
    return out


def test_8_parser_round_trip(criterion):
    with criterion(8, "parse(emit(c)) == c over the generated corpus"):
        for c in _corpus():
            text = emit_circuit(c)
            back = parse_circuit(text)
            assert back == c, text
            assert emit_circuit(back) == text
