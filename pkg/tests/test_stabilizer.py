import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import dense_run, random_ops

from hlsim.stabilizer import (
    CliffordOp,
    Projection,
    StabilizerState,
    amplitude,
    apply_clifford,
    init_state,
    project,
    run_clifford_fragment,
)

R = 1 / math.sqrt(2)


def test_init_state():
    s = init_state(2)
    assert amplitude(s, "00") == 1
    assert amplitude(s, "01") == 0
    assert init_state(1).scale == 1
    v = init_state(10).to_dense()
    assert v.shape == (1024,) and v[0] == 1 and np.count_nonzero(v) == 1


def test_single_gates():
    s = apply_clifford(init_state(1), CliffordOp("h", (0,)))
    assert np.allclose(s.to_dense(), [R, R])
    s = apply_clifford(s, CliffordOp("s", (0,)))
    assert abs(amplitude(s, "1") - 1j * R) < 1e-15


def test_epr():
    s = run_clifford_fragment(init_state(2), [CliffordOp("h", (0,)), CliffordOp("cx", (0, 1))])
    assert np.allclose(s.to_dense(), [R, 0, 0, R])
    assert abs(amplitude(s, "11") - R) < 1e-15


def test_projection_scale():
    s = apply_clifford(init_state(1), CliffordOp("h", (0,)))
    p = project(s, 0, 0)
    assert abs(p.scale - R) < 1e-15
    assert np.allclose(p.to_dense(), [R, 0])

    z = project(init_state(1), 0, 1)
    assert z.is_zero and z.scale == 0

    epr = run_clifford_fragment(init_state(2), [CliffordOp("h", (0,)), CliffordOp("cx", (0, 1))])
    p = project(epr, 0, 0)
    assert np.allclose(p.to_dense(), [R, 0, 0, 0])


def test_fragments():
    s = init_state(3)
    assert np.allclose(run_clifford_fragment(s, []).to_dense(), s.to_dense())
    z = run_clifford_fragment(s, [Projection(1, 1), CliffordOp("h", (0,))])
    assert z.is_zero
    assert not np.any(z.to_dense())


def test_copy_is_independent():
    s = StabilizerState(2).h(0)
    c = s.copy()
    c.cx(0, 1)
    assert abs(s.amplitude("11")) < 1e-15
    assert abs(c.amplitude("11") - R) < 1e-15


@pytest.mark.parametrize("bad", [("cx", (0, 0)), ("h", (0, 1)), ("cz", (1,)), ("t", (0,))])
def test_bad_ops(bad):
    with pytest.raises(ValueError):
        CliffordOp(*bad)


def test_out_of_range():
    with pytest.raises(IndexError):
        StabilizerState(2).h(2)
    with pytest.raises(ValueError):
        StabilizerState(1).amplitude("01")


def test_random_eight_qubit_against_dense():
    rng = np.random.default_rng(11)
    for _ in range(10):
        ops = random_ops(rng, 8, 150, p_proj=0.0)
        assert np.abs(StabilizerState(8).run(ops).to_dense() - dense_run(8, ops)).max() < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1), st.integers(0, 60))
def test_property_matches_dense(n, seed, m):
    ops = random_ops(np.random.default_rng(seed), n, m, p_proj=0.1)
    assert np.abs(StabilizerState(n).run(ops).to_dense() - dense_run(n, ops)).max() < 1e-10


def test_sdg_inverts_s_and_cz_symmetry():
    a = StabilizerState(2).h(0).h(1).s_gate(0).sdg(0).cz(0, 1)
    b = StabilizerState(2).h(0).h(1).cz(1, 0)
    assert np.allclose(a.to_dense(), b.to_dense())
