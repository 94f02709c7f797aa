import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from qsawtooth.circuit import (
    Gate,
    apply_gate,
    apply_map_oracle,
    build_map_sequence,
    controlled_phase,
    hadamard,
    phase,
    qft_gates,
    quadratic_phase_gates,
    swap,
    GateSequence,
)
from qsawtooth.state import MapParams, basis_state, make_params, momenta


def dense_map(params):
    """Split-operator unitary built from an explicit DFT matrix (no FFT)."""
    N = params.N
    n = momenta(N)
    theta = 2 * math.pi * np.arange(N) / N
    to_theta = np.exp(1j * np.outer(theta, n)) / math.sqrt(N)
    kick = np.exp(0.5j * params.k * (theta - math.pi) ** 2)
    rot = np.exp(-0.5j * params.T * n.astype(float) ** 2)
    return np.diag(rot) @ to_theta.conj().T @ np.diag(kick) @ to_theta


def bit_reverse(j, n_q):
    return int(format(j, f"0{n_q}b")[::-1], 2)


@pytest.mark.parametrize("n_q,count", [(6, 114), (8, 200), (2, 14), (4, 52)])
def test_gate_count(n_q, count):
    seq = build_map_sequence(make_params(n_q, 1.0))
    assert len(seq) == count == 3 * n_q**2 + n_q


def test_block_sizes():
    seq = build_map_sequence(make_params(5, 0.5))
    sizes = {name: s.stop - s.start for name, s in seq.blocks.items()}
    assert sizes == {"qft": 15, "kick": 25, "inverse_qft": 15, "rotation": 25}


@pytest.mark.parametrize("n_q", [1, 2, 3, 4])
def test_qft_block_is_bit_reversed_dft(n_q):
    N = 1 << n_q
    seq = GateSequence(n_q, tuple(qft_gates(n_q)))
    U = seq.unitary()
    rev = [bit_reverse(j, n_q) for j in range(N)]
    F = np.exp(2j * math.pi * np.outer(np.arange(N), np.arange(N)) / N) / math.sqrt(N)
    np.testing.assert_allclose(U[rev], F, atol=1e-10)


@pytest.mark.parametrize("n_q", [1, 2, 3, 4])
def test_inverse_qft_inverts(n_q):
    seq = GateSequence(n_q, tuple(qft_gates(n_q) + qft_gates(n_q, inverse=True)))
    np.testing.assert_allclose(seq.unitary(), np.eye(1 << n_q), atol=1e-12)


@pytest.mark.parametrize("n_q", [2, 3, 4])
def test_gates_match_dense_map(n_q):
    rng = np.random.default_rng(n_q)
    for _ in range(20):
        k = rng.uniform(-20, 20)
        T = rng.uniform(0.05, 3.0)
        params = MapParams(n_q, k, T)
        U = build_map_sequence(params).unitary()
        assert np.max(np.abs(U - dense_map(params))) < 1e-10


@pytest.mark.parametrize("n_q", [2, 3, 4, 6])
def test_oracle_matches_dense_map(n_q):
    params = make_params(n_q, math.sqrt(2), k=math.sqrt(3))
    U = dense_map(params)
    N = params.N
    np.testing.assert_allclose(apply_map_oracle(np.eye(N), params), U.T, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=5), st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_gates_match_oracle_on_random_states(n_q, K, seed):
    if abs(K) < 1e-3:
        K = 0.5
    params = make_params(n_q, K)
    psi = random_state(np.random.default_rng(seed), params.N)
    out = build_map_sequence(params).apply(psi)
    np.testing.assert_allclose(out, apply_map_oracle(psi, params), atol=1e-10)


def test_kick_order_permutation_keeps_unitary():
    params = make_params(3, 0.7)
    seq = build_map_sequence(params)
    kick = seq.blocks["kick"]
    order = list(reversed(range(kick.stop - kick.start)))
    permuted = build_map_sequence(params, kick_order=order)
    np.testing.assert_allclose(permuted.unitary(), seq.unitary(), atol=1e-12)
    assert permuted.gates != seq.gates
    with pytest.raises(ValueError):
        build_map_sequence(params, kick_order=[0, 0, 1])


def test_quadratic_block_value():
    weights = [1.0, 2.0, -4.0]
    alpha, offset = 0.37, 1.5
    gates, g = quadratic_phase_gates(alpha, weights, offset)
    assert len(gates) == 9
    seq = GateSequence(3, tuple(gates), g)
    diag = np.diagonal(seq.unitary())
    j = np.arange(8)
    x = sum(w * ((j >> a) & 1) for a, w in enumerate(weights)) + offset
    np.testing.assert_allclose(diag, np.exp(1j * alpha * x**2), atol=1e-12)


def test_apply_gate_examples():
    zero = basis_state(4, 0)
    out = apply_gate(zero, hadamard(1))
    np.testing.assert_allclose(out, [1 / math.sqrt(2), 0, 1 / math.sqrt(2), 0])
    # |q1 q0> = |11> is index 3, momentum -1
    three = np.zeros(4, complex)
    three[3] = 1
    np.testing.assert_allclose(apply_gate(three, controlled_phase(0, 1, 0.3))[3], np.exp(0.3j))
    np.testing.assert_allclose(apply_gate(three, phase(0, 0.3))[3], np.exp(0.3j))
    one = np.zeros(4, complex)
    one[1] = 1
    np.testing.assert_allclose(apply_gate(one, swap(0, 1)), [0, 0, 1, 0])
    with pytest.raises(ValueError):
        apply_gate(zero, hadamard(2))


def test_apply_gate_batch():
    rng = np.random.default_rng(0)
    batch = np.stack([random_state(rng, 8) for _ in range(3)])
    out = apply_gate(batch, hadamard(2))
    for row, psi in zip(out, batch):
        np.testing.assert_allclose(row, apply_gate(psi, hadamard(2)))


@pytest.mark.parametrize("kind,qubits", [("toffoli", (0,)), ("hadamard", (0, 1)), ("swap", (1, 1)), ("phase", (-1,))])
def test_gate_validation(kind, qubits):
    with pytest.raises(ValueError):
        Gate(kind, qubits)


def test_norm_after_1000_iterations():
    params = make_params(8, math.sqrt(2), k=math.sqrt(3))
    psi = basis_state(params, 0)
    for _ in range(1000):
        psi = apply_map_oracle(psi, params)
    assert abs(np.linalg.norm(psi) - 1) <= 1e-8


def test_identity_parameters_give_identity():
    params = MapParams(3, 0.0, 0.0)
    U = build_map_sequence(params).unitary()
    np.testing.assert_allclose(U, np.eye(8), atol=1e-12)
