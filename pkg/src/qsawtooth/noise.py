"""Per-qubit amplitude damping after every gate: exact Kraus form and jump unraveling.

Both engines use the same per-gate damping probability ``p = 1 - exp(-gamma)``,
the exact solution of the damping master equation over one gate interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .state import n_qubits


@dataclass(frozen=True)
class NoiseModel:
    """Damping rate ``gamma`` per gate, identical for every qubit."""

    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma!r}")

    @property
    def p_jump(self) -> float:
        return -math.expm1(-self.gamma)

    @property
    def is_noiseless(self) -> bool:
        return self.gamma == 0.0


def _check_qubit(qubit: int, n_q: int) -> None:
    if not 0 <= qubit < n_q:
        raise ValueError(f"qubit {qubit} out of range for {n_q} qubits")


def apply_channel_exact(rho: np.ndarray, qubit: int, model: NoiseModel) -> np.ndarray:
    """Amplitude damping on one qubit of a density matrix.

    Kraus pair ``K0 = diag(1, sqrt(1-p))``, ``K1 = sqrt(p) |0><1|``.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    n_q = n_qubits(rho.shape[0])
    _check_qubit(qubit, n_q)
    out = rho.copy()
    if model.is_noiseless:
        return out
    _damp_density_inplace(out, qubit, model.p_jump)
    return out


def _damp_density_inplace(rho: np.ndarray, qubit: int, p: float) -> None:
    N = rho.shape[0]
    hi, lo = N >> (qubit + 1), 1 << qubit
    r = rho.reshape(hi, 2, lo, hi, 2, lo)
    s = math.sqrt(1.0 - p)
    r[:, 0, :, :, 0, :] += p * r[:, 1, :, :, 1, :]
    r[:, 1, :, :, 1, :] *= 1.0 - p
    r[:, 0, :, :, 1, :] *= s
    r[:, 1, :, :, 0, :] *= s


def damp_density_all(rho: np.ndarray, p: float) -> None:
    """Damp every qubit of ``rho`` in place, qubit 0 first."""
    for q in range(n_qubits(rho.shape[0])):
        _damp_density_inplace(rho, q, p)


def _damp_states_one_qubit(states: np.ndarray, qubit: int, p: float, u: np.ndarray) -> np.ndarray:
    """Jump/no-jump step on ``qubit`` for a batch ``states`` of shape ``(B, N)``.

    ``u`` holds one uniform draw per state. A state jumps when
    ``u < p * P_up``, with ``P_up`` the population of the qubit's up level.
    """
    B, N = states.shape
    hi, lo = N >> (qubit + 1), 1 << qubit
    v = states.reshape(B, hi, 2, lo)
    probs = v.real**2 + v.imag**2
    up = probs[:, :, 1, :].sum(axis=(1, 2))
    total = up + probs[:, :, 0, :].sum(axis=(1, 2))
    jump = u * total < p * up
    out = np.empty_like(v)
    if jump.any():
        scale = 1.0 / np.sqrt(up[jump])
        out[jump, :, 0, :] = v[jump, :, 1, :] * scale[:, None, None]
        out[jump, :, 1, :] = 0.0
    stay = ~jump
    if stay.any():
        norm = 1.0 / np.sqrt(total[stay] - p * up[stay])
        out[stay, :, 0, :] = v[stay, :, 0, :] * norm[:, None, None]
        out[stay, :, 1, :] = v[stay, :, 1, :] * (math.sqrt(1.0 - p) * norm)[:, None, None]
    return out.reshape(B, N)


def stochastic_step(state: np.ndarray, qubit: int, model: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """One quantum-jump step of the damping channel on ``qubit``; consumes one draw."""
    state = np.asarray(state, dtype=np.complex128)
    n_q = n_qubits(state.shape[-1])
    _check_qubit(qubit, n_q)
    u = rng.random()
    if model.is_noiseless:
        return state.copy()
    return _damp_states_one_qubit(state.reshape(1, -1), qubit, model.p_jump, np.array([u]))[0]


class DampingRound:
    """Damping of every qubit after one gate for a batch of trajectories.

    Equivalent to calling the single-qubit step for qubits ``0..n_q-1`` in
    order with draws ``u[:, 0..n_q-1]``. States that draw no jump on any
    qubit are handled in one pass: conditioning on no jump before qubit
    ``m`` reweights ``|psi_j|^2`` by ``(1-p)**popcount(j & (2**m - 1))``, so
    all ``n_q`` jump probabilities follow from two matrix products. States
    with at least one jump fall back to the sequential per-qubit step.
    """

    def __init__(self, n_q: int, p: float):
        self.n_q = n_q
        self.p = p
        N = 1 << n_q
        j = np.arange(N)
        bits = (j[:, None] >> np.arange(n_q)[None, :]) & 1
        below = np.cumsum(bits, axis=1) - bits
        c = 1.0 - p
        self.weight_all = np.empty((N, n_q + 1))
        self.weight_all[:, :n_q] = c**below
        self.weight_all[:, n_q] = c ** bits.sum(axis=1)
        self.weight_up = bits * self.weight_all[:, :n_q]
        self.no_jump_diag = np.sqrt(self.weight_all[:, n_q])

    def __call__(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        probs = states.real**2 + states.imag**2
        total = probs @ self.weight_all
        up = probs @ self.weight_up
        any_jump = (u * total[:, : self.n_q] < self.p * up).any(axis=1)
        out = states * self.no_jump_diag
        out /= np.sqrt(total[:, self.n_q])[:, None]
        if any_jump.any():
            sub = states[any_jump]
            su = u[any_jump]
            for q in range(self.n_q):
                sub = _damp_states_one_qubit(sub, q, self.p, su[:, q])
            out[any_jump] = sub
        return out


def apply_noise_after_gate(target: np.ndarray, model: NoiseModel, rng: np.random.Generator | None = None) -> np.ndarray:
    """Damp every qubit in ascending order.

    A 1-d ``target`` is a state vector and is unraveled stochastically
    (``rng`` required); a 2-d ``target`` is a density matrix and gets the
    exact channel.
    """
    target = np.asarray(target, dtype=np.complex128)
    n_q = n_qubits(target.shape[-1])
    if target.ndim == 2:
        out = target.copy()
        if not model.is_noiseless:
            damp_density_all(out, model.p_jump)
        return out
    if target.ndim != 1:
        raise ValueError(f"expected a state vector or density matrix, got shape {target.shape}")
    if rng is None:
        raise ValueError("a random generator is required for state vectors")
    out = target
    for q in range(n_q):
        out = stochastic_step(out, q, model, rng)
    return out
