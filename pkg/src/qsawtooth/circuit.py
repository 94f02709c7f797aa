"""Elementary-gate decomposition of one sawtooth map iteration.

One iteration ``U = U_T U_k`` is realised as

    QFT ladder            n_q (n_q + 1) / 2 gates
    kick phases           n_q**2 diagonal gates
    inverse QFT ladder    n_q (n_q + 1) / 2 gates
    free-rotation phases  n_q**2 diagonal gates

for ``3 n_q**2 + n_q`` gates in total. The QFT ladder leaves the phase
representation in bit-reversed qubit order; the kick block is written in
that order, and the inverse ladder restores natural order, so no swap gates
are needed.

Each diagonal block encodes a quadratic form ``alpha * (sum_a w_a b_a + c)**2``
over qubit bits ``b_a``: every ordered pair ``(a, b)``, ``a != b``, becomes a
controlled phase carrying ``alpha w_a w_b``, every qubit gets a one-qubit
phase with the diagonal and linear terms, and ``alpha c**2`` goes to the
tracked global phase. That is exactly ``n_q**2`` gates per block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .state import MapParams, momenta, n_qubits

GATE_KINDS = ("hadamard", "controlled_phase", "phase", "swap")

_SQRT_HALF = 1.0 / math.sqrt(2.0)


def _wrap_angle(x: float) -> float:
    return math.remainder(x, 2.0 * math.pi)


@dataclass(frozen=True)
class Gate:
    """One elementary gate. ``angle`` is ignored for hadamard and swap."""

    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        arity = {"hadamard": 1, "phase": 1, "controlled_phase": 2, "swap": 2}
        if self.kind not in arity:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != arity[self.kind]:
            raise ValueError(f"{self.kind} takes {arity[self.kind]} qubit(s), got {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")
        if len(self.qubits) == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"two-qubit gate on identical qubits {self.qubits}")

    @property
    def is_diagonal(self) -> bool:
        return self.kind in ("phase", "controlled_phase")

    def diagonal(self, n_q: int) -> np.ndarray:
        """Diagonal of a phase gate on an ``n_q`` qubit register."""
        self._check(n_q)
        j = np.arange(1 << n_q)
        if self.kind == "phase":
            bits = (j >> self.qubits[0]) & 1
        elif self.kind == "controlled_phase":
            bits = ((j >> self.qubits[0]) & 1) & ((j >> self.qubits[1]) & 1)
        else:
            raise ValueError(f"{self.kind} gate is not diagonal")
        return np.where(bits == 1, np.exp(1j * self.angle), 1.0 + 0j)

    def _check(self, n_q: int) -> None:
        if max(self.qubits) >= n_q:
            raise ValueError(f"gate {self.kind}{self.qubits} out of range for {n_q} qubits")


def hadamard(q: int) -> Gate:
    return Gate("hadamard", (q,))


def phase(q: int, angle: float) -> Gate:
    return Gate("phase", (q,), _wrap_angle(angle))


def controlled_phase(q1: int, q2: int, angle: float) -> Gate:
    return Gate("controlled_phase", (q1, q2), _wrap_angle(angle))


def swap(q1: int, q2: int) -> Gate:
    return Gate("swap", (q1, q2))


@dataclass(frozen=True)
class GateSequence:
    """Ordered gates for one map iteration plus the global phase they omit.

    Applying every gate in order and multiplying by ``exp(1j * phase)``
    reproduces the map unitary exactly.
    """

    n_q: int
    gates: tuple[Gate, ...]
    phase: float = 0.0
    blocks: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    @cached_property
    def compiled(self) -> list:
        """Per gate: the diagonal array for phase gates, else the gate itself."""
        return [g.diagonal(self.n_q) if g.is_diagonal else g for g in self.gates]

    def apply(self, states: np.ndarray, with_phase: bool = True) -> np.ndarray:
        out = np.array(states, dtype=np.complex128, copy=True)
        for op in self.compiled:
            out = _act(out, op)
        if with_phase:
            out *= np.exp(1j * self.phase)
        return out

    def unitary(self, with_phase: bool = True) -> np.ndarray:
        N = 1 << self.n_q
        # rows of the identity are basis states; apply acts on the last axis
        return self.apply(np.eye(N, dtype=np.complex128), with_phase).T


def qft_gates(n_q: int, inverse: bool = False) -> list[Gate]:
    """Hadamard/controlled-phase ladder; output is the DFT in bit-reversed order."""
    gates = []
    for a in range(n_q - 1, -1, -1):
        gates.append(hadamard(a))
        for b in range(a - 1, -1, -1):
            gates.append(controlled_phase(b, a, math.pi / 2 ** (a - b)))
    if inverse:
        gates = [Gate(g.kind, g.qubits, -g.angle if g.is_diagonal else 0.0) for g in reversed(gates)]
    return gates


def quadratic_phase_gates(alpha: float, weights, offset: float = 0.0) -> tuple[list[Gate], float]:
    """Gates for ``exp(1j * alpha * (sum_a w_a b_a + offset)**2)``.

    Returns ``(gates, global_phase)`` with ``len(weights)**2`` gates.
    """
    n_q = len(weights)
    gates = []
    for a in range(n_q):
        w_a = weights[a]
        gates.append(phase(a, alpha * (w_a * w_a + 2.0 * offset * w_a)))
        for b in range(n_q):
            if b != a:
                gates.append(controlled_phase(a, b, alpha * w_a * weights[b]))
    return gates, alpha * offset * offset


def kick_gates(params: MapParams) -> tuple[list[Gate], float]:
    """``exp(-i k V(theta_j))`` with ``V = -(theta - pi)**2 / 2``, ``theta_j = 2 pi j / N``.

    The phase index ``j`` is read in bit-reversed qubit order.
    """
    n_q, N = params.n_q, params.N
    step = 2.0 * math.pi / N
    weights = [float(1 << (n_q - 1 - a)) for a in range(n_q)]
    return quadratic_phase_gates(0.5 * params.k * step * step, weights, -N / 2)


def rotation_gates(params: MapParams) -> tuple[list[Gate], float]:
    """``exp(-i T n**2 / 2)`` with ``n`` the two's-complement momentum."""
    n_q = params.n_q
    weights = [float(1 << a) for a in range(n_q)]
    weights[-1] = -weights[-1]
    return quadratic_phase_gates(-0.5 * params.T, weights)


def build_map_sequence(params: MapParams, kick_order=None) -> GateSequence:
    """Gates of one map iteration; ``kick_order`` optionally permutes the kick block."""
    n_q = params.n_q
    qft = qft_gates(n_q)
    kick, kick_phase = kick_gates(params)
    if kick_order is not None:
        if sorted(kick_order) != list(range(len(kick))):
            raise ValueError(f"kick_order must be a permutation of range({len(kick)})")
        kick = [kick[i] for i in kick_order]
    iqft = qft_gates(n_q, inverse=True)
    rot, rot_phase = rotation_gates(params)
    gates = tuple(qft + kick + iqft + rot)
    bounds = np.cumsum([0, len(qft), len(kick), len(iqft), len(rot)])
    blocks = {
        name: slice(int(bounds[i]), int(bounds[i + 1]))
        for i, name in enumerate(("qft", "kick", "inverse_qft", "rotation"))
    }
    return GateSequence(n_q, gates, _wrap_angle(kick_phase + rot_phase), blocks)


def _hadamard_last(arr: np.ndarray, q: int) -> np.ndarray:
    N = arr.shape[-1]
    a = arr.reshape(arr.shape[:-1] + (N >> (q + 1), 2, 1 << q))
    x0 = a[..., 0, :]
    x1 = a[..., 1, :]
    out = np.empty_like(a)
    np.add(x0, x1, out=out[..., 0, :])
    np.subtract(x0, x1, out=out[..., 1, :])
    out *= _SQRT_HALF
    return out.reshape(arr.shape)


def _swap_last(arr: np.ndarray, q1: int, q2: int) -> np.ndarray:
    j = np.arange(arr.shape[-1])
    b1 = (j >> q1) & 1
    b2 = (j >> q2) & 1
    perm = j ^ ((b1 ^ b2) << q1) ^ ((b1 ^ b2) << q2)
    return arr[..., perm]


def _act(arr: np.ndarray, op, conj: bool = False) -> np.ndarray:
    """Apply a compiled gate (diagonal array or Gate) along the last axis."""
    if isinstance(op, np.ndarray):
        return arr * (op.conj() if conj else op)
    if op.kind == "hadamard":
        return _hadamard_last(arr, op.qubits[0])
    if op.kind == "swap":
        return _swap_last(arr, *op.qubits)
    raise ValueError(f"cannot act with {op!r}")


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    """Unitary action of ``gate`` on a state (or a batch of states along the last axis)."""
    state = np.asarray(state, dtype=np.complex128)
    n_q = n_qubits(state.shape[-1])
    gate._check(n_q)
    return _act(state, gate.diagonal(n_q) if gate.is_diagonal else gate)


def conjugate_density(rho: np.ndarray, op) -> np.ndarray:
    """``U rho U^dagger`` for a compiled gate ``op``."""
    left = _act(rho.T, op).T
    return _act(left, op, conj=True)


def apply_map_oracle(state: np.ndarray, params: MapParams) -> np.ndarray:
    """Noise-free split-operator iteration ``exp(-i T n^2/2) exp(-i k V(theta))``.

    Works on a single state or a batch along the last axis.
    """
    N = params.N
    psi = np.asarray(state, dtype=np.complex128)
    theta = 2.0 * math.pi * np.arange(N) / N
    kick = np.exp(0.5j * params.k * (theta - math.pi) ** 2)
    n = momenta(N).astype(np.float64)
    rotation = np.exp(-0.5j * params.T * n * n)
    in_theta = np.fft.ifft(psi, axis=-1, norm="ortho")
    return np.fft.fft(in_theta * kick, axis=-1, norm="ortho") * rotation
