"""Registers, basis conventions and the momentum index map.

Storage order of momentum amplitudes is FFT-natural: index ``j`` holds the
physical momentum ``n = j`` for ``j < N/2`` and ``n = j - N`` otherwise.
Qubit ``m`` is bit ``m`` of the storage index (bit 0 least significant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MapParams:
    """Parameters of the sawtooth map on ``N = 2**n_q`` momentum levels.

    ``T`` is the effective Planck constant, ``k`` the kick strength and
    ``L`` the number of classical cells on the torus.
    """

    n_q: int
    k: float
    T: float
    L: int = 1

    def __post_init__(self):
        if int(self.n_q) != self.n_q or self.n_q < 1:
            raise ValueError(f"n_q must be a positive integer, got {self.n_q!r}")
        if not (math.isfinite(self.k) and math.isfinite(self.T)):
            raise ValueError("k and T must be finite")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")

    @property
    def N(self) -> int:
        return 1 << self.n_q

    @property
    def K(self) -> float:
        return self.k * self.T

    @property
    def n_gates(self) -> int:
        """Elementary gates per map iteration, ``3 n_q**2 + n_q``."""
        return 3 * self.n_q**2 + self.n_q


def make_params(n_q: int, K: float, k: float | None = None, L: int = 1) -> MapParams:
    """Build consistent map parameters.

    With ``k`` omitted the torus holds ``L`` classical cells: ``T = 2 pi L / N``
    and ``k = K / T``. With ``k`` given, ``T = K / k``.
    """
    if int(n_q) != n_q or n_q < 2:
        raise ValueError(f"n_q must be an integer >= 2, got {n_q!r}")
    n_q = int(n_q)
    if not math.isfinite(K):
        raise ValueError(f"K must be finite, got {K!r}")
    if k is None:
        T = TWO_PI * L / (1 << n_q)
        k = K / T
    else:
        if not math.isfinite(k) or k == 0:
            raise ValueError(f"k must be finite and nonzero, got {k!r}")
        T = K / k
    if not T > 0:
        raise ValueError(f"T must be positive, got T={T!r} (K={K!r}, k={k!r})")
    return MapParams(n_q=n_q, k=float(k), T=float(T), L=int(L))


def momentum_of_index(j, N: int):
    """Physical momentum stored at index ``j`` (scalar or array)."""
    j = np.asarray(j)
    if np.any((j < 0) | (j >= N)):
        raise ValueError(f"index out of range for N={N}")
    n = np.where(j < N // 2, j, j - N)
    return int(n) if n.ndim == 0 else n


def index_of_momentum(n, N: int):
    """Storage index of physical momentum ``n`` in ``[-N/2, N/2)``."""
    n = np.asarray(n)
    if np.any((n < -(N // 2)) | (n >= N // 2)):
        raise ValueError(f"momentum out of range [-{N // 2}, {N // 2}) for N={N}")
    j = np.mod(n, N)
    return int(j) if j.ndim == 0 else j


def momenta(N: int) -> np.ndarray:
    """Physical momenta in storage order."""
    return np.fft.fftfreq(N, d=1.0 / N).astype(np.int64)


def display_order(N: int) -> np.ndarray:
    """Storage indices ordered by increasing physical momentum."""
    return np.fft.fftshift(np.arange(N))


def basis_state(N: int | MapParams, n: int) -> np.ndarray:
    """Momentum eigenstate ``|n>`` as a complex amplitude vector."""
    if isinstance(N, MapParams):
        N = N.N
    psi = np.zeros(N, dtype=np.complex128)
    psi[index_of_momentum(n, N)] = 1.0
    return psi


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a|b>``, conjugating ``a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def n_qubits(dim: int) -> int:
    n_q = int(dim).bit_length() - 1
    if dim < 2 or (1 << n_q) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n_q


def projector(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def check_density(rho: np.ndarray, atol: float = 1e-10) -> None:
    """Raise ``ValueError`` unless ``rho`` is square, Hermitian and unit trace."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    n_qubits(rho.shape[0])
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise ValueError(f"density matrix trace {np.trace(rho).real:.3g} != 1")
