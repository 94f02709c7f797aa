"""Momentum distribution, fidelity, decay-rate fit, IPR and Husimi distributions.

A *source* is a density matrix (2-d array), a single state vector (1-d
array) or a :class:`~qsawtooth.engines.TrajectoryEnsemble`. Momentum
distributions are returned in display order, ``W[i]`` being the weight of
physical momentum ``n = i - N/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .state import MapParams, display_order, momenta


def _members(source):
    """``(kind, array)`` with kind ``"rho"`` or ``"states"`` (2-d, one state per row)."""
    members = getattr(source, "members", None)
    if members is not None:
        return "states", np.asarray(members)
    arr = np.asarray(source)
    if arr.ndim == 1:
        return "states", arr[None, :]
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        return "rho", arr
    raise ValueError(f"cannot interpret source of shape {arr.shape}")


def momentum_distribution(source) -> np.ndarray:
    """``W_n`` over physical momentum ``n = -N/2 .. N/2 - 1``."""
    kind, arr = _members(source)
    if kind == "rho":
        w = np.real(np.diagonal(arr)).copy()
    else:
        w = np.mean(arr.real**2 + arr.imag**2, axis=0)
    return w[display_order(w.shape[0])]


def fidelity(ideal: np.ndarray, source) -> float:
    """``<psi0|rho|psi0>``; for an ensemble the mean of ``|<psi0|psi_a>|^2``."""
    ideal = np.asarray(ideal)
    kind, arr = _members(source)
    if arr.shape[-1] != ideal.shape[0]:
        raise ValueError(f"dimension mismatch: {ideal.shape[0]} vs {arr.shape[-1]}")
    if kind == "rho":
        return float(np.real(np.vdot(ideal, arr @ ideal)))
    overlaps = arr @ ideal.conj()
    return float(np.mean(overlaps.real**2 + overlaps.imag**2))


def fit_decay_rate(series, window=(1, 50), floor: float = 0.05, intercept: bool = False) -> tuple[float, float]:
    """Least-squares rate ``gamma`` of ``f(t) ~ exp(-gamma t)``.

    ``series[t]`` is the fidelity after ``t`` iterations. Only points with
    ``window[0] <= t <= window[1]`` and ``f > floor`` are used. The line
    ``-ln f = gamma t`` goes through the origin because ``f(0) = 1``; pass
    ``intercept=True`` for an ordinary regression. Returns the rate and its
    standard error.
    """
    f = np.asarray(series, dtype=float)
    t = np.arange(f.shape[0], dtype=float)
    use = (t >= window[0]) & (t <= window[1]) & (f > floor)
    if use.sum() < 5:
        raise ValueError(f"only {int(use.sum())} usable points for the decay fit (need 5)")
    t, y = t[use], -np.log(f[use])
    if intercept:
        fit = stats.linregress(t, y)
        return float(fit.slope), float(fit.stderr)
    sxx = float(t @ t)
    slope = float(t @ y) / sxx
    resid = y - slope * t
    stderr = math.sqrt(float(resid @ resid) / (t.size - 1) / sxx)
    return slope, stderr


def fidelity_timescale(params: MapParams, model) -> tuple[float, float]:
    """``(t_f, N_g)`` with ``t_f = 1/(n_q n_g gamma)`` and ``N_g = 1/(n_q gamma)``.

    Both are infinite without dissipation.
    """
    gamma = model.gamma
    if gamma == 0:
        return math.inf, math.inf
    return 1.0 / (params.n_q * params.n_gates * gamma), 1.0 / (params.n_q * gamma)


def crossing_time(series, level: float = 0.9) -> float:
    """First time ``f(t)`` drops to ``level``, log-linearly interpolated between iterations."""
    f = np.asarray(series, dtype=float)
    below = np.nonzero(f <= level)[0]
    if below.size == 0:
        return math.inf
    i = int(below[0])
    if i == 0:
        return 0.0
    a, b = math.log(f[i - 1]), math.log(max(f[i], 1e-300))
    return (i - 1) + (a - math.log(level)) / (a - b)


def ipr(source) -> float:
    """``1 / sum_n W_n**2`` of the (ensemble-averaged) momentum distribution."""
    w = momentum_distribution(source)
    return float(1.0 / np.sum(w * w))


def ipr_ratio(gamma_run, ideal_run, window=(30, 40)) -> float:
    """Window-averaged IPR of a noisy run over that of the noise-free run."""
    if gamma_run.params != ideal_run.params:
        raise ValueError("runs have different map parameters")
    lo, hi = window
    if hi > min(gamma_run.t_max, ideal_run.t_max):
        raise ValueError(f"window {window} exceeds the recorded iterations")
    xi = np.mean(gamma_run.snapshots["ipr"][lo : hi + 1])
    xi0 = np.mean(ideal_run.snapshots["ipr"][lo : hi + 1])
    return float(xi / xi0)


@dataclass
class PhaseSpaceDistribution:
    """Density on a ``(n, theta)`` grid; rows index momentum, columns angle.

    ``mass`` is the total before normalisation; ``grid`` sums to one.
    """

    grid: np.ndarray
    theta: np.ndarray
    n: np.ndarray
    sigma_theta: float
    sigma_n: float
    mass: float = 1.0

    @property
    def shape(self):
        return self.grid.shape

    def momentum_marginal(self) -> np.ndarray:
        return self.grid.sum(axis=1)

    def mean_abs_n(self) -> float:
        return float(np.sum(self.momentum_marginal() * np.abs(self.n)))

    def l1(self, other: "PhaseSpaceDistribution") -> float:
        if self.grid.shape != other.grid.shape:
            raise ValueError("grids differ in shape")
        return float(np.abs(self.grid - other.grid).sum())

    def correlation(self, other: "PhaseSpaceDistribution") -> float:
        return float(np.corrcoef(self.grid.ravel(), other.grid.ravel())[0, 1])


def packet_widths(N: int, T: float | None = None) -> tuple[float, float]:
    """Momentum and angle widths of the coherent packet, ``(sigma_n, sigma_theta)``.

    The packet is symmetric in ``(theta, p = T n)``: ``T sigma_n = sigma_theta
    = 1 / (2 sigma_n)``, which gives ``sigma_n = sqrt(N / 4 pi)`` for
    ``T = 2 pi / N``.
    """
    if T is None:
        T = 2.0 * math.pi / N
    sigma_n = 1.0 / math.sqrt(2.0 * T)
    return sigma_n, 1.0 / (2.0 * sigma_n)


class HusimiGrid:
    """Precomputed packets for Husimi evaluation on an ``n_n x n_theta`` grid."""

    def __init__(self, N: int, n_theta: int | None = None, n_n: int | None = None, T: float | None = None):
        n_theta = 2 * N if n_theta is None else int(n_theta)
        n_n = N if n_n is None else int(n_n)
        if n_theta < 1 or n_n < 1:
            raise ValueError(f"degenerate Husimi grid {n_n} x {n_theta}")
        self.N, self.n_theta, self.n_n = N, n_theta, n_n
        self.sigma_n, self.sigma_theta = packet_widths(N, T)
        self.theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
        self.n0 = -N / 2 + np.arange(n_n) * (N / n_n)
        n = momenta(N).astype(float)
        diff = n[None, :] - self.n0[:, None]
        diff = (diff + N / 2) % N - N / 2
        amp = sum(np.exp(-((diff + w * N) ** 2) / (4.0 * self.sigma_n**2)) for w in (-1, 0, 1))
        self.packets = amp / np.linalg.norm(amp, axis=1, keepdims=True)
        self.slot = momenta(N) % n_theta
        if n_theta < N and N % n_theta:
            raise ValueError(f"n_theta={n_theta} must be >= N or divide N={N}")

    def raw(self, states: np.ndarray, chunk: int = 8) -> np.ndarray:
        """Sum over ``states`` (shape ``(B, N)``) of ``|<packet|psi>|^2`` per grid point."""
        states = np.atleast_2d(states)
        total = np.zeros((self.n_n, self.n_theta))
        width = max(self.n_theta, self.N)
        for start in range(0, states.shape[0], chunk):
            psi = states[start : start + chunk]
            c = self.packets[None, :, :] * psi[:, None, :]
            if self.n_theta >= self.N:
                padded = np.zeros(c.shape[:2] + (width,), dtype=np.complex128)
                padded[..., self.slot] = c
            else:
                order = np.argsort(self.slot, kind="stable")
                padded = c[..., order].reshape(c.shape[:2] + (self.n_theta, self.N // self.n_theta)).sum(axis=-1)
            amp = np.fft.ifft(padded, axis=-1) * self.n_theta
            total += np.sum(amp.real**2 + amp.imag**2, axis=0)
        return total

    def distribution(self, raw: np.ndarray, count: int = 1) -> PhaseSpaceDistribution:
        mass = float(raw.sum())
        if not mass > 0:
            raise ValueError("Husimi mass is not positive")
        return PhaseSpaceDistribution(
            grid=raw / mass,
            theta=self.theta,
            n=self.n0,
            sigma_theta=self.sigma_theta,
            sigma_n=self.sigma_n,
            mass=mass / count,
        )


def husimi(source, n_theta: int | None = None, n_n: int | None = None, T: float | None = None) -> PhaseSpaceDistribution:
    """Husimi distribution of a state or ensemble on an ``n_n x n_theta`` grid (default ``N x 2N``).

    Each trajectory contributes ``|<alpha(theta0, n0)|psi>|^2`` with a
    periodised minimum-uncertainty packet ``alpha``; contributions are
    averaged and normalised to unit mass.
    """
    kind, arr = _members(source)
    if kind == "rho":
        raise ValueError("husimi expects a state vector or trajectory ensemble")
    grid = HusimiGrid(arr.shape[-1], n_theta, n_n, T)
    return grid.distribution(grid.raw(arr), count=arr.shape[0])


def average_distributions(dists) -> PhaseSpaceDistribution:
    dists = list(dists)
    if not dists:
        raise ValueError("no distributions to average")
    first = dists[0]
    grid = sum(d.grid for d in dists) / len(dists)
    return PhaseSpaceDistribution(grid / grid.sum(), first.theta, first.n, first.sigma_theta, first.sigma_n,
                                  float(np.mean([d.mass for d in dists])))
