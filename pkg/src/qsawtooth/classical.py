"""Classical sawtooth map on the torus and quantum-cell smoothed densities.

In rescaled momentum ``p = T n`` one step reads

    p' = p + K (theta - pi),    theta' = theta + p',

with ``theta`` taken mod ``2 pi`` and ``p`` wrapped into ``[-pi L, pi L)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import gaussian_filter

from .observables import PhaseSpaceDistribution, packet_widths

TWO_PI = 2.0 * math.pi


def wrap_momentum(p, L: int = 1):
    half = math.pi * L
    return np.mod(np.asarray(p) + half, 2.0 * half) - half


def classical_step(theta, p, K: float, L: int = 1):
    """One map step for scalars or arrays; returns wrapped ``(theta, p)``."""
    theta = np.asarray(theta, dtype=float)
    p = np.asarray(p, dtype=float)
    p_new = p + K * (theta - math.pi)
    theta_new = np.mod(theta + p_new, TWO_PI)
    p_new = wrap_momentum(p_new, L)
    if theta_new.ndim == 0:
        return float(theta_new), float(p_new)
    return theta_new, p_new


def unwrapped_step(theta, p, K: float):
    """The same step without wrapping, for local derivatives."""
    p_new = p + K * (theta - math.pi)
    return theta + p_new, p_new


def jacobian_fd(theta: float, p: float, K: float, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian ``d(theta', p') / d(theta, p)``."""
    J = np.empty((2, 2))
    for col, (dt, dp) in enumerate(((h, 0.0), (0.0, h))):
        plus = unwrapped_step(theta + dt, p + dp, K)
        minus = unwrapped_step(theta - dt, p - dp, K)
        J[0, col] = (plus[0] - minus[0]) / (2 * h)
        J[1, col] = (plus[1] - minus[1]) / (2 * h)
    return J


def lyapunov_exponent(theta: float, p: float, K: float, steps: int = 2000, L: int = 1, d0: float = 1e-8) -> float:
    """Largest Lyapunov exponent from two nearby orbits, renormalised every step."""
    a = np.array([theta, p], dtype=float)
    b = a + np.array([d0, 0.0])
    total = 0.0
    for _ in range(steps):
        a = np.array(classical_step(a[0], a[1], K, L))
        b = np.array(classical_step(b[0], b[1], K, L))
        diff = b - a
        diff[0] = math.remainder(diff[0], TWO_PI)
        diff[1] = math.remainder(diff[1], TWO_PI * L)
        d = math.hypot(*diff)
        total += math.log(d / d0)
        b = a + diff * (d0 / d)
    return total / steps


def classical_density(K: float, N: int, p0: float, n_pts: int = 20000, window=(0, 9), L: int = 1,
                      shape=None, cell_sigma=None, theta0=None) -> PhaseSpaceDistribution:
    """Time-averaged ensemble density on the Husimi grid, smoothed over a quantum cell.

    Points start uniform in ``theta`` (or at ``theta0``) with momentum ``p0``
    and are histogrammed at every iteration of ``window``. ``cell_sigma`` is
    ``(sigma_theta, sigma_p)``; by default the Husimi packet widths with
    ``T = 2 pi L / N``. The grid has ``shape = (n_n, n_theta)`` (default
    ``(N, 2N)``) with rows at momenta ``n = p / T``.
    """
    lo, hi = window
    if hi < lo or lo < 0:
        raise ValueError(f"empty window {window}")
    T = TWO_PI * L / N
    n_n, n_theta = shape if shape is not None else (N, 2 * N)
    if cell_sigma is None:
        sigma_n, sigma_theta = packet_widths(N, T)
        cell_sigma = (sigma_theta, T * sigma_n)
    sigma_theta, sigma_p = cell_sigma

    if theta0 is None:
        theta = TWO_PI * (np.arange(n_pts) + 0.5) / n_pts
    else:
        theta = np.atleast_1d(np.asarray(theta0, dtype=float))
    p = np.full(theta.shape, float(p0))
    p = wrap_momentum(p, L)

    dn = N / n_n
    dtheta = TWO_PI / n_theta
    hist = np.zeros(n_n * n_theta)
    for t in range(hi + 1):
        if t >= lo:
            row = np.mod(np.rint((p / T + N / 2) / dn).astype(np.int64), n_n)
            col = np.mod(np.rint(theta / dtheta).astype(np.int64), n_theta)
            hist += np.bincount(row * n_theta + col, minlength=n_n * n_theta)
        theta, p = classical_step(theta, p, K, L)
    hist = hist.reshape(n_n, n_theta)
    smoothed = gaussian_filter(hist, sigma=(sigma_p / T / dn, sigma_theta / dtheta), mode="wrap")
    mass = smoothed.sum()
    return PhaseSpaceDistribution(
        grid=smoothed / mass,
        theta=dtheta * np.arange(n_theta),
        n=-N / 2 + dn * np.arange(n_n),
        sigma_theta=sigma_theta,
        sigma_n=sigma_p / T,
        mass=float(mass),
    )
