import math

import numpy as np
import pytest

from conftest import random_state
from qsawtooth.engines import RunRecord, TrajectoryEnsemble
from qsawtooth.noise import NoiseModel
from qsawtooth.observables import (
    HusimiGrid,
    average_distributions,
    crossing_time,
    fidelity,
    fidelity_timescale,
    fit_decay_rate,
    husimi,
    ipr,
    ipr_ratio,
    momentum_distribution,
    packet_widths,
)
from qsawtooth.state import basis_state, make_params


def test_momentum_distribution_display_order():
    psi = basis_state(8, -4)
    w = momentum_distribution(psi)
    assert w[0] == 1 and w.sum() == 1
    w = momentum_distribution(np.diag([0.5, 0.5, 0, 0, 0, 0, 0, 0]))
    np.testing.assert_allclose(w, [0, 0, 0, 0, 0.5, 0.5, 0, 0])


def test_momentum_distribution_of_ensemble():
    ens = TrajectoryEnsemble(np.stack([basis_state(4, 0), basis_state(4, 1)]))
    np.testing.assert_allclose(momentum_distribution(ens), [0, 0, 0.5, 0.5])


def test_fidelity_examples(rng):
    psi = random_state(rng, 8)
    assert fidelity(psi, psi) == pytest.approx(1.0)
    assert fidelity(psi, np.outer(psi, psi.conj())) == pytest.approx(1.0)
    assert fidelity(basis_state(8, 0), np.eye(8) / 8) == pytest.approx(1 / 8)
    ens = TrajectoryEnsemble(np.stack([basis_state(8, 0), basis_state(8, 1)]))
    assert fidelity(basis_state(8, 0), ens) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fidelity(psi, basis_state(4, 0))


@pytest.mark.parametrize("gamma", [0.01, 0.1, 0.5])
def test_fit_decay_rate_recovers_exponential(gamma):
    t = np.arange(60)
    rate, se = fit_decay_rate(np.exp(-gamma * t))
    assert rate == pytest.approx(gamma, rel=1e-12)
    assert se < 1e-12


def test_fit_decay_rate_with_intercept():
    t = np.arange(40)
    rate, _ = fit_decay_rate(0.8 * np.exp(-0.05 * t), intercept=True)
    assert rate == pytest.approx(0.05, rel=1e-10)


def test_fit_decay_rate_respects_floor_and_window():
    t = np.arange(100)
    f = np.exp(-0.3 * t)
    rate, _ = fit_decay_rate(f)
    assert rate == pytest.approx(0.3)
    with pytest.raises(ValueError, match="usable points"):
        fit_decay_rate(np.exp(-2.0 * t))


def test_fidelity_timescale():
    params = make_params(6, 0.5)
    t_f, n_g = fidelity_timescale(params, NoiseModel(1e-3))
    assert t_f == pytest.approx(1 / (6 * 114 * 1e-3))
    assert n_g == pytest.approx(1 / (6 * 1e-3))
    assert fidelity_timescale(params, NoiseModel(0.0)) == (math.inf, math.inf)


def test_crossing_time():
    t = np.arange(20)
    f = np.exp(-0.1 * t)
    assert crossing_time(f, 0.9) == pytest.approx(-math.log(0.9) / 0.1, rel=1e-12)
    assert crossing_time(np.ones(5)) == math.inf
    assert crossing_time(np.array([0.5, 0.4])) == 0.0


def test_ipr_examples():
    assert ipr(basis_state(16, 3)) == pytest.approx(1.0)
    assert ipr(np.full(16, 0.25, complex)) == pytest.approx(16.0)
    assert ipr(np.diag([0.5, 0.5, 0, 0])) == pytest.approx(2.0)


def test_ipr_ratio():
    params = make_params(3, 0.5)
    a = RunRecord(params, 0.1, 5, 40, {"ipr": np.full(41, 4.0)})
    b = RunRecord(params, 0.0, 5, 40, {"ipr": np.full(41, 2.0)})
    assert ipr_ratio(a, b) == pytest.approx(2.0)
    c = RunRecord(make_params(4, 0.5), 0.0, 5, 40, {"ipr": np.full(41, 2.0)})
    with pytest.raises(ValueError):
        ipr_ratio(a, c)
    short = RunRecord(params, 0.0, 5, 20, {"ipr": np.full(21, 2.0)})
    with pytest.raises(ValueError):
        ipr_ratio(a, short)


def test_packet_widths_one_cell():
    sigma_n, sigma_theta = packet_widths(64)
    assert sigma_n == pytest.approx(math.sqrt(64 / (4 * math.pi)))
    assert sigma_theta == pytest.approx(1 / (2 * sigma_n))


def test_husimi_of_momentum_eigenstate():
    N = 32
    dist = husimi(basis_state(N, 5))
    assert dist.shape == (N, 2 * N)
    assert dist.grid.sum() == pytest.approx(1.0)
    assert np.all(dist.grid >= 0)
    marginal = dist.momentum_marginal()
    assert dist.n[np.argmax(marginal)] == 5
    # flat in theta
    row = dist.grid[np.argmax(marginal)]
    assert np.ptp(row) < 1e-12 * row.max() + 1e-15


def test_husimi_packet_peaks_at_its_own_point():
    N = 64
    grid = HusimiGrid(N)
    i, j = 40, 17
    packet = grid.packets[i] * np.exp(-1j * np.fft.fftfreq(N, 1 / N) * grid.theta[j])
    packet /= np.linalg.norm(packet)
    raw = grid.raw(packet)
    assert np.unravel_index(np.argmax(raw), raw.shape) == (i, j)
    assert raw.max() == pytest.approx(1.0, abs=1e-12)


def test_husimi_coarse_theta_matches_fine_subsample(rng):
    N = 32
    psi = random_state(rng, N)
    fine = HusimiGrid(N, n_theta=N).raw(psi)
    coarse = HusimiGrid(N, n_theta=8).raw(psi)
    np.testing.assert_allclose(coarse, fine[:, :: N // 8], atol=1e-12)


def test_husimi_rejects_density_and_bad_grid():
    with pytest.raises(ValueError):
        husimi(np.eye(4) / 4)
    with pytest.raises(ValueError):
        HusimiGrid(32, n_theta=5)


def test_average_distributions_and_metrics():
    a = husimi(basis_state(16, 0))
    b = husimi(basis_state(16, 4))
    avg = average_distributions([a, b])
    assert avg.grid.sum() == pytest.approx(1.0)
    assert a.l1(a) == 0
    assert a.l1(b) == pytest.approx(2.0, abs=0.5)
    assert a.correlation(a) == pytest.approx(1.0)
    assert avg.mean_abs_n() == pytest.approx(0.5 * (a.mean_abs_n() + b.mean_abs_n()))


def test_fit_decay_rate_of_constant_is_zero():
    assert fit_decay_rate(np.ones(60))[0] == 0.0


def test_maximally_mixed_examples():
    rho = np.eye(16) / 16
    np.testing.assert_allclose(momentum_distribution(rho), 1 / 16)
    assert fidelity(basis_state(16, 3), rho) == pytest.approx(1 / 16)


def test_doubling_gamma_halves_t_f():
    params = make_params(8, 0.5)
    a, _ = fidelity_timescale(params, NoiseModel(1e-3))
    b, _ = fidelity_timescale(params, NoiseModel(2e-3))
    assert a == pytest.approx(0.625) and b == pytest.approx(a / 2)
