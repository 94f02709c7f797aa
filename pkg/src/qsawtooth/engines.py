"""Exact density-matrix and Monte Carlo trajectory drivers.

Both engines apply the gates of one map iteration in order and damp every
qubit after each gate. Snapshots are taken after whole iterations, so a
record of ``t_max`` iterations holds ``t_max + 1`` entries including t = 0.

Trajectory ``a`` of a run seeded with ``master_seed`` draws from
``PCG64(SeedSequence(master_seed, spawn_key=(a,)))``, one uniform per qubit
per gate. Trajectories are processed in fixed blocks of ``block_size``
consecutive indices; threads only decide which block runs where, and block
results are combined in ascending block order, so a run is bit-identical
for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import _act, apply_map_oracle, build_map_sequence, conjugate_density
from .noise import DampingRound, NoiseModel, damp_density_all
from .observables import HusimiGrid, PhaseSpaceDistribution, _members, fidelity, momentum_distribution
from .state import MapParams, check_density, projector

EXACT_CAP = 256
DEFAULT_OBSERVABLES = ("W", "fidelity", "ipr")
EXACT_ONLY = ("purity", "rho")
TRAJECTORY_ONLY = ("husimi",)


@dataclass
class TrajectoryEnsemble:
    """``M`` trajectories as rows of ``members``."""

    members: np.ndarray
    master_seed: int | None = None

    def __post_init__(self):
        self.members = np.atleast_2d(np.asarray(self.members, dtype=np.complex128))

    @property
    def M(self) -> int:
        return self.members.shape[0]

    def __len__(self):
        return self.M


@dataclass
class RunRecord:
    """Per-iteration observables of one run.

    ``snapshots[name][t]`` is the observable after ``t`` iterations. Husimi
    distributions are kept only for the requested iterations, keyed by ``t``.
    """

    params: MapParams
    gamma: float
    M: int | str
    t_max: int
    snapshots: dict = field(default_factory=dict)
    husimi: dict = field(default_factory=dict)
    final: object = None

    def husimi_average(self, window) -> PhaseSpaceDistribution:
        lo, hi = window
        keys = [t for t in sorted(self.husimi) if lo <= t <= hi]
        if not keys:
            raise ValueError(f"no Husimi snapshots in window {window}")
        first = self.husimi[keys[0]]
        grid = sum(self.husimi[t].grid for t in keys) / len(keys)
        return PhaseSpaceDistribution(grid / grid.sum(), first.theta, first.n, first.sigma_theta, first.sigma_n,
                                      float(np.mean([self.husimi[t].mass for t in keys])))


def _check_observables(observables, forbidden):
    known = set(DEFAULT_OBSERVABLES) | set(EXACT_ONLY) | set(TRAJECTORY_ONLY)
    for name in observables:
        if name not in known:
            raise ValueError(f"unknown observable {name!r}")
        if name in forbidden:
            raise ValueError(f"observable {name!r} is not available from this engine")


def ideal_states(params: MapParams, psi0: np.ndarray, t_max: int) -> np.ndarray:
    """Noise-free states ``psi0(t)``, ``t = 0..t_max``, from the split-operator map."""
    out = np.empty((t_max + 1, params.N), dtype=np.complex128)
    out[0] = psi0
    for t in range(t_max):
        out[t + 1] = apply_map_oracle(out[t], params)
    return out


def run_exact(params: MapParams, model: NoiseModel, initial, t_max: int, observables=DEFAULT_OBSERVABLES,
              cap: int = EXACT_CAP, ideal: np.ndarray | None = None, sequence=None) -> RunRecord:
    """Evolve a density matrix with the exact damping channel after every gate.

    ``initial`` is a state vector or a density matrix. Fidelity needs a pure
    reference: the initial state vector, or ``ideal`` when starting from a
    density matrix. ``sequence`` replaces the default gate sequence.
    """
    if params.N > cap:
        raise ValueError(f"exact engine limited to N <= {cap}, got N = {params.N} (n_q = {params.n_q})")
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    _check_observables(observables, TRAJECTORY_ONLY)
    initial = np.asarray(initial, dtype=np.complex128)
    if initial.ndim == 1:
        if initial.shape[0] != params.N:
            raise ValueError(f"initial state has dimension {initial.shape[0]}, expected {params.N}")
        rho = projector(initial)
        ideal = initial if ideal is None else ideal
    else:
        if initial.shape != (params.N, params.N):
            raise ValueError(f"initial density matrix has shape {initial.shape}, expected {(params.N, params.N)}")
        check_density(initial)
        rho = initial.copy()
    if "fidelity" in observables and ideal is None:
        raise ValueError("fidelity requires a pure reference state")
    reference = ideal_states(params, np.asarray(ideal, dtype=np.complex128), t_max) if "fidelity" in observables else None

    seq = build_map_sequence(params) if sequence is None else sequence
    p = model.p_jump
    series = {name: [] for name in observables}

    def record(t, rho):
        for name in observables:
            if name == "W":
                series[name].append(momentum_distribution(rho))
            elif name == "ipr":
                w = momentum_distribution(rho)
                series[name].append(1.0 / np.sum(w * w))
            elif name == "fidelity":
                series[name].append(fidelity(reference[t], rho))
            elif name == "purity":
                series[name].append(float(np.real(np.vdot(rho, rho))))
            elif name == "rho":
                series[name].append(rho.copy())

    record(0, rho)
    for t in range(1, t_max + 1):
        for op in seq.compiled:
            rho = conjugate_density(rho, op)
            if p > 0:
                damp_density_all(rho, p)
        # conjugation drifts Hermiticity at the rounding level only
        rho = 0.5 * (rho + rho.conj().T)
        record(t, rho)
    snapshots = {name: np.asarray(values) for name, values in series.items()}
    return RunRecord(params, model.gamma, "exact", t_max, snapshots, final=rho)


def trajectory_generator(master_seed: int, index: int) -> np.random.Generator:
    """Private random stream of trajectory ``index``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(index,))))


def _run_block(indices, params, seq, damping, psi0, reference, t_max, master_seed, observables,
               husimi_grid, husimi_times):
    n_q, N, n_g = params.n_q, params.N, len(seq)
    B = len(indices)
    rngs = [trajectory_generator(master_seed, a) for a in indices]
    states = np.tile(np.asarray(psi0, dtype=np.complex128), (B, 1))
    sums = {name: [] for name in observables if name != "husimi"}
    husimi = {}

    def record(t):
        probs = None
        if "W" in sums or "ipr" in sums:
            probs = (states.real**2 + states.imag**2).sum(axis=0)
            if "W" in sums:
                sums["W"].append(probs)
            if "ipr" in sums:
                sums["ipr"].append(probs)
        if "fidelity" in sums:
            ov = states @ reference[t].conj()
            sums["fidelity"].append((ov.real**2 + ov.imag**2).sum())
        if husimi_grid is not None and t in husimi_times:
            husimi[t] = husimi_grid.raw(states)

    global_phase = np.exp(1j * seq.phase)
    record(0)
    for t in range(1, t_max + 1):
        if damping is not None:
            draws = np.stack([g.random((n_g, n_q)) for g in rngs])
        for i, op in enumerate(seq.compiled):
            states = _act(states, op)
            if damping is not None:
                states = damping(states, draws[:, i, :])
        states *= global_phase
        record(t)
    return sums, husimi, states


def run_trajectories(params: MapParams, model: NoiseModel, psi0: np.ndarray, t_max: int, M: int,
                     master_seed: int, observables=DEFAULT_OBSERVABLES, threads: int | None = None,
                     block_size: int = 32, husimi_times=(), husimi_shape=None, sequence=None) -> RunRecord:
    """Average ``M`` quantum-jump trajectories started from ``psi0``.

    ``husimi_times`` lists the iterations at which an ensemble Husimi
    distribution is stored (grid ``husimi_shape = (n_n, n_theta)``, default
    ``(N, 2N)``); add ``"husimi"`` to ``observables`` to enable them.
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    _check_observables(observables, EXACT_ONLY)
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.shape != (params.N,):
        raise ValueError(f"initial state has shape {psi0.shape}, expected {(params.N,)}")
    if abs(np.vdot(psi0, psi0).real - 1.0) > 1e-10:
        raise ValueError("initial state is not normalised")
    master_seed = int(master_seed)

    seq = build_map_sequence(params) if sequence is None else sequence
    damping = None if model.is_noiseless else DampingRound(params.n_q, model.p_jump)
    reference = ideal_states(params, psi0, t_max) if "fidelity" in observables else None
    husimi_grid = None
    husimi_times = frozenset(int(t) for t in husimi_times)
    if "husimi" in observables and husimi_times:
        n_n, n_theta = husimi_shape if husimi_shape is not None else (params.N, 2 * params.N)
        husimi_grid = HusimiGrid(params.N, n_theta, n_n, params.T)

    blocks = [range(s, min(s + block_size, M)) for s in range(0, M, block_size)]
    threads = threads or os.cpu_count() or 1

    def work(indices):
        return _run_block(indices, params, seq, damping, psi0, reference, t_max, master_seed,
                          observables, husimi_grid, husimi_times)

    if threads == 1 or len(blocks) == 1:
        results = [work(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, blocks))

    snapshots = {}
    for name in observables:
        if name == "husimi":
            continue
        total = results[0][0][name]
        total = [np.array(x, copy=True) for x in total]
        for block_sums, _, _ in results[1:]:
            for t, x in enumerate(block_sums[name]):
                total[t] = total[t] + x
        values = np.asarray(total) / M
        if name == "W":
            values = values[:, np.fft.fftshift(np.arange(params.N))]
        elif name == "ipr":
            values = 1.0 / np.sum(values * values, axis=1)
        snapshots[name] = values

    husimi = {}
    if husimi_grid is not None:
        for t in sorted(husimi_times):
            if t > t_max:
                continue
            raw = results[0][1][t].copy()
            for _, block_h, _ in results[1:]:
                raw = raw + block_h[t]
            husimi[t] = husimi_grid.distribution(raw, count=M)

    members = np.concatenate([states for _, _, states in results], axis=0)
    final = TrajectoryEnsemble(members, master_seed)
    return RunRecord(params, model.gamma, M, t_max, snapshots, husimi, final)


def reconstruct_density(ensemble) -> np.ndarray:
    """``(1/M) sum_a |psi_a><psi_a|``."""
    kind, members = _members(ensemble)
    if kind != "states":
        raise ValueError("expected a trajectory ensemble")
    if members.shape[0] == 0:
        raise ValueError("empty ensemble")
    M = members.shape[0]
    rho = members.T @ members.conj() / M
    return 0.5 * (rho + rho.conj().T)
