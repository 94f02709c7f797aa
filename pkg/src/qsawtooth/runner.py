"""Execute an :class:`ExperimentConfig` and write its output files."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classical import classical_density
from .config import ExperimentConfig
from .engines import run_exact, run_trajectories
from .noise import NoiseModel
from .observables import fit_decay_rate
from .output import write_grid, write_table
from .state import MapParams, basis_state, make_params

OUT_ENV = "QSAWTOOTH_OUT"


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "."))


def build_params(config: ExperimentConfig) -> MapParams:
    return make_params(config.n_q, config.K, k=config.k, L=config.L)


@dataclass
class RunResult:
    config: ExperimentConfig
    record: object = None
    grids: dict = field(default_factory=dict)
    paths: list = field(default_factory=list)
    summary: str = ""
    gamma_fit: tuple | None = None


def _husimi_times(windows):
    times = set()
    for lo, hi in windows:
        times.update(range(lo, hi + 1))
    return sorted(times)


def execute(config: ExperimentConfig) -> RunResult:
    """Run without writing anything."""
    params = build_params(config)
    result = RunResult(config)
    if config.engine == "classical":
        shape = (config.grid_n or params.N, config.grid_theta or 2 * params.N)
        p0 = params.T * config.initial_momentum
        for window in config.husimi_windows:
            result.grids[window] = classical_density(config.K, params.N, p0, config.n_pts, window, config.L, shape)
        return result

    model = NoiseModel(config.gamma)
    psi0 = basis_state(params, config.initial_momentum)
    wanted = set(config.observables) | ({"W"} if config.wn_times else set())
    if config.engine == "exact":
        observables = tuple(o for o in ("W", "fidelity", "ipr", "purity") if o in wanted)
        record = run_exact(params, model, psi0, config.t_max, observables, cap=config.exact_cap)
    else:
        observables = tuple(o for o in ("W", "fidelity", "ipr") if o in wanted)
        if "purity" in wanted:
            raise ValueError("observables: purity is only available from the exact engine")
        if config.husimi_windows:
            observables += ("husimi",)
        shape = None
        if config.grid_n or config.grid_theta:
            shape = (config.grid_n or params.N, config.grid_theta or 2 * params.N)
        record = run_trajectories(params, model, psi0, config.t_max, config.M, config.seed, observables,
                                  threads=config.threads or None, husimi_times=_husimi_times(config.husimi_windows),
                                  husimi_shape=shape)
        for window in config.husimi_windows:
            result.grids[window] = record.husimi_average(window)
    result.record = record
    if "fidelity" in record.snapshots and config.gamma > 0:
        try:
            result.gamma_fit = fit_decay_rate(record.snapshots["fidelity"], config.fit_window)
        except ValueError:
            result.gamma_fit = None
    return result


def write_outputs(result: RunResult, out_dir) -> list[Path]:
    config = result.config
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    record = result.record
    if record is not None:
        scalars = [o for o in ("fidelity", "ipr", "purity") if o in record.snapshots]
        if scalars:
            columns = {"t": np.arange(record.t_max + 1)}
            columns.update({name: record.snapshots[name] for name in scalars})
            paths.append(write_table(out / f"{config.name}_series.csv", columns, config))
        if "W" in record.snapshots:
            times = config.wn_times or (config.t_max,)
            N = record.params.N
            columns = {"n": np.arange(-(N // 2), N // 2)}
            columns.update({f"W_t{t}": record.snapshots["W"][t] for t in times})
            paths.append(write_table(out / f"{config.name}_wn.csv", columns, config))
    kind = "classical" if config.engine == "classical" else "husimi"
    for window, dist in result.grids.items():
        paths.append(write_grid(out / f"{config.name}_{kind}_{window[0]}-{window[1]}.bin", dist, config, kind, window))
    result.paths = paths
    return paths


def summarize(result: RunResult) -> str:
    c = result.config
    parts = [f"{c.name}: engine={c.engine} n_q={c.n_q} N={c.N} K={c.K:.6g} gamma={c.gamma:g}"]
    if c.engine == "trajectories":
        parts.append(f"M={c.M} seed={c.seed}")
    parts.append(f"t_max={c.t_max}")
    record = result.record
    if record is not None:
        if "ipr" in record.snapshots:
            parts.append(f"ipr_final={record.snapshots['ipr'][-1]:.6g}")
        if "fidelity" in record.snapshots:
            parts.append(f"fidelity_final={record.snapshots['fidelity'][-1]:.6g}")
        if result.gamma_fit is not None:
            g, se = result.gamma_fit
            params = record.params
            g_eff = params.n_q * params.n_gates * c.gamma
            parts.append(f"gamma_fit={g:.6g}+-{se:.2g} C={g / g_eff:.4g}")
        elif "fidelity" in record.snapshots and c.gamma > 0:
            parts.append("gamma_fit=unavailable")
    for window, dist in result.grids.items():
        parts.append(f"mean|n|[{window[0]}:{window[1]}]={dist.mean_abs_n():.4g}")
    return " ".join(parts)


def run_config(config: ExperimentConfig, out_dir=None) -> RunResult:
    """Run ``config``, write its files under ``out_dir`` and fill in the summary line."""
    result = execute(config)
    write_outputs(result, default_out_dir() if out_dir is None else out_dir)
    result.summary = summarize(result)
    return result


def finite_or_nan(x) -> float:
    return float(x) if x is not None and math.isfinite(x) else float("nan")
