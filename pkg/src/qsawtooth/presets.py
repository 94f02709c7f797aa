"""Preset experiments, one per figure, with their combined reports."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .config import ExperimentConfig
from .observables import ipr_ratio
from .output import write_table
from .runner import RunResult, finite_or_nan

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
C_DECAY = 0.08
WINDOWS = ((0, 9), (40, 49), (90, 99))


@dataclass(frozen=True)
class Preset:
    name: str
    figure: str
    description: str
    configs: tuple
    report: Callable

    def with_overrides(self, seed=None, threads=None) -> "Preset":
        """Rebase seeds (each config keeps its offset from 0) and set the thread count."""
        if seed is None and threads is None:
            return self
        configs = []
        for c in self.configs:
            changes = {}
            if seed is not None:
                changes["seed"] = int(seed) + c.seed
            if threads is not None:
                changes["threads"] = int(threads)
            configs.append(c.with_(**changes))
        configs = tuple(configs)
        return Preset(self.name, self.figure, self.description, configs, self.report)


def _by_name(results):
    return {r.config.name: r for r in results}


def _report_fig1(results, out_dir, plot):
    runs = _by_name(results)
    exact = runs["fig1-exact"].record
    N = exact.params.N
    columns = {"n": np.arange(-(N // 2), N // 2), "exact": exact.snapshots["W"][-1]}
    lines = [f"exact: ipr={exact.snapshots['ipr'][-1]:.6g}"]
    for M in (20, 50, 200, 1000):
        rec = runs[f"fig1-M{M}"].record
        w = rec.snapshots["W"][-1]
        columns[f"M{M}"] = w
        lines.append(f"M={M}: L1 to exact={np.abs(w - columns['exact']).sum():.4g} ipr={rec.snapshots['ipr'][-1]:.6g}")
    paths = [write_table(Path(out_dir) / "fig1_wn.csv", columns)]
    if plot:
        from .plotting import plot_distributions

        paths.append(plot_distributions(Path(out_dir) / "fig1.png", columns))
    return paths, lines


def _report_fig2(results, out_dir, plot):
    runs = _by_name(results)
    classical, ideal = runs["fig2-classical"], runs["fig2-ideal"]
    rows = {"window_lo": [], "window_hi": [], "corr_classical_ideal": []}
    lines = []
    for w in WINDOWS:
        corr = classical.grids[w].correlation(ideal.grids[w])
        rows["window_lo"].append(w[0])
        rows["window_hi"].append(w[1])
        rows["corr_classical_ideal"].append(corr)
        lines.append(f"t in [{w[0]},{w[1]}]: corr(classical, gamma=0 Husimi)={corr:.4f}")
    for name in ("fig2-ideal", "fig2-gamma", "fig2-nq10"):
        rows[f"mean_abs_n_{name}"] = [runs[name].grids[w].mean_abs_n() for w in WINDOWS]
    paths = [write_table(Path(out_dir) / "fig2_summary.csv", rows)]
    if plot:
        from .plotting import plot_panels

        panel_rows = [[runs[name].grids[w] for w in WINDOWS]
                      for name in ("fig2-classical", "fig2-ideal", "fig2-gamma", "fig2-nq10")]
        paths.append(plot_panels(Path(out_dir) / "fig2.png", panel_rows))
    return paths, lines


def _report_fig3(results, out_dir, plot):
    columns = {"t": np.arange(results[0].record.t_max + 1)}
    lines = []
    for r in results:
        columns[r.config.name] = r.record.snapshots["fidelity"]
        fit = r.gamma_fit
        lines.append(f"{r.config.name}: gamma_fit={finite_or_nan(fit and fit[0]):.5g}")
    paths = [write_table(Path(out_dir) / "fig3_fidelity.csv", columns)]
    if plot:
        from .plotting import plot_series

        paths.append(plot_series(Path(out_dir) / "fig3.png", columns, ylabel="fidelity f", logy=True))
    return paths, lines


def decay_table(results):
    """Rows ``(n_q, K, gamma, gamma_eff, gamma_fit, stderr)``; failed fits give NaN."""
    rows = {k: [] for k in ("n_q", "K", "gamma", "gamma_eff", "gamma_fit", "stderr")}
    for r in results:
        c, params = r.config, r.record.params
        rows["n_q"].append(c.n_q)
        rows["K"].append(c.K)
        rows["gamma"].append(c.gamma)
        rows["gamma_eff"].append(c.n_q * params.n_gates * c.gamma)
        g, se = r.gamma_fit if r.gamma_fit is not None else (math.nan, math.nan)
        rows["gamma_fit"].append(g)
        rows["stderr"].append(se)
    return {k: np.asarray(v) for k, v in rows.items()}


def proportional_slope(x, y) -> tuple[float, float]:
    """Slope of ``y = C x`` through the origin and the fit's R^2 (about zero)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size == 0:
        return math.nan, math.nan
    slope = float(x @ y / (x @ x))
    resid = y - slope * x
    r2 = 1.0 - float(resid @ resid) / float(y @ y)
    return slope, r2


def _report_fig3_inset(results, out_dir, plot):
    table = decay_table(results)
    lines = []
    for K in (-0.5, 0.5):
        sel = np.isclose(table["K"], K)
        slope, r2 = proportional_slope(table["gamma_eff"][sel], table["gamma_fit"][sel])
        failed = int(np.sum(~np.isfinite(table["gamma_fit"][sel])))
        lines.append(f"K={K:+g}: C={slope:.4g} R^2={r2:.4f} (failed fits: {failed}; reference C={C_DECAY})")
    paths = [write_table(Path(out_dir) / "fig3_inset.csv", table)]
    if plot:
        from .plotting import plot_decay_law

        paths.append(plot_decay_law(Path(out_dir) / "fig3_inset.png", table, C_DECAY))
    return paths, lines


def _report_fig4(results, out_dir, plot):
    columns = {"t": np.arange(results[0].record.t_max + 1)}
    lines = []
    for r in results:
        xi = r.record.snapshots["ipr"]
        columns[r.config.name] = xi
        lines.append(f"{r.config.name}: mean ipr over t in [80,100] = {np.mean(xi[80:101]):.5g}")
    paths = [write_table(Path(out_dir) / "fig4_ipr.csv", columns)]
    if plot:
        from .plotting import plot_series

        paths.append(plot_series(Path(out_dir) / "fig4.png", columns, ylabel="IPR"))
    return paths, lines


def _report_fig5(results, out_dir, plot):
    runs = _by_name(results)
    rows = {"n_q": [], "gamma": [], "ratio": []}
    for r in results:
        if r.config.gamma == 0:
            continue
        ideal = runs[f"fig5-nq{r.config.n_q}-ideal"].record
        rows["n_q"].append(r.config.n_q)
        rows["gamma"].append(r.config.gamma)
        rows["ratio"].append(ipr_ratio(r.record, ideal, (30, 40)))
    table = {k: np.asarray(v) for k, v in rows.items()}
    lines = [f"n_q={int(n)} gamma={g:g}: xi/xi0={x:.4g}" for n, g, x in zip(*table.values())]
    paths = [write_table(Path(out_dir) / "fig5_ratio.csv", table)]
    if plot:
        from .plotting import plot_ratio

        paths.append(plot_ratio(Path(out_dir) / "fig5.png", table))
    return paths, lines


def _report_fig6(results, out_dir, plot):
    runs = _by_name(results)
    rows = {"gamma": [], "mean_abs_n_n60": [], "mean_abs_n_n0": [], "l1_between_initial_states": []}
    lines = []
    late = WINDOWS[-1]
    for g in FIG6_GAMMAS:
        a = runs[f"fig6-g{g:g}-n60"].grids[late]
        b = runs[f"fig6-g{g:g}-n0"].grids[late]
        rows["gamma"].append(g)
        rows["mean_abs_n_n60"].append(a.mean_abs_n())
        rows["mean_abs_n_n0"].append(b.mean_abs_n())
        rows["l1_between_initial_states"].append(a.l1(b))
        lines.append(f"gamma={g:g}: <|n|> = {a.mean_abs_n():.4g} (n0=60), {b.mean_abs_n():.4g} (n0=0); L1={a.l1(b):.4g}")
    paths = [write_table(Path(out_dir) / "fig6_summary.csv", rows)]
    if plot:
        from .plotting import plot_panels

        panel_rows = [[runs[f"fig6-g{g:g}-n60"].grids[w] for w in WINDOWS] for g in FIG6_GAMMAS]
        panel_rows.append([runs[f"fig6-g{g:g}-n0"].grids[late] for g in FIG6_GAMMAS])
        paths.append(plot_panels(Path(out_dir) / "fig6.png", panel_rows))
    return paths, lines


FIG6_GAMMAS = (0.01, 0.05, 0.1)
FIG5_GAMMAS = (1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.2)
SWEEP_GAMMAS = (2.5e-4, 5e-4, 1e-3)


def _fig1():
    base = dict(n_q=6, k=SQRT3, K=SQRT2, gamma=1e-3, t_max=30, initial_n=0, observables=("ipr", "W"))
    configs = [ExperimentConfig(name="fig1-exact", engine="exact", **base)]
    configs += [ExperimentConfig(name=f"fig1-M{M}", engine="trajectories", M=M, **base) for M in (20, 50, 200, 1000)]
    return Preset("fig1", "Fig. 1", "momentum distribution W_n at t=30, exact engine vs M = 20, 50, 200, 1000 trajectories",
                  tuple(configs), _report_fig1)


def _fig2():
    base = dict(K=-0.5, t_max=99, initial_fraction=0.1, husimi_windows=WINDOWS, observables=("ipr",))
    configs = (
        ExperimentConfig(name="fig2-classical", engine="classical", n_q=8, **base),
        ExperimentConfig(name="fig2-ideal", engine="trajectories", n_q=8, gamma=0.0, M=1, **base),
        ExperimentConfig(name="fig2-gamma", engine="trajectories", n_q=8, gamma=5e-4, M=50, **base),
        ExperimentConfig(name="fig2-nq10", engine="trajectories", n_q=10, gamma=5e-4, M=50, grid_n=256,
                         grid_theta=512, **base),
    )
    return Preset("fig2", "Fig. 2", "smoothed classical density and Husimi distributions, K=-0.5, one cell, "
                  "gamma in {0, 5e-4}, n_q in {8, 10}", configs, _report_fig2)


def _fig3():
    configs = tuple(
        ExperimentConfig(name=f"fig3-K{K:+g}-g{g:g}", engine="trajectories", n_q=8, K=K, gamma=g, M=50, t_max=100,
                         initial_n=0, observables=("fidelity",))
        for g in (5e-4, 1e-3) for K in (-0.5, 0.5)
    )
    return Preset("fig3", "Fig. 3", "fidelity f(t), n_q=8, M=50, K=+-0.5, gamma in {5e-4, 1e-3}", configs, _report_fig3)


def _fig3_inset():
    configs = tuple(
        ExperimentConfig(name=f"fig3i-nq{n}-K{K:+g}-g{g:g}", engine="trajectories", n_q=n, K=K, gamma=g, M=50,
                         t_max=50, initial_n=0, observables=("fidelity",))
        for n in (4, 6, 8) for K in (-0.5, 0.5) for g in SWEEP_GAMMAS
    )
    return Preset("fig3-inset", "Fig. 3 inset", "fitted decay rate vs gamma_eff = n_q n_g gamma, n_q in {4,6,8}, "
                  "K=+-0.5, gamma in {2.5e-4, 5e-4, 1e-3}, M=50", configs, _report_fig3_inset)


def _fig4():
    configs = []
    for n in (4, 6, 8):
        base = dict(engine="trajectories", n_q=n, k=SQRT3, K=SQRT2, t_max=100, initial_n=0, observables=("ipr",))
        configs.append(ExperimentConfig(name=f"fig4-nq{n}-g0.001", gamma=1e-3, M=50, **base))
        configs.append(ExperimentConfig(name=f"fig4-nq{n}-ideal", gamma=0.0, M=1, **base))
    return Preset("fig4", "Fig. 4", "IPR xi(t), k=sqrt3, K=sqrt2, gamma in {0, 1e-3}, M=50, n_q in {4,6,8}",
                  tuple(configs), _report_fig4)


def _fig5():
    configs = []
    for n in (4, 6, 8):
        base = dict(engine="trajectories", n_q=n, k=SQRT3, K=SQRT2, t_max=40, initial_n=0, observables=("ipr",))
        configs.append(ExperimentConfig(name=f"fig5-nq{n}-ideal", gamma=0.0, M=1, **base))
        configs += [ExperimentConfig(name=f"fig5-nq{n}-g{g:g}", gamma=g, M=50, **base) for g in FIG5_GAMMAS]
    return Preset("fig5", "Fig. 5", "xi/xi0 averaged over 30 <= t <= 40 vs gamma, n_q in {4,6,8}, M=50",
                  tuple(configs), _report_fig5)


def _fig6():
    configs = []
    for g in FIG6_GAMMAS:
        base = dict(engine="trajectories", n_q=8, K=1.0, gamma=g, M=50, t_max=99, observables=("ipr",))
        configs.append(ExperimentConfig(name=f"fig6-g{g:g}-n60", initial_n=60, husimi_windows=WINDOWS, **base))
        # a separate stream; shared draws would synchronise the two ensembles
        configs.append(ExperimentConfig(name=f"fig6-g{g:g}-n0", initial_n=0, husimi_windows=(WINDOWS[-1],), seed=1,
                                        **base))
    return Preset("fig6", "Fig. 6", "Husimi attractors, K=1, n_q=8, M=50, gamma in {0.01, 0.05, 0.1}, "
                  "initial n=60 and n=0", tuple(configs), _report_fig6)


PRESETS = {p.name: p for p in (_fig1(), _fig2(), _fig3(), _fig3_inset(), _fig4(), _fig5(), _fig6())}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def catalogue() -> str:
    """Human-readable listing of every preset and its full parameter sets."""
    out = []
    for p in PRESETS.values():
        out.append(f"{p.name}  [{p.figure}]  {p.description}")
        for c in p.configs:
            out.append(f"  - {c.name}")
            out += [f"      {line}" for line in c.to_lines() if not line.startswith("name =")]
    return "\n".join(out)


def run_preset(preset: Preset, out_dir, plot: bool = False, log=print) -> tuple[list[RunResult], list[Path]]:
    from .runner import run_config

    out_dir = Path(out_dir)
    results, paths = [], []
    for config in preset.configs:
        result = run_config(config, out_dir)
        log(result.summary)
        results.append(result)
        paths += result.paths
    report_paths, lines = preset.report(results, out_dir, plot)
    for line in lines:
        log(f"{preset.name}: {line}")
    return results, paths + list(report_paths)
