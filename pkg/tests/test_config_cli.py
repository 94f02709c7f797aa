import math
import os
import subprocess
import sys

import numpy as np
import pytest

from qsawtooth.cli import main
from qsawtooth.config import ConfigError, ExperimentConfig, eval_real, load_config, parse_config
from qsawtooth.observables import husimi
from qsawtooth.output import read_grid, read_table, write_grid, write_table
from qsawtooth.presets import PRESETS, catalogue, get_preset
from qsawtooth.runner import OUT_ENV, run_config
from qsawtooth.state import basis_state

SMALL = """\
name = small
engine = trajectories
n_q = 3
k = sqrt3
K = sqrt2
gamma = 0.01
M = 8
t_max = 4
seed = 5
wn_times = 0, 4
husimi_windows = 2:4
"""


@pytest.mark.parametrize("text,value", [("1", 1.0), ("sqrt2", math.sqrt(2)), ("2*pi/64", 2 * math.pi / 64),
                                        ("-0.5", -0.5), ("sqrt(3)", math.sqrt(3)), ("2.5e-4", 2.5e-4)])
def test_eval_real(text, value):
    assert eval_real(text) == value


@pytest.mark.parametrize("text", ["__import__('os')", "1/0", "x", "1e400", "[1]", "pi if 1 else 2"])
def test_eval_real_rejects(text):
    with pytest.raises(ValueError):
        eval_real(text)


def test_parse_full_precision():
    cfg = parse_config(SMALL)
    assert cfg.k == math.sqrt(3) and cfg.K == math.sqrt(2)
    assert cfg.wn_times == (0, 4) and cfg.husimi_windows == ((2, 4),)


@pytest.mark.parametrize(
    "text,key",
    [
        ("n_q = 6\nK = 1\ngama = 0.1\n", "gama"),
        ("n_q = 6\nK = 1\nK = 2\n", "K"),
        ("K = 1\n", "n_q"),
        ("n_q = six\nK = 1\n", "n_q"),
        ("n_q = 6\nK = 1\nengine = magic\n", "engine"),
        ("n_q = 9\nK = 1\nengine = exact\n", "n_q"),
        ("n_q = 6\nK = 1\ngamma = -1\n", "gamma"),
        ("n_q = 6\nK = 1\nhusimi_windows = 5:2\n", "husimi_windows"),
        ("n_q = 6\nK = 1\nobservables = entropy\n", "observables"),
        ("n_q = 6\nK = 1\njunk line\n", "line 3"),
    ],
)
def test_fail_closed(text, key):
    with pytest.raises(ConfigError, match=key):
        parse_config(text)


def test_config_text_round_trip():
    cfg = parse_config(SMALL)
    assert parse_config(cfg.to_text()) == cfg
    for preset in PRESETS.values():
        for c in preset.configs:
            assert parse_config(c.to_text()) == c


def test_initial_state_forms():
    assert ExperimentConfig(n_q=8, K=1.0, initial_fraction=0.1).initial_momentum == 26
    assert ExperimentConfig(n_q=8, K=1.0, initial_n=60).initial_momentum == 60
    with pytest.raises(ConfigError):
        ExperimentConfig(n_q=8, K=1.0, initial_n=1, initial_fraction=0.1)
    with pytest.raises(ConfigError):
        ExperimentConfig(n_q=3, K=1.0, initial_n=4).initial_momentum


def test_table_round_trip(tmp_path):
    cfg = parse_config(SMALL)
    cols = {"t": np.arange(3), "f": np.array([1.0, 0.9, 1 / 3])}
    path = write_table(tmp_path / "x.csv", cols, cfg)
    back, back_cfg, meta = read_table(path)
    assert back_cfg == cfg
    assert meta["version"].startswith("qsawtooth v")
    np.testing.assert_array_equal(back["f"], cols["f"])


def test_grid_round_trip(tmp_path):
    cfg = parse_config(SMALL)
    dist = husimi(basis_state(8, 1))
    path = write_grid(tmp_path / "g.bin", dist, cfg, window=(2, 4))
    grid, meta, back_cfg = read_grid(path)
    np.testing.assert_array_equal(grid, dist.grid)
    assert back_cfg == cfg
    assert (int(meta["rows"]), int(meta["cols"])) == dist.shape
    assert float(meta["n_min"]) == -4.0 and meta["window"] == "2:4"


def test_run_writes_reparseable_outputs(tmp_path):
    cfg = parse_config(SMALL)
    result = run_config(cfg, tmp_path)
    names = sorted(p.name for p in result.paths)
    assert names == ["small_husimi_2-4.bin", "small_series.csv", "small_wn.csv"]
    for path in result.paths:
        reader = read_grid if path.suffix == ".bin" else read_table
        out = reader(path)
        assert (out[2] if path.suffix == ".bin" else out[1]) == cfg
    assert "ipr_final=" in result.summary and "M=8 seed=5" in result.summary


def test_same_seed_gives_byte_identical_files(tmp_path):
    cfg = parse_config(SMALL)
    a = run_config(cfg, tmp_path / "a")
    b = run_config(cfg.with_(threads=3), tmp_path / "b")
    for pa in a.paths:
        pb = tmp_path / "b" / pa.name
        if pa.suffix == ".bin":
            # the header records the thread count; the payload must match exactly
            assert read_grid(pa)[0].tobytes() == read_grid(pb)[0].tobytes()
    c = run_config(cfg, tmp_path / "c")
    for pa in a.paths:
        assert pa.read_bytes() == (tmp_path / "c" / pa.name).read_bytes()
    assert c.summary == a.summary


def test_exact_and_classical_engines_run(tmp_path):
    exact = run_config(parse_config("engine = exact\nn_q = 3\nK = 0.5\ngamma = 0.01\nt_max = 3\n"
                                    "observables = fidelity, purity\n"), tmp_path)
    cols, _, _ = read_table(exact.paths[0])
    assert set(cols) == {"t", "fidelity", "purity"}
    classical = run_config(parse_config("name = c\nengine = classical\nn_q = 5\nK = -0.5\nt_max = 9\n"
                                        "initial_fraction = 0.1\nhusimi_windows = 0:9\nn_pts = 2000\n"), tmp_path)
    grid, meta, _ = read_grid(classical.paths[0])
    assert meta["kind"] == "classical" and grid.shape == (32, 64)


def test_catalogue_contents():
    text = catalogue()
    assert len(PRESETS) >= 6
    for name in ("fig1", "fig2", "fig3", "fig3-inset", "fig4", "fig5", "fig6"):
        assert name in PRESETS and name in text
    fig6 = get_preset("fig6")
    assert {c.gamma for c in fig6.configs} == {0.01, 0.05, 0.1}
    assert all(c.K == 1.0 and c.n_q == 8 for c in fig6.configs)
    assert 60 in {c.initial_n for c in fig6.configs}
    fig4 = get_preset("fig4")
    noisy = [c for c in fig4.configs if c.gamma > 0]
    assert all(c.k == math.sqrt(3) and c.K == math.sqrt(2) and c.gamma == 1e-3 and c.M == 50 for c in noisy)
    with pytest.raises(KeyError):
        get_preset("fig9")


def test_seed_override_keeps_offsets():
    fig6 = get_preset("fig6").with_overrides(seed=10, threads=2)
    seeds = {c.name: c.seed for c in fig6.configs}
    assert seeds["fig6-g0.1-n60"] == 10 and seeds["fig6-g0.1-n0"] == 11
    assert all(c.threads == 2 for c in fig6.configs)


def test_cli_run_and_errors(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL)
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 0
    assert "small: engine=trajectories" in capsys.readouterr().out
    bad = tmp_path / "bad.cfg"
    bad.write_text("n_q = 4\nK = 1\ngama = 0.1\n")
    assert main(["run", str(bad)]) == 2
    assert "gama" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1
    assert main(["list-presets"]) == 0
    assert "fig6" in capsys.readouterr().out
    assert load_config(cfg) == parse_config(SMALL)


def test_cli_env_out_dir(tmp_path, monkeypatch):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL)
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert main(["run", str(cfg)]) == 0
    assert (tmp_path / "env" / "small_series.csv").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qsawtooth", "list-presets"], capture_output=True, text=True,
                          env={**os.environ, OUT_ENV: str(tmp_path)})
    assert proc.returncode == 0 and "fig1" in proc.stdout
