"""Output files.

Every file starts with ``#``-prefixed header lines: a format tag, the
package version and the full run configuration between ``# config:`` and
``# end config``. Tables follow as comma-separated text. Phase-space grids
(``.bin``) continue the header with ``# end`` and then hold the grid as
row-major little-endian float64, rows indexing momentum and columns angle.
"""

from __future__ import annotations

import io as _io
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, parse_config

VERSION_STRING = f"qsawtooth v{__version__}"
TABLE_TAG = "qsawtooth table v1"
GRID_TAG = "qsawtooth grid v1"


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def header_lines(tag: str, config: ExperimentConfig | None, extra=()) -> list[str]:
    lines = [f"# {tag}", f"# version = {VERSION_STRING}"]
    lines += [f"# {key} = {value}" for key, value in extra]
    if config is not None:
        lines.append("# config:")
        lines += [f"# {line}" for line in config.to_lines()]
        lines.append("# end config")
    return lines


def write_table(path, columns: dict, config: ExperimentConfig | None = None, extra=()) -> Path:
    """Write equal-length columns as CSV below a header."""
    path = Path(path)
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    lengths = {a.shape[0] for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"columns differ in length: {sorted(lengths)}")
    buf = _io.StringIO()
    for line in header_lines(TABLE_TAG, config, extra):
        buf.write(line + "\n")
    buf.write(",".join(names) + "\n")
    for row in zip(*arrays):
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _split_header(lines):
    meta, config_lines, in_config = {}, [], False
    for line in lines:
        body = line[1:].strip()
        if body == "config:":
            in_config = True
        elif body == "end config":
            in_config = False
        elif in_config:
            config_lines.append(body)
        elif " = " in body:
            key, value = body.split(" = ", 1)
            meta[key] = value
    config = parse_config("\n".join(config_lines)) if config_lines else None
    return meta, config


def read_table(path):
    """Return ``(columns, config, meta)`` from a file written by :func:`write_table`."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    header = [line for line in text if line.startswith("#")]
    body = [line for line in text if not line.startswith("#")]
    meta, config = _split_header(header)
    names = body[0].split(",")
    data = np.array([[float(x) for x in row.split(",")] for row in body[1:]]) if len(body) > 1 else np.empty((0, len(names)))
    columns = {name: data[:, i] for i, name in enumerate(names)}
    return columns, config, meta


def write_grid(path, dist, config: ExperimentConfig | None = None, kind: str = "husimi", window=None) -> Path:
    """Write a :class:`PhaseSpaceDistribution` as text header plus float64 block."""
    path = Path(path)
    grid = np.ascontiguousarray(dist.grid, dtype="<f8")
    rows, cols = grid.shape
    extra = [
        ("kind", kind),
        ("rows", rows),
        ("cols", cols),
        ("n_min", _fmt(dist.n[0])),
        ("n_step", _fmt(dist.n[1] - dist.n[0]) if rows > 1 else "1"),
        ("theta_min", _fmt(dist.theta[0])),
        ("theta_step", _fmt(dist.theta[1] - dist.theta[0]) if cols > 1 else "0"),
        ("sigma_n", _fmt(dist.sigma_n)),
        ("sigma_theta", _fmt(dist.sigma_theta)),
        ("unnormalized_mass", _fmt(dist.mass)),
    ]
    if window is not None:
        extra.append(("window", f"{window[0]}:{window[1]}"))
    extra += [("dtype", "<f8"), ("layout", "row-major; rows = momentum n, cols = theta")]
    lines = header_lines(GRID_TAG, config, extra) + ["# end"]
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("utf-8"))
        fh.write(grid.tobytes(order="C"))
    return path


def read_grid(path):
    """Return ``(grid, meta, config)`` from a file written by :func:`write_grid`."""
    raw = Path(path).read_bytes()
    marker = b"\n# end\n"
    cut = raw.index(marker) + len(marker)
    header = raw[:cut].decode("utf-8").splitlines()
    meta, config = _split_header([h for h in header if h.startswith("#") and h != "# end"])
    rows, cols = int(meta["rows"]), int(meta["cols"])
    grid = np.frombuffer(raw[cut:], dtype="<f8")
    if grid.size != rows * cols:
        raise ValueError(f"grid payload has {grid.size} values, header says {rows} x {cols}")
    return grid.reshape(rows, cols), meta, config
