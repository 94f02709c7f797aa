"""Flat ``key = value`` experiment configuration.

Example::

    name = fig1-exact
    engine = exact
    n_q = 6
    k = sqrt3
    K = sqrt2
    gamma = 0.001
    t_max = 30

Real-valued keys accept arithmetic over numbers, ``pi``, ``sqrt2``,
``sqrt3`` and ``sqrt(...)``. Unknown or repeated keys are errors.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, fields, replace

ENGINES = ("exact", "trajectories", "classical")
SCALAR_OBSERVABLES = ("fidelity", "ipr", "purity")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key or line."""


_CONSTANTS = {"pi": math.pi, "sqrt2": math.sqrt(2.0), "sqrt3": math.sqrt(3.0), "e": math.e}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
           ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def eval_real(text: str) -> float:
    """Evaluate a restricted arithmetic expression to a float."""

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _CONSTANTS:
            return _CONSTANTS[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](walk(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt"
                and len(node.args) == 1 and not node.keywords):
            return math.sqrt(walk(node.args[0]))
        raise ValueError(f"unsupported expression element {ast.dump(node)}")

    try:
        value = walk(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"cannot evaluate {text!r}: {exc}") from None
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


def _parse_int(text):
    try:
        return int(text.strip())
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None


def _parse_window(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"expected a window 'a:b', got {text!r}")
    lo, hi = (_parse_int(x) for x in parts)
    if lo < 0 or hi < lo:
        raise ValueError(f"invalid window {text!r}")
    return (lo, hi)


def _split(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def _fmt_real(x):
    return repr(float(x))


def _fmt_window(w):
    return f"{w[0]}:{w[1]}"


# key -> (parse, format)
_CODECS = {
    "str": (lambda s: s.strip(), str),
    "int": (_parse_int, str),
    "real": (eval_real, _fmt_real),
    "names": (lambda s: tuple(_split(s)), ", ".join),
    "ints": (lambda s: tuple(_parse_int(x) for x in _split(s)), lambda v: ", ".join(map(str, v))),
    "window": (_parse_window, _fmt_window),
    "windows": (lambda s: tuple(_parse_window(x) for x in _split(s)), lambda v: ", ".join(map(_fmt_window, v))),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One run of one engine.

    Leave ``k`` unset for the one-cell torus (``T = 2 pi L / N``). The
    initial momentum eigenstate is ``initial_n``, or ``round(initial_fraction N)``.
    ``wn_times`` defaults to ``t_max``; ``threads = 0`` uses every core.
    """

    n_q: int
    K: float
    name: str = "run"
    engine: str = "trajectories"
    k: float | None = None
    L: int = 1
    gamma: float = 0.0
    M: int = 50
    t_max: int = 30
    seed: int = 0
    initial_n: int | None = None
    initial_fraction: float | None = None
    observables: tuple = ("fidelity", "ipr", "W")
    wn_times: tuple = ()
    husimi_windows: tuple = ()
    grid_n: int | None = None
    grid_theta: int | None = None
    fit_window: tuple = (1, 50)
    exact_cap: int = 256
    threads: int = 0
    n_pts: int = 20000

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigError(f"engine: expected one of {', '.join(ENGINES)}, got {self.engine!r}")
        if self.n_q < 2:
            raise ConfigError(f"n_q: must be >= 2, got {self.n_q}")
        if self.gamma < 0:
            raise ConfigError(f"gamma: must be >= 0, got {self.gamma}")
        if self.M < 1:
            raise ConfigError(f"M: must be >= 1, got {self.M}")
        if self.t_max < 0:
            raise ConfigError(f"t_max: must be >= 0, got {self.t_max}")
        if self.initial_n is not None and self.initial_fraction is not None:
            raise ConfigError("initial_n and initial_fraction are mutually exclusive")
        if self.engine == "exact" and (1 << self.n_q) > self.exact_cap:
            raise ConfigError(f"n_q: exact engine is capped at N <= {self.exact_cap}, got N = {1 << self.n_q}")
        known = set(SCALAR_OBSERVABLES) | {"W"}
        for name in self.observables:
            if name not in known:
                raise ConfigError(f"observables: unknown observable {name!r}")
        for lo, hi in self.husimi_windows:
            if hi > self.t_max:
                raise ConfigError(f"husimi_windows: window {lo}:{hi} exceeds t_max = {self.t_max}")
        for t in self.wn_times:
            if not 0 <= t <= self.t_max:
                raise ConfigError(f"wn_times: {t} outside 0..{self.t_max}")
        if self.threads < 0:
            raise ConfigError(f"threads: must be >= 0, got {self.threads}")

    @property
    def N(self) -> int:
        return 1 << self.n_q

    @property
    def initial_momentum(self) -> int:
        if self.initial_fraction is not None:
            n = int(round(self.initial_fraction * self.N))
        else:
            n = 0 if self.initial_n is None else self.initial_n
        if not -(self.N // 2) <= n < self.N // 2:
            raise ConfigError(f"initial state n = {n} outside [-{self.N // 2}, {self.N // 2})")
        return n

    def to_lines(self) -> list[str]:
        """Canonical ``key = value`` lines; ``parse_config`` restores an equal config."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            fmt = _CODECS[_KEY_TYPES[f.name]][1]
            lines.append(f"{f.name} = {fmt(value)}")
        return lines

    def to_text(self) -> str:
        return "\n".join(self.to_lines()) + "\n"

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


_KEY_TYPES = {
    "n_q": "int",
    "K": "real",
    "name": "str",
    "engine": "str",
    "k": "real",
    "L": "int",
    "gamma": "real",
    "M": "int",
    "t_max": "int",
    "seed": "int",
    "initial_n": "int",
    "initial_fraction": "real",
    "observables": "names",
    "wn_times": "ints",
    "husimi_windows": "windows",
    "grid_n": "int",
    "grid_theta": "int",
    "fit_window": "window",
    "exact_cap": "int",
    "threads": "int",
    "n_pts": "int",
}

REQUIRED_KEYS = ("n_q", "K")


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEY_TYPES:
            raise ConfigError(f"unknown key {key!r} (line {lineno})")
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (line {lineno})")
        try:
            values[key] = _CODECS[_KEY_TYPES[key]][0](value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc} (line {lineno})") from None
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
