"""Flat ``key = value`` run configuration shared by every command."""

from __future__ import annotations

import itertools
from typing import Iterable

from .evaluation import SplitRecipe
from .loss import HyperParams
from .training import TrainConfig


class ConfigError(ValueError):
    pass


# key -> (default, kind); kinds: str, int, float, bool, floats, ints, beta
DEFAULTS: dict[str, tuple] = {
    # files
    "edges": ("", "str"),
    "features": ("", "str"),
    "split": ("", "str"),
    "checkpoint": ("", "str"),
    "out": ("runs", "str"),
    # split protocol
    "mode": ("transductive", "str"),
    "val_frac": (0.1, "float"),
    "test_frac": (0.1, "float"),
    "hidden_frac": (0.1, "float"),
    # encoders
    "hidden_dims": ((256,), "ints"),
    "embed_dim": (64, "int"),
    "elu_alpha": (1.0, "float"),
    # objective
    "gamma1": (1.0, "float"),
    "b1": (0.0, "float"),
    "gamma2": (1.0, "float"),
    "b2": (0.0, "float"),
    "beta": (1.0, "beta"),
    "theta": ((1.0, 1.0, 1.0), "floats"),
    "lambda": ((), "floats"),
    "align_mode": ("loose", "str"),
    "tight_scope": ("batch", "str"),
    "symmetrize_loose_align": (False, "bool"),
    "batch_size": (512, "int"),
    "pos_frac": (0.4, "float"),
    "d_max": (5, "int"),
    # schedule
    "epochs": (500, "int"),
    "batches_per_epoch": (0, "int"),
    "eval_every": (5, "int"),
    "patience": (10, "int"),
    "lr": (0.01, "float"),
    "optimizer": ("adam", "str"),
    "adam_beta1": (0.9, "float"),
    "adam_beta2": (0.999, "float"),
    "adam_eps": (1e-8, "float"),
    # runs
    "seed": (0, "int"),
    "trials": (1, "int"),
    "parallel": (1, "int"),
    "eval_set": ("test", "str"),
    "symmetrize_scores": (False, "bool"),
    # diagnostics / prediction
    "h_max": (5, "int"),
    "kinds": ("both", "str"),
    "hop_max_pairs": (20000, "int"),
    "pairs": ("", "str"),
}

# grid axes that set several keys at once
GRID_ALIASES = {"gamma": ("gamma1", "gamma2"), "b": ("b1", "b2")}


def _parse_value(key: str, kind: str, text: str):
    text = text.strip()
    try:
        if kind == "str":
            return text
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "beta":
            return None if text.lower() in ("off", "none", "") else float(text)
        if kind == "floats":
            return tuple(float(t) for t in text.split(",") if t.strip())
        if kind == "ints":
            return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"invalid value {text!r} for key {key!r} ({kind})") from None
    raise AssertionError(kind)


def format_value(value) -> str:
    if value is None:
        return "off"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) if isinstance(v, float) else repr(v) for v in value)
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


class RunConfig:
    """Effective configuration: defaults, then file values, then overrides.

    Sweep grids live under ``grid.<key>`` with values separated by ``;``.
    """

    def __init__(self, values: dict | None = None, grid: dict | None = None):
        self.values = {k: v for k, (v, _) in DEFAULTS.items()}
        self.grid: dict[str, list] = {}
        for k, v in (values or {}).items():
            self.set(k, v)
        for k, vs in (grid or {}).items():
            self.set_grid(k, vs)

    def __getitem__(self, key: str):
        return self.values[key]

    def copy(self) -> "RunConfig":
        out = RunConfig()
        out.values = dict(self.values)
        out.grid = {k: list(v) for k, v in self.grid.items()}
        return out

    def set(self, key: str, value):
        if key.startswith("grid."):
            self.set_grid(key[5:], value)
            return
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(value, str):
            value = _parse_value(key, DEFAULTS[key][1], value)
        self.values[key] = value

    def set_grid(self, axis: str, values):
        if axis not in DEFAULTS and axis not in GRID_ALIASES:
            raise ConfigError(f"unknown grid axis {axis!r}")
        kind = DEFAULTS[GRID_ALIASES.get(axis, (axis,))[0]][1]
        if isinstance(values, str):
            values = [_parse_value(axis, kind, t) for t in values.split(";") if t.strip()]
        if not values:
            raise ConfigError(f"grid axis {axis!r} has no values")
        self.grid[axis] = list(values)

    def apply(self, axis: str, value):
        for key in GRID_ALIASES.get(axis, (axis,)):
            self.values[key] = value

    def grid_points(self):
        """Yield ``(assignment, RunConfig)`` for every point of the grid."""
        axes = list(self.grid)
        for combo in itertools.product(*(self.grid[a] for a in axes)):
            cfg = self.copy()
            cfg.grid = {}
            for a, v in zip(axes, combo):
                cfg.apply(a, v)
            yield dict(zip(axes, combo)), cfg

    # ---- files -------------------------------------------------------

    @classmethod
    def from_lines(cls, lines: Iterable[str], origin: str = "<config>") -> "RunConfig":
        cfg = cls()
        for lineno, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            try:
                cfg.set(key.strip(), value.strip())
            except ConfigError as exc:
                raise ConfigError(f"{origin}:{lineno}: {exc}") from None
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_lines(f, str(path))

    def echo(self) -> str:
        lines = [f"{k} = {format_value(v)}" for k, v in self.values.items()]
        for axis, vals in self.grid.items():
            lines.append(f"grid.{axis} = " + "; ".join(format_value(v) for v in vals))
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {k: format_value(v) for k, v in self.values.items()}

    # ---- typed views ---------------------------------------------------

    def hyper_params(self) -> HyperParams:
        v = self.values
        try:
            return HyperParams(
                gamma1=v["gamma1"], b1=v["b1"], gamma2=v["gamma2"], b2=v["b2"], beta=v["beta"],
                theta=v["theta"], lam=v["lambda"] or None, align_mode=v["align_mode"],
                tight_scope=v["tight_scope"], symmetrize_loose_align=v["symmetrize_loose_align"],
                batch_size=v["batch_size"], pos_frac=v["pos_frac"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def train_config(self) -> TrainConfig:
        v = self.values
        try:
            return TrainConfig(
                hp=self.hyper_params(), epochs=v["epochs"],
                batches_per_epoch=v["batches_per_epoch"] or None, eval_every=v["eval_every"],
                patience=v["patience"], lr=v["lr"], optimizer=v["optimizer"],
                adam_beta1=v["adam_beta1"], adam_beta2=v["adam_beta2"], adam_eps=v["adam_eps"],
                seed=v["seed"], hidden_dims=v["hidden_dims"], embed_dim=v["embed_dim"],
                elu_alpha=v["elu_alpha"], d_max=v["d_max"], symmetrize_scores=v["symmetrize_scores"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def split_recipe(self) -> SplitRecipe:
        v = self.values
        if v["mode"] not in ("transductive", "inductive"):
            raise ConfigError(f"mode must be 'transductive' or 'inductive', got {v['mode']!r}")
        return SplitRecipe(v["mode"], v["val_frac"], v["test_frac"], v["hidden_frac"])
