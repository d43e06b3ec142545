"""INI experiment configuration: parsing plus upfront validation.

Configs are plain `key = value` INI sections. Every experiment block is
checked before anything runs, and violations name the offending field
path (for example "lattice.L").
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

__all__ = ["ExperimentConfig", "load_config", "parse_config_text", "EXPERIMENTS"]

EXPERIMENTS = (
    "theory_table",
    "sweep",
    "breather",
    "marginals",
    "continuum",
    "decay",
    "groundstate",
    "jjt_concentration",
)


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    output_dir: str
    sections: dict = field(default_factory=dict)
    text: str = ""

    def get(self, section: str, key: str, cast, default=None, minimum=None):
        sec = self.sections.get(section, {})
        if key not in sec:
            if default is not None:
                return default
            raise ConfigError(f"missing required field {section}.{key}")
        raw = sec[key]
        try:
            if cast is bool:
                val = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                val = cast(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"field {section}.{key} has invalid value {raw!r}") from None
        if minimum is not None and val < minimum:
            raise ConfigError(f"field {section}.{key} must be >= {minimum}, got {val}")
        return val

    def get_list(self, section: str, key: str, cast, default=None):
        sec = self.sections.get(section, {})
        if key not in sec:
            if default is not None:
                return default
            raise ConfigError(f"missing required field {section}.{key}")
        raw = sec[key]
        try:
            return [cast(tok.strip()) for tok in raw.split(",") if tok.strip()]
        except (TypeError, ValueError):
            raise ConfigError(f"field {section}.{key} has invalid list value {raw!r}") from None


def parse_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keys are case-sensitive (L vs l, B)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc
    sections = {name: dict(parser[name]) for name in parser.sections()}
    if "experiment" not in sections:
        raise ConfigError("missing required section [experiment]")
    cfg = ExperimentConfig(
        experiment="", seed=0, output_dir="out", sections=sections, text=text
    )
    name = cfg.get("experiment", "name", str)
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"field experiment.name has unknown value {name!r}; options: {', '.join(EXPERIMENTS)}"
        )
    cfg.experiment = name
    cfg.seed = cfg.get("experiment", "seed", int, default=0)
    cfg.output_dir = cfg.get("experiment", "output_dir", str, default="out")
    _validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text())


def _require_lattice(cfg: ExperimentConfig, d_required=None):
    d = cfg.get("lattice", "d", int, minimum=1)
    cfg.get("lattice", "L", int, minimum=2)
    h = cfg.get("lattice", "h", float, default=-1.0)
    if h != -1.0 and h <= 0:
        raise ConfigError("field lattice.h must be positive")
    if d_required is not None and d != d_required:
        raise ConfigError(f"field lattice.d must be {d_required} for this experiment")


def _require_gibbs(cfg: ExperimentConfig, grid: bool):
    cfg.get("gibbs", "B", float, minimum=1e-12)
    if grid:
        lo = cfg.get("gibbs", "beta_min", float, minimum=0.0)
        hi = cfg.get("gibbs", "beta_max", float)
        if hi <= lo:
            raise ConfigError("field gibbs.beta_max must exceed gibbs.beta_min")
        cfg.get("gibbs", "beta_steps", int, minimum=2)
    else:
        cfg.get("gibbs", "beta", float, minimum=0.0)
    cfg.get("gibbs", "sweeps", int, minimum=10)
    burn = cfg.get("gibbs", "burn_in", int, minimum=0)
    if burn >= cfg.get("gibbs", "sweeps", int):
        raise ConfigError("field gibbs.burn_in must be smaller than gibbs.sweeps")


def _validate(cfg: ExperimentConfig) -> None:
    name = cfg.experiment
    if name == "theory_table":
        lo = cfg.get("theory_table", "beta_min", float, default=0.0, minimum=0.0)
        hi = cfg.get("theory_table", "beta_max", float, default=6.0)
        if hi <= lo:
            raise ConfigError("field theory_table.beta_max must exceed theory_table.beta_min")
        cfg.get("theory_table", "steps", int, default=61, minimum=2)
        cfg.get("theory_table", "B", float, default=1.0, minimum=1e-12)
    elif name == "sweep":
        _require_lattice(cfg)
        _require_gibbs(cfg, grid=True)
    elif name == "breather":
        _require_lattice(cfg)
        _require_gibbs(cfg, grid=False)
        cfg.get("breather", "T", float, default=100.0, minimum=0.0)
        cfg.get("breather", "n_samples", int, default=50, minimum=1)
        cfg.get("breather", "dt", float, default=5e-4, minimum=1e-9)
    elif name == "marginals":
        _require_lattice(cfg)
        _require_gibbs(cfg, grid=False)
        cfg.get("marginals", "m", int, default=8, minimum=0)
        cfg.get("marginals", "n_samples", int, default=400, minimum=1)
    elif name == "continuum":
        s = cfg.get("continuum", "s", float, minimum=1e-9)
        if s <= 0.5:
            raise ConfigError("field continuum.s must exceed 1/2")
        cfg.get("continuum", "T", float, default=0.5 if s >= 1 else 0.1, minimum=1e-9)
        grid = cfg.get_list("continuum", "L_grid", int, default=[32, 64, 128])
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("field continuum.L_grid must be increasing")
    elif name == "decay":
        d = cfg.get("decay", "d", int, minimum=1)
        L = cfg.get("decay", "L", int, minimum=4)
        t1 = cfg.get("decay", "t1", float, minimum=1e-9)
        t2 = cfg.get("decay", "t2", float)
        if t2 <= t1:
            raise ConfigError("field decay.t2 must exceed decay.t1")
        if t2 > L / (4.0 * d):
            raise ConfigError("field decay.t2 exceeds the wrap-around time L/(2 v_max)")
    elif name == "groundstate":
        _require_lattice(cfg)
        cfg.get_list("groundstate", "nu_grid", float)
        cfg.get("groundstate", "p", float, default=3.0, minimum=1.0)
    elif name == "jjt_concentration":
        cfg.get_list("jjt_concentration", "n_modes_grid", int)
        cfg.get("jjt_concentration", "B", float, default=2.0, minimum=1e-12)
        cfg.get("jjt_concentration", "C", float, default=1.0, minimum=1e-12)
        cfg.get("jjt_concentration", "samples", int, default=20000, minimum=100)
        cfg.get("jjt_concentration", "box_length", float, default=16.0, minimum=1e-12)
