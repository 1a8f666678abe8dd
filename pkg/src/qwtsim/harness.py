"""Experiment configuration, orchestration and output.

Config files are INI-style with four sections; every key may be overridden
from the command line::

    [map]
    nq = 8            ; system qubits (int, or range "6..12", or list "6,8")
    T = 1.4
    k = 1.0

    [noise]
    model = noisy     ; ideal | noisy | static | pseudo-static
    eps = 1e-4..1e-2:7  ; radians; value, list, or log range "lo..hi:points"
    mu = 0            ; radians, or "eps" to tie mu to eps
    seeds = 0,1,2

    [run]
    steps = 1000
    record_every = 1
    snapshots =       ; iteration numbers for probability snapshots
    window = 50       ; block length for window-averaged IPR
    threshold = 0.9   ; fidelity threshold for t_f
    max_steps = 100000

    [output]
    dir = out
    reproducible = true
    workers = 1
    svg = true
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

__all__ = [
    "ConfigError",
    "ResourceError",
    "ExperimentConfig",
    "load_config",
    "config_to_ini",
    "parse_int_range",
    "parse_float_list",
    "write_csv",
    "write_manifest",
    "run_pool",
    "PAPER_NG",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_RESOURCE",
]

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE = 0, 2, 3

# gate counts per map iteration reported for n_q = 6..12
PAPER_NG = {6: 1509, 7: 2974, 8: 5237, 9: 8470, 10: 12821, 11: 18462, 12: 25541}


class ConfigError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass


def parse_int_range(text) -> tuple:
    """``"6..12"`` -> (6, ..., 12); ``"6,8"`` -> (6, 8); ``8`` -> (8,)."""
    if isinstance(text, int):
        return (text,)
    text = str(text).strip()
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(v) for v in text.split(",") if v.strip())


def parse_float_list(text, default_points: int = 7) -> tuple:
    """``"1e-4..1e-2:5"`` -> 5 log-spaced values; ``"1e-3,2e-3"`` -> list; ``""`` -> ()."""
    if isinstance(text, (int, float)):
        return (float(text),)
    text = str(text).strip()
    if not text:
        return ()
    if ".." in text:
        rng, _, pts = text.partition(":")
        lo, hi = (float(v) for v in rng.split(".."))
        n = int(pts) if pts else default_points
        if lo <= 0 or hi <= 0:
            raise ValueError("log range needs positive bounds")
        return tuple(float(v) for v in np.logspace(math.log10(lo), math.log10(hi), n))
    return tuple(float(v) for v in text.split(",") if v.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (section, parser, formatter)
_SCHEMA = {
    "nq": ("map", parse_int_range, lambda v: ",".join(map(str, v))),
    "T": ("map", float, repr),
    "k": ("map", float, repr),
    "model": ("noise", str, str),
    "eps": ("noise", parse_float_list, lambda v: ",".join(repr(x) for x in v)),
    "mu": ("noise", str, str),
    "seeds": ("noise", parse_int_range, lambda v: ",".join(map(str, v))),
    "steps": ("run", int, str),
    "record_every": ("run", int, str),
    "snapshots": ("run", lambda s: parse_int_range(s) if str(s).strip() else (), lambda v: ",".join(map(str, v))),
    "window": ("run", int, str),
    "threshold": ("run", float, repr),
    "max_steps": ("run", int, str),
    "dir": ("output", str, str),
    "reproducible": ("output", _bool, lambda v: "true" if v else "false"),
    "workers": ("output", int, str),
    "svg": ("output", _bool, lambda v: "true" if v else "false"),
}


@dataclass
class ExperimentConfig:
    nq: tuple = (8,)
    T: float = 1.4
    k: float = 1.0
    model: str = "ideal"
    eps: tuple = (0.0,)
    mu: str = "0"
    seeds: tuple = (0,)
    steps: int = 1000
    record_every: int = 1
    snapshots: tuple = ()
    window: int = 50
    threshold: float = 0.9
    max_steps: int = 100000
    dir: str = "out"
    reproducible: bool = True
    workers: int = 1
    svg: bool = True

    def validate(self) -> "ExperimentConfig":
        from .noise import parse_noise

        checks = [
            ("nq", all(n >= 2 for n in self.nq) and len(self.nq) > 0, "n_q values must be >= 2"),
            ("steps", self.steps >= 1, "must be >= 1"),
            ("record_every", self.record_every >= 1, "must be >= 1"),
            ("window", self.window >= 1, "must be >= 1"),
            ("threshold", 0 < self.threshold < 1, "must lie in (0, 1)"),
            ("max_steps", self.max_steps >= 1, "must be >= 1"),
            ("workers", self.workers >= 1, "must be >= 1"),
            ("eps", all(e >= 0 for e in self.eps), "must be >= 0"),
            ("seeds", len(self.seeds) > 0, "at least one seed"),
        ]
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(f"{key}: {msg}")
        try:
            parse_noise(self.model)
        except ValueError as e:
            raise ConfigError(f"model: {e}") from None
        if self.mu != "eps":
            try:
                if float(self.mu) < 0:
                    raise ConfigError("mu: must be >= 0")
            except ValueError:
                raise ConfigError(f"mu: expected a number or 'eps', got {self.mu!r}") from None
        return self

    def mu_for(self, eps: float) -> float:
        return eps if self.mu == "eps" else float(self.mu)

    def noise(self, eps: float, seed: int):
        from .noise import parse_noise

        return parse_noise(self.model, eps, self.mu_for(eps), seed)


def _set(cfg: ExperimentConfig, key: str, raw) -> None:
    if key not in _SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    parser = _SCHEMA[key][1]
    try:
        value = parser(raw) if isinstance(raw, str) else raw
        if key in ("nq", "seeds", "snapshots", "eps") and not isinstance(value, tuple):
            value = tuple(value) if isinstance(value, (list, tuple)) else parser(value)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{key}: {e}") from None
    setattr(cfg, key, value)


def load_config(path: str | None = None, overrides: dict | None = None,
                base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read an INI file (optional) then apply ``overrides``; unknown keys raise ``ConfigError``."""
    cfg = ExperimentConfig() if base is None else ExperimentConfig(**asdict(base))
    if path is not None:
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        cp.optionxform = str
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        for section in cp.sections():
            if section not in {s for s, _, _ in _SCHEMA.values()}:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in cp.items(section):
                if key not in _SCHEMA or _SCHEMA[key][0] != section:
                    raise ConfigError(f"unknown config key {section}.{key}")
                _set(cfg, key, raw)
    for key, raw in (overrides or {}).items():
        if raw is not None:
            _set(cfg, key, raw)
    return cfg.validate()


def config_to_ini(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    for f in fields(cfg):
        section, _, fmt = _SCHEMA[f.name]
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, f.name, fmt(getattr(cfg, f.name)))
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


# --------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str, header, rows) -> str:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])
    return path


def write_manifest(outdir: str, cfg: ExperimentConfig, command: str, wall_time: float,
                   extra: dict | None = None) -> str:
    from . import __version__

    data = {
        "command": command,
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()},
        "seeds": list(cfg.seeds),
        "code_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": round(wall_time, 3),
    }
    data.update(extra or {})
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    with open(os.path.join(outdir, "config.ini"), "w") as fh:
        fh.write(config_to_ini(cfg))
    return path


def run_pool(fn, tasks, workers: int = 1) -> list:
    """Map ``fn`` over ``tasks``; results come back in task order either way."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


@dataclass
class Timer:
    start: float = field(default_factory=time.perf_counter)

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start
