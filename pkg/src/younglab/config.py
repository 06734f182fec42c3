"""JSON run configuration with validation that names the offending field."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from .besov import representable_range
from .grid import Grid
from .spaces import Lebesgue, SpaceSpec, space_from_dict, space_to_dict

SUITES = ("axioms", "young", "converse-young", "maximal", "kernel-decay", "besov",
          "linear-term", "duhamel-term", "maxreg")
SUITE_CHOICES = SUITES + ("all",)
# suites that build a Littlewood-Paley family
LP_SUITES = {"kernel-decay", "besov", "linear-term", "duhamel-term", "maxreg", "all"}

# peak working set allowed for one run (bytes)
MEMORY_LIMIT = 2 * 1024**3


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    dim: int = 1
    N: int = 1024
    L: float = 32.0
    T: float = 64.0
    cells: int = 512
    first: float = 1e-5
    spaces: tuple[SpaceSpec, ...] = (Lebesgue(2.0),)
    j_min: int = -4
    j_max: int = 4
    count: int = 20
    seed: int = 0
    slope: float = 0.0
    ceilings: dict = field(default_factory=dict)
    output: str = "younglab"

    @property
    def grid(self) -> Grid:
        return Grid(self.dim, self.N, self.L)

    @property
    def data_band(self) -> tuple[float, float]:
        """Frequency band of random fields; fixed by the LP range, not by ``N``."""
        return 2.0 ** (self.j_min + 2), 2.0 ** self.j_max

    def refined(self) -> "SuiteConfig":
        return replace(self, N=2 * self.N, cells=2 * self.cells)

    def estimated_bytes(self) -> int:
        """Rough peak memory of the largest batched array a suite builds."""
        pts = self.N**self.dim
        # spectra of the space-time fields plus one chunk of band-limited blocks
        return 16 * pts * self.cells * 6 + 16 * (1 << 22)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "grid": {"dim": self.dim, "N": self.N, "L": self.L},
            "time": {"T": self.T, "cells": self.cells, "first": self.first},
            "spaces": [space_to_dict(s) for s in self.spaces],
            "lp": {"j_min": self.j_min, "j_max": self.j_max},
            "sweep": {"count": self.count, "seed": self.seed, "slope": self.slope},
            "ceilings": dict(sorted(self.ceilings.items())),
            "output": self.output,
        }


SECTION_KEYS = {
    "grid": ("dim", "N", "L"),
    "time": ("T", "cells", "first"),
    "lp": ("j_min", "j_max"),
    "sweep": ("count", "seed", "slope"),
}


def _section(d: dict, key: str) -> dict:
    sec = d.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(key, "expected an object")
    extra = sorted(set(sec) - set(SECTION_KEYS[key]))
    if extra:
        raise ConfigError(f"{key}.{extra[0]}", "unknown field")
    return sec


def _num(sec: dict, path: str, key: str, default, kind=float):
    if key not in sec:
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
        return int(v)
    return float(v)


def config_from_dict(d: dict) -> SuiteConfig:
    if not isinstance(d, dict):
        raise ConfigError("<root>", "expected a JSON object")
    known = {"suite", "grid", "time", "spaces", "lp", "sweep", "ceilings", "output"}
    extra = sorted(set(d) - known)
    if extra:
        raise ConfigError(extra[0], "unknown field")
    suite = d.get("suite")
    if suite not in SUITE_CHOICES:
        raise ConfigError("suite", f"expected one of {', '.join(SUITE_CHOICES)}, got {suite!r}")
    g, t, lp, sw = (_section(d, k) for k in ("grid", "time", "lp", "sweep"))
    base = SuiteConfig(suite)
    kw = dict(
        dim=_num(g, "grid", "dim", base.dim, int), N=_num(g, "grid", "N", base.N, int),
        L=_num(g, "grid", "L", base.L),
        T=_num(t, "time", "T", base.T), cells=_num(t, "time", "cells", base.cells, int),
        first=_num(t, "time", "first", base.first),
        j_min=_num(lp, "lp", "j_min", base.j_min, int), j_max=_num(lp, "lp", "j_max", base.j_max, int),
        count=_num(sw, "sweep", "count", base.count, int), seed=_num(sw, "sweep", "seed", base.seed, int),
        slope=_num(sw, "sweep", "slope", base.slope),
    )
    spaces = d.get("spaces", [space_to_dict(s) for s in base.spaces])
    if not isinstance(spaces, list) or not spaces:
        raise ConfigError("spaces", "expected a non-empty list")
    specs = []
    for i, sd in enumerate(spaces):
        if not isinstance(sd, dict):
            raise ConfigError(f"spaces[{i}]", "expected an object")
        try:
            specs.append(space_from_dict(sd))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"spaces[{i}]", str(e)) from None
    ceil = d.get("ceilings", {})
    if not isinstance(ceil, dict):
        raise ConfigError("ceilings", "expected an object")
    for k, v in ceil.items():
        if k not in SUITES:
            raise ConfigError(f"ceilings.{k}", "unknown suite")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"ceilings.{k}", f"expected a positive number, got {v!r}")
    out = d.get("output", base.output)
    if not isinstance(out, str) or not out:
        raise ConfigError("output", "expected a non-empty string")
    cfg = SuiteConfig(suite, spaces=tuple(specs), ceilings={k: float(v) for k, v in ceil.items()},
                      output=out, **kw)
    validate(cfg)
    return cfg


def validate(cfg: SuiteConfig):
    try:
        grid = cfg.grid
    except ValueError as e:
        raise ConfigError("grid", str(e)) from None
    if not (math.isfinite(cfg.T) and cfg.T > 0):
        raise ConfigError("time.T", "must be positive")
    if cfg.cells < 2:
        raise ConfigError("time.cells", "need at least two cells")
    if not 0 < cfg.first <= min(1e-3, cfg.T / 2):
        raise ConfigError("time.first", "first grid time must lie in (0, min(1e-3, T/2)]")
    if cfg.j_min >= cfg.j_max:
        raise ConfigError("lp", "need j_min < j_max")
    lo, hi = representable_range(grid)
    if cfg.suite in LP_SUITES and (cfg.j_min < lo or cfg.j_max > hi):
        raise ConfigError("lp", f"bands [{cfg.j_min}, {cfg.j_max}] not representable on this "
                                f"grid; achievable range is [{lo}, {hi}]")
    if cfg.data_band[1] >= 0.9 * grid.nyquist:
        raise ConfigError("lp.j_max", f"data band up to 2^{cfg.j_max} too close to the "
                                      f"Nyquist frequency {grid.nyquist:.4g}; raise grid.N")
    if cfg.count < 1:
        raise ConfigError("sweep.count", "must be positive")
    if cfg.seed < 0:
        raise ConfigError("sweep.seed", "must be non-negative")


def load_config(path: str) -> SuiteConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigError("<file>", str(e)) from None
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"invalid JSON: {e}") from None
    return config_from_dict(data)
