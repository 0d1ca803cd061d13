"""Run configuration: a small TOML schema with strict validation.

Sections and keys (defaults in parentheses):

    [grid]    n (required), length (2 pi)
    [params]  mu (1.0), lambda (-1.0), rho_floor (0.1), cfl (0.4),
              dealias ("two_thirds"), nonlinear (true)
    [ic]      type ("shear" | "two_mode" | "file"), epsilon (1e-3),
              seed (0), paths (table of field-dump paths, file type only)
    [run]     t_final (1.0), dump_every (0), ledger_every (1),
              output_dir ("out")

Unknown sections or keys are rejected — a typo should fail loudly, not
silently fall back to a default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .solver import Params

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


_SCHEMA = {
    "grid": {"n", "length"},
    "params": {"mu", "lambda", "rho_floor", "cfl", "dealias", "nonlinear"},
    "ic": {"type", "epsilon", "seed", "paths"},
    "run": {"t_final", "dump_every", "ledger_every", "output_dir"},
}


@dataclass(frozen=True)
class RunConfig:
    n: int
    length: float
    params: Params
    ic_type: str
    epsilon: float
    seed: int
    ic_paths: dict
    t_final: float
    dump_every: int
    ledger_every: int
    output_dir: str
    tol_scale: float = 1.0
    raw_text: str = ""

    def as_dict(self) -> dict:
        return {
            "grid": {"n": self.n, "length": self.length},
            "params": {
                "mu": self.params.mu,
                "lambda": self.params.lam,
                "rho_floor": self.params.rho_floor,
                "cfl": self.params.cfl,
                "dealias": self.params.dealias,
                "nonlinear": self.params.nonlinear,
            },
            "ic": {
                "type": self.ic_type,
                "epsilon": self.epsilon,
                "seed": self.seed,
                "paths": dict(self.ic_paths),
            },
            "run": {
                "t_final": self.t_final,
                "dump_every": self.dump_every,
                "ledger_every": self.ledger_every,
                "output_dir": self.output_dir,
            },
        }

    def tolerances(self) -> dict:
        """Residual tolerances actually enforced, after --tol-scale."""
        return {
            "identity": 1e-6 * self.tol_scale,
            "div_H": 1e-8 * self.tol_scale,
            "mean_b": 1e-12 * self.tol_scale,
        }


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"section [{name}] must be a table")
    extra = set(sec) - _SCHEMA[name]
    if extra:
        raise ConfigError(f"unknown key {sorted(extra)[0]!r} in section [{name}]")
    return sec


def parse_config(text: str, tol_scale: float = 1.0) -> RunConfig:
    """Parse and validate a TOML document given as a string."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    extra = set(doc) - set(_SCHEMA)
    if extra:
        raise ConfigError(f"unknown section [{sorted(extra)[0]}]")

    grid = _section(doc, "grid")
    if "n" not in grid:
        raise ConfigError("missing required key 'n' in section [grid]")
    n = grid["n"]
    if not isinstance(n, int):
        raise ConfigError(f"grid.n must be an integer, got {n!r}")
    length = float(grid.get("length", 2.0 * math.pi))

    par = _section(doc, "params")
    try:
        params = Params(
            mu=float(par.get("mu", 1.0)),
            lam=float(par.get("lambda", -1.0)),
            rho_floor=float(par.get("rho_floor", 0.1)),
            cfl=float(par.get("cfl", 0.4)),
            dealias=str(par.get("dealias", "two_thirds")),
            nonlinear=bool(par.get("nonlinear", True)),
        )
    except ValueError as exc:
        raise ConfigError(f"bad [params]: {exc}") from None

    ic = _section(doc, "ic")
    ic_type = str(ic.get("type", "shear"))
    if ic_type not in ("shear", "two_mode", "file"):
        raise ConfigError(f"ic.type must be shear, two_mode, or file, got {ic_type!r}")
    epsilon = float(ic.get("epsilon", 1e-3))
    seed = int(ic.get("seed", 0))
    paths = ic.get("paths", {})
    if not isinstance(paths, dict):
        raise ConfigError("ic.paths must be a table of file paths")
    if ic_type == "file" and not paths:
        raise ConfigError("ic.type = 'file' needs a non-empty ic.paths table")

    runsec = _section(doc, "run")
    t_final = float(runsec.get("t_final", 1.0))
    if t_final < 0:
        raise ConfigError(f"run.t_final must be >= 0, got {t_final}")
    dump_every = int(runsec.get("dump_every", 0))
    ledger_every = int(runsec.get("ledger_every", 1))
    if dump_every < 0 or ledger_every < 0:
        raise ConfigError("run.dump_every and run.ledger_every must be >= 0")
    output_dir = str(runsec.get("output_dir", "out"))

    if not tol_scale > 0:
        raise ConfigError(f"tol-scale must be positive, got {tol_scale}")

    cfg = RunConfig(
        n=n,
        length=length,
        params=params,
        ic_type=ic_type,
        epsilon=epsilon,
        seed=seed,
        ic_paths={str(k): str(v) for k, v in paths.items()},
        t_final=t_final,
        dump_every=dump_every,
        ledger_every=ledger_every,
        output_dir=output_dir,
        tol_scale=tol_scale,
        raw_text=text,
    )
    # surface grid errors at load time, not mid-run
    from .spectral import Grid

    try:
        Grid(cfg.n, cfg.length)
    except ValueError as exc:
        raise ConfigError(f"bad [grid]: {exc}") from None
    return cfg


def load_config(path, tol_scale: float = 1.0) -> RunConfig:
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, tol_scale=tol_scale)
