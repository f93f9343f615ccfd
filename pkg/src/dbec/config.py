"""Flat ``key = value`` run configuration.

Grammar: one ``key = value`` per line; ``#`` starts a comment; blank lines
are ignored; lists are comma separated; keys may use ``-`` or ``_``. Every
key has a command-line flag of the same name (``max_iters`` <-> ``--max-iters``).
Unknown keys and invalid values raise :class:`ConfigError` naming the key.
"""

import dataclasses
import math
from dataclasses import dataclass, fields

from .errors import ConfigError
from .io import fmt


def _floats(v):
    if isinstance(v, (list, tuple)):
        return tuple(float(x) for x in v)
    return tuple(float(x) for x in str(v).replace(" ", "").split(",") if x != "")


def _triple_int(v):
    t = tuple(int(float(x)) for x in _floats(v))
    return t * 3 if len(t) == 1 else t


def _triple_float(v):
    t = _floats(v)
    return t * 3 if len(t) == 1 else t


def _opt_float(v):
    if v is None or (isinstance(v, str) and v.strip().lower() in ("", "none", "auto")):
        return None
    return float(v)


def _str(v):
    return None if v is None else str(v).strip()


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


@dataclass
class RunConfig:
    # grid
    grid: tuple = (64, 64, 64)
    box: tuple = (8.0, 8.0, 8.0)
    # physical parameters
    lambda1: float = -1.0
    lambda2: float = 0.3
    trap: float = 0.0
    mass: float = 1.0
    # solver
    tol: float | None = None
    max_iters: int = 50_000
    k: float | None = None
    init: str = "gaussian"
    complex_field: bool = False
    # dynamics
    dt: float = 2e-3
    tmax: float = 5.0
    sample_every: int = 25
    snapshot_every: int = 0
    # experiments
    experiment: str | None = None
    stretches: tuple = (1.02, 1.05, 1.10)
    certified_stretch: float = 0.95
    perturbations: tuple = (0.01, 0.05)
    a_list: tuple = (0.4, 0.2, 0.1, 0.05)
    c_list: tuple = (1.0, 0.5, 0.25, 0.1)
    margins: tuple = (-1.0, -0.5, -0.25)
    lambda1_range: tuple = (-3.0, 3.0)
    lambda2_range: tuple = (-1.0, 1.0)
    resolution: int = 41
    border_tol: float = 0.05
    trapped_grid: int = 32
    trapped_dt: float = 0.02
    horizon_factor: float = 20.0
    box_per_trap_length: float = 8.0
    # output
    out_dir: str = "."
    snapshots_dir: str | None = None
    threads: int = 1
    seed: int = 0

    def to_lines(self):
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                s = "none"
            elif isinstance(v, tuple):
                s = ",".join(fmt(x) for x in v)
            else:
                s = fmt(v)
            out.append(f"{f.name} = {s}")
        return out

    def echo(self, path):
        with open(path, "w") as fh:
            fh.write("# resolved configuration (all defaults filled)\n")
            fh.write("\n".join(self.to_lines()) + "\n")

    def physical(self):
        from .functionals import PhysParams

        return PhysParams(self.lambda1, self.lambda2, self.trap, self.mass)

    def make_grid(self):
        from .grid import make_grid

        return make_grid(self.grid, self.box)


_CASTS = {
    "grid": _triple_int,
    "box": _triple_float,
    "lambda1": float,
    "lambda2": float,
    "trap": float,
    "mass": float,
    "tol": _opt_float,
    "max_iters": lambda v: int(float(v)),
    "k": _opt_float,
    "init": _str,
    "complex_field": _bool,
    "dt": float,
    "tmax": float,
    "sample_every": lambda v: int(float(v)),
    "snapshot_every": lambda v: int(float(v)),
    "experiment": lambda v: None if _str(v) in (None, "", "none") else _str(v),
    "stretches": _floats,
    "certified_stretch": float,
    "perturbations": _floats,
    "a_list": _floats,
    "c_list": _floats,
    "margins": _floats,
    "lambda1_range": _floats,
    "lambda2_range": _floats,
    "resolution": lambda v: int(float(v)),
    "border_tol": float,
    "trapped_grid": lambda v: int(float(v)),
    "trapped_dt": float,
    "horizon_factor": float,
    "box_per_trap_length": float,
    "out_dir": _str,
    "snapshots_dir": lambda v: None if _str(v) in (None, "", "none") else _str(v),
    "threads": lambda v: int(float(v)),
    "seed": lambda v: int(float(v)),
}

EXPERIMENTS = ("instability", "trapped-stability", "gap", "mu-sign", "border", "small-mass",
               "regime-sweep")


def _finite(cfg, name):
    v = getattr(cfg, name)
    vals = v if isinstance(v, tuple) else (v,)
    for x in vals:
        if x is not None and not math.isfinite(x):
            raise ConfigError(name, "must be finite")


def validate(cfg):
    for name in ("box", "lambda1", "lambda2", "trap", "mass", "tol", "k", "dt", "tmax",
                 "stretches", "perturbations", "a_list", "c_list", "margins"):
        _finite(cfg, name)
    if len(cfg.grid) != 3:
        raise ConfigError("grid", "needs 1 or 3 entries")
    for n in cfg.grid:
        if n < 8 or n % 2 or n & (n - 1):
            raise ConfigError("grid", f"points per axis must be powers of two >= 8, got {n}")
    if len(cfg.box) != 3 or min(cfg.box) <= 0:
        raise ConfigError("box", "needs 1 or 3 positive entries")
    if cfg.trap < 0:
        raise ConfigError("trap", "trap must be ≥ 0")
    if cfg.mass <= 0:
        raise ConfigError("mass", "mass must be > 0")
    if cfg.tol is not None and cfg.tol <= 0:
        raise ConfigError("tol", "must be > 0")
    if cfg.max_iters < 1:
        raise ConfigError("max_iters", "must be >= 1")
    if cfg.k is not None and cfg.k <= 0:
        raise ConfigError("k", "must be > 0")
    if cfg.dt <= 0:
        raise ConfigError("dt", "must be > 0")
    if cfg.tmax <= 0:
        raise ConfigError("tmax", "must be > 0")
    if cfg.sample_every < 1:
        raise ConfigError("sample_every", "must be >= 1")
    if cfg.snapshot_every < 0:
        raise ConfigError("snapshot_every", "must be >= 0")
    if cfg.experiment is not None and cfg.experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {cfg.experiment!r}; "
                          f"choose from {', '.join(EXPERIMENTS)}")
    if any(x <= 0 for x in cfg.stretches) or cfg.certified_stretch <= 0:
        raise ConfigError("stretches", "dilation factors must be > 0")
    if any(x < 0 for x in cfg.perturbations):
        raise ConfigError("perturbations", "sizes must be >= 0")
    if any(x <= 0 for x in cfg.a_list):
        raise ConfigError("a_list", "trap frequencies must be > 0")
    if any(x <= 0 for x in cfg.c_list):
        raise ConfigError("c_list", "masses must be > 0")
    for name in ("lambda1_range", "lambda2_range"):
        r = getattr(cfg, name)
        if len(r) != 2 or not r[0] < r[1]:
            raise ConfigError(name, "needs two increasing values")
    if cfg.resolution < 2:
        raise ConfigError("resolution", "must be >= 2")
    if cfg.threads < 1:
        raise ConfigError("threads", "must be >= 1")
    if cfg.trapped_grid < 8 or cfg.trapped_grid & (cfg.trapped_grid - 1):
        raise ConfigError("trapped_grid", "must be a power of two >= 8")
    return cfg


def normalize_key(key):
    return key.strip().replace("-", "_")


def apply(cfg, values):
    """Return a copy of cfg with ``values`` (raw strings or typed) applied."""
    out = dataclasses.replace(cfg)
    for key, raw in values.items():
        name = normalize_key(key)
        if name not in _CASTS:
            raise ConfigError(key, "unknown key")
        try:
            setattr(out, name, _CASTS[name](raw))
        except (TypeError, ValueError) as e:
            raise ConfigError(name, f"invalid value {raw!r} ({e})") from None
    return out


def parse_text(text, source="<config>"):
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}", f"expected 'key = value', got {line!r}")
        k, v = line.split("=", 1)
        k = normalize_key(k)
        if not k:
            raise ConfigError(f"{source}:{lineno}", "empty key")
        if k in values:
            raise ConfigError(k, f"duplicate key (line {lineno})")
        values[k] = v.strip()
    return values


def parse_config(path=None, overrides=None):
    """Defaults, then the file at ``path`` (if any), then ``overrides``; validated."""
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError("config", f"cannot read {path}: {e}") from None
        cfg = apply(cfg, parse_text(text, str(path)))
    if overrides:
        cfg = apply(cfg, {k: v for k, v in overrides.items() if v is not None})
    return validate(cfg)
