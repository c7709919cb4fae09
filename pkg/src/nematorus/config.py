"""Run configuration: flat ``key = value`` text files.

One key per line, ``#`` starts a comment, nesting is dotted
(``flow.tol = 1e-8``).  The format is trivially parseable and
diffable; ``serialize`` followed by ``parse_text`` round-trips every
config losslessly.  CLI flags override file values which override the
defaults below.
"""

import math
import os
from dataclasses import dataclass, fields as dataclass_fields

from .energy import ElasticConstants
from .errors import ConfigError
from .fields import Grid, WindingNumber
from .geometry import TorusGeometry
from .relaxation import FlowParams

COMMANDS = ("constant-analysis", "flow", "sweep-mu", "winding-table", "geometry-dump")

DEFAULT_WINDING_TABLE = ((0, 0), (1, 0), (0, 1), (1, 1), (0, 3), (1, 4), (4, 1))

OUTPUT_DIR_ENV = "NEMATORUS_OUT"


def _parse_float(s):
    try:
        return float(s)
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {s!r}") from exc


def _parse_int(s):
    try:
        return int(s)
    except ValueError as exc:
        raise ConfigError(f"expected an integer, got {s!r}") from exc


def _parse_optional_float(s):
    return None if s == "" else _parse_float(s)


def _parse_dt(s):
    return "auto" if s == "auto" else _parse_float(s)


def _parse_pair(s):
    parts = s.split(",")
    if len(parts) != 2:
        raise ConfigError(f"expected 'H,K', got {s!r}")
    return (_parse_int(parts[0]), _parse_int(parts[1]))


def _parse_pair_list(s):
    items = [p for p in s.split(";") if p.strip()]
    if not items:
        raise ConfigError("expected 'h,k;h,k;...'")
    return tuple(_parse_pair(p.strip()) for p in items)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return ";".join(f"{a},{b}" for a, b in v)
        return ",".join(str(x) for x in v)
    return str(v)


@dataclass
class RunConfig:
    """Fully-defaulted run description; see KEY_SPECS for the file keys."""

    command: str = ""
    mu: float = None
    R: float = None
    r: float = None
    k: float = None
    k1: float = None
    k2: float = None
    k3: float = None
    n_theta: int = 128
    n_phi: int = 128
    dt: object = "auto"
    tol: float = 1e-8
    max_steps: int = 1_000_000
    snapshot_every: int = 10_000
    winding: tuple = (0, 0)
    base_angle: float = math.pi / 4.0
    noise: float = 0.0
    rng_seed: int = 0
    mu_lo: float = 1.2
    mu_hi: float = 1.9
    mu_tol: float = 0.01
    table_windings: tuple = DEFAULT_WINDING_TABLE
    table_noise: float = 0.05
    output_dir: str = ""
    jobs: int = 1

    # -- resolution to domain objects ------------------------------------

    def geometry(self) -> TorusGeometry:
        """Normalized solver geometry (r = 1); see physical_radii for input."""
        if self.R is not None or self.r is not None:
            if self.R is None or self.r is None:
                raise ConfigError("geometry.R and geometry.r must be given together")
            if self.mu is not None:
                raise ConfigError("give either geometry.mu or geometry.R/geometry.r, not both")
            return TorusGeometry.from_ratio(TorusGeometry(self.R, self.r).mu)
        mu = 1.8 if self.mu is None else self.mu
        return TorusGeometry.from_ratio(mu)

    def physical_radii(self):
        """(R, r) as given, or None when only a ratio was configured."""
        if self.R is not None and self.r is not None:
            return (self.R, self.r)
        return None

    def constants(self) -> ElasticConstants:
        anis = [v is not None for v in (self.k1, self.k2, self.k3)]
        if any(anis):
            if not all(anis):
                raise ConfigError("constants.k1, k2, k3 must be given together")
            if self.k is not None:
                raise ConfigError("give either constants.k or constants.k1/k2/k3, not both")
            return ElasticConstants(self.k1, self.k2, self.k3)
        return ElasticConstants.one_constant(1.0 if self.k is None else self.k)

    def grid(self) -> Grid:
        return Grid(self.n_theta, self.n_phi)

    def flow_params(self) -> FlowParams:
        k = self.constants()
        return FlowParams(k=k.k1 if k.is_one_constant else k,
                          dt=self.dt, tol=self.tol, max_steps=self.max_steps,
                          snapshot_every=self.snapshot_every)

    def seed_winding(self) -> WindingNumber:
        return WindingNumber(*self.winding)

    def resolved_output_dir(self) -> str:
        if self.output_dir:
            return self.output_dir
        return os.environ.get(OUTPUT_DIR_ENV, "nematorus-out")


# dotted file key -> (attribute, parser)
KEY_SPECS = {
    "command": ("command", str),
    "geometry.mu": ("mu", _parse_optional_float),
    "geometry.R": ("R", _parse_optional_float),
    "geometry.r": ("r", _parse_optional_float),
    "constants.k": ("k", _parse_optional_float),
    "constants.k1": ("k1", _parse_optional_float),
    "constants.k2": ("k2", _parse_optional_float),
    "constants.k3": ("k3", _parse_optional_float),
    "grid.n_theta": ("n_theta", _parse_int),
    "grid.n_phi": ("n_phi", _parse_int),
    "flow.dt": ("dt", _parse_dt),
    "flow.tol": ("tol", _parse_float),
    "flow.max_steps": ("max_steps", _parse_int),
    "flow.snapshot_every": ("snapshot_every", _parse_int),
    "seed.winding": ("winding", _parse_pair),
    "seed.base_angle": ("base_angle", _parse_float),
    "seed.noise": ("noise", _parse_float),
    "seed.rng_seed": ("rng_seed", _parse_int),
    "sweep.mu_lo": ("mu_lo", _parse_float),
    "sweep.mu_hi": ("mu_hi", _parse_float),
    "sweep.mu_tol": ("mu_tol", _parse_float),
    "table.windings": ("table_windings", _parse_pair_list),
    "table.noise": ("table_noise", _parse_float),
    "output_dir": ("output_dir", str),
    "jobs": ("jobs", _parse_int),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in KEY_SPECS.items()}


def parse_text(text: str) -> RunConfig:
    """Parse config text; raises ConfigError with line diagnostics."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KEY_SPECS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, parser = KEY_SPECS[key]
        try:
            values[attr] = parser(value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from None
    return RunConfig(**values)


def parse_file(path) -> RunConfig:
    with open(path) as f:
        return parse_text(f.read())


def serialize(cfg: RunConfig) -> str:
    """Emit every key (unset optionals as empty values) in file order."""
    lines = []
    for f in dataclass_fields(cfg):
        key = _ATTR_TO_KEY[f.name]
        lines.append(f"{key} = {_fmt(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def one_line(cfg: RunConfig) -> str:
    """Space-joined key=value form for CSV reproducibility stamps."""
    parts = []
    for f in dataclass_fields(cfg):
        parts.append(f"{_ATTR_TO_KEY[f.name]}={_fmt(getattr(cfg, f.name))}")
    return " ".join(parts)


def merge(cfg: RunConfig, overrides: dict) -> RunConfig:
    """New config with non-None override attributes applied."""
    values = {f.name: getattr(cfg, f.name) for f in dataclass_fields(cfg)}
    for name, value in overrides.items():
        if value is not None:
            values[name] = value
    return RunConfig(**values)
