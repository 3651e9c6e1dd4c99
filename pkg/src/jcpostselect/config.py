"""Sweep configuration and its flat ``key = value`` file format.

Recognised keys (all optional, defaults give the reference setting)::

    alpha        = 3.1622776601683795      # or "re,im"
    atoms        = 1,2,5
    r_min        = 0.0
    r_max        = 3.0
    r_step       = 0.005
    phi          = 0.0
    cutoff       = none                    # or a positive integer
    out          = out
    jobs         = 1
    wigner_r     = 0.2,0.4,0.51,1.0,1.5,2.5
    grid_re_min  = -6.5
    grid_re_max  = 6.5
    grid_im_min  = -6.5
    grid_im_max  = 6.5
    grid_points  = 261

Blank lines and ``#`` comments are ignored. Floats are written with
``repr`` so that parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .fock import MAX_ATOMS
from .wigner import GridSpec

__all__ = ["FIG4_R", "PRESETS", "SweepConfig", "apply_preset", "parse_config", "serialize_config"]

FIG4_R = (0.2, 0.4, 0.51, 1.0, 1.5, 2.5)
PRESETS = ("fig1", "fig2", "fig3", "fig4")


@dataclass(frozen=True)
class SweepConfig:
    alpha: complex = complex(math.sqrt(10.0))
    atoms: tuple[int, ...] = (1, 2, 5)
    r_min: float = 0.0
    r_max: float = 3.0
    r_step: float = 0.005
    phi: float = 0.0
    cutoff: int | None = None
    out: str = "out"
    jobs: int = 1
    wigner_r: tuple[float, ...] = FIG4_R
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        if not self.r_step > 0:
            raise ConfigError("r_step", f"must be > 0, got {self.r_step}")
        if not 0 <= self.r_min <= self.r_max:
            raise ConfigError("r_min", f"need 0 <= r_min <= r_max, got {self.r_min}, {self.r_max}")
        if not self.atoms:
            raise ConfigError("atoms", "at least one atom count is required")
        for n in self.atoms:
            if not 1 <= n <= MAX_ATOMS:
                raise ConfigError("atoms", f"each entry must lie in 1..{MAX_ATOMS}, got {n}")
        if self.cutoff is not None and self.cutoff < 1:
            raise ConfigError("cutoff", f"must be a positive integer, got {self.cutoff}")
        if self.jobs < 1:
            raise ConfigError("jobs", f"must be >= 1, got {self.jobs}")
        if any(r < 0 for r in self.wigner_r):
            raise ConfigError("wigner_r", "coupling values must be >= 0")

    def r_grid(self) -> np.ndarray:
        """``r_min, r_min + step, ...`` up to ``r_max`` (inclusive within 1e-9 steps)."""
        count = int(math.floor((self.r_max - self.r_min) / self.r_step + 1e-9)) + 1
        return self.r_min + self.r_step * np.arange(count)

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _parse_float(key, text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(key, f"must be finite, got {text!r}")
    return value


def _parse_int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}") from None


def parse_alpha(text: str) -> complex:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        return complex(_parse_float("alpha", parts[0]), 0.0)
    if len(parts) == 2:
        return complex(_parse_float("alpha", parts[0]), _parse_float("alpha", parts[1]))
    raise ConfigError("alpha", f"expected RE or RE,IM, got {text!r}")


def parse_int_list(key: str, text: str) -> tuple[int, ...]:
    return tuple(_parse_int(key, p.strip()) for p in text.split(",") if p.strip())


def parse_float_list(key: str, text: str) -> tuple[float, ...]:
    return tuple(_parse_float(key, p.strip()) for p in text.split(",") if p.strip())


_GRID_KEYS = {
    "grid_re_min": "re_min",
    "grid_re_max": "re_max",
    "grid_im_min": "im_min",
    "grid_im_max": "im_max",
    "grid_points": "points",
}


def config_from_mapping(values: dict[str, str], base: SweepConfig | None = None) -> SweepConfig:
    """Build a config from string values, starting from ``base`` (defaults if ``None``)."""
    base = base or SweepConfig()
    kwargs = {}
    grid_kwargs = {}
    for key, text in values.items():
        if key == "alpha":
            kwargs["alpha"] = parse_alpha(text)
        elif key == "atoms":
            kwargs["atoms"] = parse_int_list(key, text)
        elif key in ("r_min", "r_max", "r_step", "phi"):
            kwargs[key] = _parse_float(key, text)
        elif key == "cutoff":
            kwargs["cutoff"] = None if text.strip().lower() in ("", "none") else _parse_int(key, text)
        elif key == "out":
            kwargs["out"] = text
        elif key == "jobs":
            kwargs["jobs"] = _parse_int(key, text)
        elif key == "wigner_r":
            kwargs["wigner_r"] = parse_float_list(key, text)
        elif key in _GRID_KEYS:
            conv = _parse_int if key == "grid_points" else _parse_float
            grid_kwargs[_GRID_KEYS[key]] = conv(key, text)
        else:
            raise ConfigError(key, "unknown configuration key")
    if grid_kwargs:
        try:
            kwargs["grid"] = replace(base.grid, **grid_kwargs)
        except ValueError as exc:
            raise ConfigError("grid", str(exc)) from None
    return replace(base, **kwargs)


def parse_config(text: str, base: SweepConfig | None = None) -> SweepConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return config_from_mapping(values, base)


def serialize_config(config: SweepConfig) -> str:
    grid = config.grid
    rows = [
        ("alpha", f"{_fmt_float(config.alpha.real)},{_fmt_float(config.alpha.imag)}"),
        ("atoms", ",".join(str(n) for n in config.atoms)),
        ("r_min", _fmt_float(config.r_min)),
        ("r_max", _fmt_float(config.r_max)),
        ("r_step", _fmt_float(config.r_step)),
        ("phi", _fmt_float(config.phi)),
        ("cutoff", "none" if config.cutoff is None else str(config.cutoff)),
        ("out", config.out),
        ("jobs", str(config.jobs)),
        ("wigner_r", ",".join(_fmt_float(r) for r in config.wigner_r)),
        ("grid_re_min", _fmt_float(grid.re_min)),
        ("grid_re_max", _fmt_float(grid.re_max)),
        ("grid_im_min", _fmt_float(grid.im_min)),
        ("grid_im_max", _fmt_float(grid.im_max)),
        ("grid_points", str(grid.points)),
    ]
    return "".join(f"{k} = {v}\n" for k, v in rows)


def apply_preset(config: SweepConfig, preset: str) -> SweepConfig:
    """Figure-data presets. fig1-fig3 use the full r sweep; fig4 the six Wigner couplings."""
    if preset not in PRESETS:
        raise ConfigError("preset", f"expected one of {', '.join(PRESETS)}, got {preset!r}")
    base = replace(config, atoms=(1, 2, 5), r_min=0.0, r_max=3.0, r_step=0.005)
    if preset == "fig2":
        return replace(base, phi=0.0)
    if preset == "fig4":
        return replace(base, wigner_r=FIG4_R)
    return base
