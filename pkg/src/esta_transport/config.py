"""Flat ``key = value`` sweep configuration with typed fields."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .control import FAMILIES
from .dynamics import SPLITTING_ORDERS, Numerics
from .lattice import ERROR_KINDS
from .noise import NOISE_KINDS
from .units import PhysicalParams


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def _tuple(kind):
    return field(default_factory=lambda: kind)


@dataclass
class SweepConfig:
    mass_amu: float = 133.0
    wavelength_nm: float = 866.0
    alpha: float = 150.0
    distance_sites: float = 1.0

    trajectories: tuple = _tuple(FAMILIES)
    tf_min: float = 0.8
    tf_max: float = 1.45
    tf_step: float = 0.05
    tf_over_tau: float = 1.1

    error_kinds: tuple = _tuple(ERROR_KINDS)
    deviation_kind: str = "correlated"
    noise_kinds: tuple = _tuple(NOISE_KINDS)
    delta_min: float = -0.1
    delta_max: float = 0.1
    delta_step: float = 0.01
    f_reference: float = 0.9
    sensitivity_method: str = "fd"
    deviation_method: str = "finite_difference"

    basis_size: int = 8
    mode_cutoff: int = 4
    samples: int = 1000
    mc_realizations: int = 0

    grid_points: int = 2048
    grid_pad_sigma: float = 12.0
    dt_over_tau: float = 1.0 / 2000.0
    imag_time_tol: float = 1e-12
    splitting_order: int = 4

    out_dir: str = "out"
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        def fail(key, why):
            raise ConfigError(f"invalid value for {key!r}: {why}")

        try:
            PhysicalParams(self.mass_amu, self.wavelength_nm, self.alpha, self.distance_sites)
        except ValueError as exc:
            key = str(exc).split()[0]
            fail(key, str(exc))
        for key, allowed in (("trajectories", FAMILIES), ("error_kinds", ERROR_KINDS),
                             ("noise_kinds", NOISE_KINDS)):
            values = getattr(self, key)
            if not values:
                fail(key, "must not be empty")
            bad = [v for v in values if v not in allowed]
            if bad:
                fail(key, f"unknown entries {bad}; allowed {list(allowed)}")
        if self.deviation_kind not in ERROR_KINDS:
            fail("deviation_kind", f"expected one of {list(ERROR_KINDS)}")
        if self.sensitivity_method not in ("fd", "tdpt"):
            fail("sensitivity_method", "expected 'fd' or 'tdpt'")
        if self.deviation_method not in ("finite_difference", "analytic"):
            fail("deviation_method", "expected 'finite_difference' or 'analytic'")
        for lo, hi, step in (("tf_min", "tf_max", "tf_step"), ("delta_min", "delta_max", "delta_step")):
            if not getattr(self, step) > 0:
                fail(step, "must be positive")
            if getattr(self, hi) < getattr(self, lo):
                fail(hi, f"must not be below {lo}")
        if not self.tf_min > 0:
            fail("tf_min", "must be positive")
        if not self.tf_over_tau > 0:
            fail("tf_over_tau", "must be positive")
        if self.delta_min <= -1.0:
            fail("delta_min", "must exceed -1")
        if not 0.0 < self.f_reference < 1.0:
            fail("f_reference", "must lie in (0, 1)")
        for key, low in (("basis_size", 1), ("mode_cutoff", 1), ("samples", 2), ("workers", 1),
                         ("mc_realizations", 0)):
            if getattr(self, key) < low:
                fail(key, f"must be >= {low}")
        if self.mc_realizations % 2:
            fail("mc_realizations", "must be even (antithetic pairs)")
        try:
            self.numerics.grid(1.0)
        except ValueError as exc:
            fail("grid_points" if "n_points" in str(exc) else "grid_pad_sigma", str(exc))
        if not 0 < self.dt_over_tau <= 0.01:
            fail("dt_over_tau", "must lie in (0, 0.01]")
        if not 0 < self.imag_time_tol < 1e-6:
            fail("imag_time_tol", "must lie in (0, 1e-6)")
        if self.splitting_order not in SPLITTING_ORDERS:
            fail("splitting_order", f"expected one of {list(SPLITTING_ORDERS)}")

    @property
    def physical(self) -> PhysicalParams:
        return PhysicalParams(self.mass_amu, self.wavelength_nm, self.alpha, self.distance_sites)

    @property
    def numerics(self) -> Numerics:
        return Numerics(self.grid_points, self.grid_pad_sigma, self.dt_over_tau, self.imag_time_tol,
                        self.splitting_order)

    @property
    def tf_grid(self) -> np.ndarray:
        return _grid(self.tf_min, self.tf_max, self.tf_step)

    @property
    def delta_grid(self) -> np.ndarray:
        return _grid(self.delta_min, self.delta_max, self.delta_step)

    def replace(self, **changes) -> "SweepConfig":
        return dataclasses.replace(self, **changes)


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 10)


_FIELDS = {f.name: f for f in dataclasses.fields(SweepConfig)}


def coerce(key: str, text: str):
    """Parse ``text`` into the type of field ``key``."""
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    default = _FIELDS[key].default
    if default is dataclasses.MISSING:
        default = _FIELDS[key].default_factory()
    text = text.strip()
    try:
        if isinstance(default, tuple):
            return tuple(s.strip() for s in text.split(",") if s.strip())
        if isinstance(default, bool):
            return {"true": True, "false": False}[text.lower()]
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except (ValueError, KeyError):
        raise ConfigError(f"invalid value for {key!r}: {text!r}") from None
    return text


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = coerce(key, value)
    return values


def load_config(path: str | Path | None = None, **overrides) -> SweepConfig:
    """Read a config file (optional) and apply overrides given as typed values."""
    values = parse_config_text(Path(path).read_text()) if path else {}
    for key in overrides:
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
    values.update(overrides)
    return SweepConfig(**values)
