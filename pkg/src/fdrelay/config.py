"""Scenario parameters and unit conversions."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .adc import AdcModel

__all__ = ["SystemConfig", "ConfigError", "db_to_linear", "linear_to_db"]


class ConfigError(ValueError):
    """A configuration violates one of the scenario invariants."""


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(np.asarray(value, dtype=float))


@dataclass(frozen=True)
class SystemConfig:
    """All parameters of one relaying scenario. Powers are linear.

    ``tau_p`` defaults to ``K`` and the large-scale gains default to ones.
    """

    M: int
    K: int
    p_S: float
    p_R: float
    p_p: float
    sigma_LI2: float
    relay_adc: AdcModel = field(default_factory=AdcModel.perfect)
    dest_adc: AdcModel = field(default_factory=AdcModel.perfect)
    tau_c: int = 196
    tau_p: int | None = None
    beta_SR: np.ndarray | None = None
    beta_RD: np.ndarray | None = None

    def __post_init__(self):
        for name in ("M", "K", "tau_c"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.tau_p is None:
            object.__setattr__(self, "tau_p", self.K)
        if int(self.tau_p) != self.tau_p:
            raise ConfigError(f"tau_p must be an integer, got {self.tau_p!r}")
        object.__setattr__(self, "tau_p", int(self.tau_p))
        if self.tau_p < self.K:
            raise ConfigError(f"tau_p >= K violated: tau_p={self.tau_p}, K={self.K}")
        if self.tau_c < 2 * self.tau_p:
            raise ConfigError(
                f"tau_c >= 2*tau_p violated: tau_c={self.tau_c}, tau_p={self.tau_p}"
            )
        for name in ("p_S", "p_R", "p_p"):
            v = float(getattr(self, name))
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive and finite, got {v}")
            object.__setattr__(self, name, v)
        li = float(self.sigma_LI2)
        if not (li >= 0 and math.isfinite(li)):
            raise ConfigError(f"sigma_LI2 must be nonnegative, got {li}")
        object.__setattr__(self, "sigma_LI2", li)
        for name in ("beta_SR", "beta_RD"):
            b = getattr(self, name)
            b = np.ones(self.K) if b is None else np.array(b, dtype=float).reshape(-1)
            if b.shape != (self.K,):
                raise ConfigError(f"{name} must have length K={self.K}, got {b.shape[0]}")
            if np.any(~(b > 0)) or not np.all(np.isfinite(b)):
                raise ConfigError(f"{name} entries must be positive")
            b.setflags(write=False)
            object.__setattr__(self, name, b)
        for name in ("relay_adc", "dest_adc"):
            if not isinstance(getattr(self, name), AdcModel):
                raise ConfigError(f"{name} must be an AdcModel")

    @property
    def alpha(self) -> float:
        return self.relay_adc.rho

    @property
    def theta(self) -> float:
        return self.dest_adc.rho

    @property
    def prelog(self) -> float:
        """Fraction of the coherence interval left for data."""
        return (self.tau_c - 2 * self.tau_p) / self.tau_c

    @property
    def is_homogeneous(self) -> bool:
        b = np.concatenate([self.beta_SR, self.beta_RD])
        return bool(np.all(b == b[0]))

    def replace(self, **changes) -> "SystemConfig":
        """Copy with some fields changed. ``alpha``/``theta`` set raw rhos."""
        if "alpha" in changes:
            changes["relay_adc"] = AdcModel.from_rho(changes.pop("alpha"))
        if "theta" in changes:
            changes["dest_adc"] = AdcModel.from_rho(changes.pop("theta"))
        if "K" in changes and "tau_p" not in changes:
            changes["tau_p"] = None
        if "K" in changes:
            for name in ("beta_SR", "beta_RD"):
                if name not in changes and len(getattr(self, name)) != changes["K"]:
                    changes[name] = None
        return dataclasses.replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, SystemConfig):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f.name), getattr(other, f.name))
            for f in dataclasses.fields(self)
        )

    __hash__ = None
