"""Relay power allocation, duplex crossover points and inverse design.

Every routine optimizes the large-M approximation of the sum rate unless
an ``objective`` argument says otherwise. Power-like searches run in the
log domain, so a relative tolerance maps to a fixed number of iterations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import SystemConfig
from .rate_asym import approx_rate, half_duplex_rate
from .rate_exact import exact_rate

__all__ = [
    "SearchBracket",
    "DesignError",
    "NoInteriorMaximum",
    "NoSignChange",
    "TargetUnreachable",
    "MultimodalWarning",
    "DEFAULT_POWER_BRACKET",
    "DEFAULT_LI_BRACKET",
    "DEFAULT_SOURCE_BRACKET",
    "DEFAULT_ANTENNA_BRACKET",
    "optimal_relay_power_homogeneous",
    "optimize_relay_power",
    "duplex_crossover_loop_interference",
    "duplex_crossover_antennas",
    "required_source_power",
    "required_antennas",
]


class DesignError(ValueError):
    """A design query has no answer under the given bracket or target."""


class NoInteriorMaximum(DesignError):
    pass


class NoSignChange(DesignError):
    pass


class TargetUnreachable(DesignError):
    pass


class MultimodalWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SearchBracket:
    """Search interval ``[lo, hi]``.

    For powers ``tol`` is relative (the returned point is within a factor
    ``1 + tol`` of the true optimum or root); for antenna counts it is
    ignored since the search is exact over integers.
    """

    lo: float
    hi: float
    tol: float = 1e-4

    def __post_init__(self):
        if not (self.lo > 0 and self.hi > self.lo):
            raise ValueError(f"need 0 < lo < hi, got [{self.lo}, {self.hi}]")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")


DEFAULT_POWER_BRACKET = SearchBracket(1e-4, 1e4)
DEFAULT_LI_BRACKET = SearchBracket(1e-4, 1e4)
DEFAULT_SOURCE_BRACKET = SearchBracket(1e-6, 1e4)
DEFAULT_ANTENNA_BRACKET = SearchBracket(1, 100_000)

_SCAN_POINTS = 41
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _sum_rate(config: SystemConfig, objective: str = "approx") -> float:
    if objective == "approx":
        return approx_rate(config).sum_rate
    if objective == "exact":
        return exact_rate(config).sum_rate
    raise ValueError(f"objective must be 'approx' or 'exact', got {objective!r}")


def _hd_sum(config: SystemConfig) -> float:
    return math.fsum(half_duplex_rate(config).tolist())


def optimal_relay_power_homogeneous(config: SystemConfig) -> float:
    """Closed-form optimal relay power ``sqrt(alpha p_S K / sigma_LI2)``.

    Valid when every large-scale gain is the same; M, theta and the pilot
    power do not enter.

    Raises
    ------
    DesignError
        If ``sigma_LI2 == 0`` (the optimum is unbounded) or the gains are
        not homogeneous.
    """
    if config.sigma_LI2 == 0:
        raise DesignError("sigma_LI2 = 0: the rate increases with p_R without bound")
    if not config.is_homogeneous:
        raise DesignError("closed-form relay power needs homogeneous large-scale gains")
    return math.sqrt(config.alpha * config.p_S * config.K / config.sigma_LI2)


def _golden_max(f, lo, hi, tol):
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def optimize_relay_power(
    config: SystemConfig, bracket: SearchBracket = DEFAULT_POWER_BRACKET
) -> float:
    """Relay power maximizing the approximate sum rate, by golden-section search.

    A coarse log-spaced scan locates the peak first. The scan warns with
    :class:`MultimodalWarning` when it sees more than one local maximum, and
    the golden-section refinement runs around the best scan point.

    Raises
    ------
    NoInteriorMaximum
        If the best scan point is a bracket endpoint.
    """
    lo, hi = math.log10(bracket.lo), math.log10(bracket.hi)

    def f(x):
        return _sum_rate(config.replace(p_R=10.0**x))

    grid = np.linspace(lo, hi, _SCAN_POINTS)
    vals = np.array([f(x) for x in grid])
    i = int(np.argmax(vals))
    if i in (0, _SCAN_POINTS - 1):
        raise NoInteriorMaximum(
            f"no interior maximum in [{bracket.lo:g}, {bracket.hi:g}]: "
            f"the sum rate peaks at the {'lower' if i == 0 else 'upper'} end"
        )
    peaks = np.sum((vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:]))
    if peaks > 1:
        warnings.warn(
            f"sum rate has {peaks} local maxima over the bracket; "
            "refining around the largest", MultimodalWarning, stacklevel=2,
        )
    x = _golden_max(f, grid[i - 1], grid[i + 1], math.log10(1.0 + bracket.tol))
    return 10.0**x


def _bisect(g, lo, hi, tol):
    """Root of ``g`` on ``[lo, hi]`` given ``g(lo) < 0 <= g(hi)``; returns hi side."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def duplex_crossover_loop_interference(
    config: SystemConfig, bracket: SearchBracket = DEFAULT_LI_BRACKET
) -> float:
    """Loop-interference level where full- and half-duplex sum rates coincide.

    Raises
    ------
    NoSignChange
        If full duplex does not win at the low end and lose at the high end.
    """
    def g(x):
        cfg = config.replace(sigma_LI2=10.0**x)
        return _hd_sum(cfg) - _sum_rate(cfg)

    lo, hi = math.log10(bracket.lo), math.log10(bracket.hi)
    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo < 0 <= g_hi):
        raise NoSignChange(
            f"modes do not cross in [{bracket.lo:g}, {bracket.hi:g}]: "
            f"FD - HD = {-g_lo:.4g} at lo, {-g_hi:.4g} at hi"
        )
    return 10.0 ** _bisect(g, lo, hi, math.log10(1.0 + bracket.tol))


def duplex_crossover_antennas(
    config: SystemConfig, bracket: SearchBracket = DEFAULT_ANTENNA_BRACKET
) -> int:
    """Smallest antenna count at which full duplex matches or beats half duplex.

    Raises
    ------
    NoSignChange
        If half duplex is not ahead at ``lo`` or not behind at ``hi``.
    """
    def g(M):
        cfg = config.replace(M=int(M))
        return _sum_rate(cfg) - _hd_sum(cfg)

    lo, hi = int(math.ceil(bracket.lo)), int(math.floor(bracket.hi))
    if not (g(lo) < 0 <= g(hi)):
        raise NoSignChange(f"modes do not cross for M in [{lo}, {hi}]")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if g(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def required_source_power(
    config: SystemConfig,
    target_sum_rate: float,
    bracket: SearchBracket = DEFAULT_SOURCE_BRACKET,
    coupling: Callable[[float], float] | None = None,
    objective: str = "approx",
) -> float:
    """Smallest source power reaching ``target_sum_rate``.

    Parameters
    ----------
    coupling : callable, optional
        Relay power as a function of source power. Defaults to
        ``p_R = K * p_S``.
    objective : {"approx", "exact"}

    Raises
    ------
    TargetUnreachable
        If the target is not met at ``bracket.hi``.

    Notes
    -----
    The sum rate is assumed to increase with p_S under the coupling. A
    coarse scan checks this and emits a warning if it is violated.
    """
    if coupling is None:
        K = config.K
        coupling = lambda p: K * p  # noqa: E731

    def g(x):
        p = 10.0**x
        return _sum_rate(config.replace(p_S=p, p_R=coupling(p)), objective) - target_sum_rate

    lo, hi = math.log10(bracket.lo), math.log10(bracket.hi)
    g_hi = g(hi)
    if g_hi < 0:
        raise TargetUnreachable(
            f"sum rate {g_hi + target_sum_rate:.4g} at p_S={bracket.hi:g} is below "
            f"the target {target_sum_rate:g}"
        )
    if g(lo) >= 0:
        return bracket.lo
    scan = np.array([g(x) for x in np.linspace(lo, hi, 21)])
    if np.any(np.diff(scan) < 0):
        warnings.warn("sum rate is not monotone in p_S over the bracket", stacklevel=2)
    return 10.0 ** _bisect(g, lo, hi, math.log10(1.0 + bracket.tol))


def required_antennas(
    config: SystemConfig, target_sum_rate: float, max_M: int, objective: str = "exact"
) -> int:
    """Smallest antenna count whose sum rate reaches ``target_sum_rate``.

    Raises
    ------
    TargetUnreachable
        If even ``max_M`` antennas fall short.
    """
    def rate(M):
        return _sum_rate(config.replace(M=M), objective)

    if rate(max_M) < target_sum_rate:
        raise TargetUnreachable(
            f"sum rate {rate(max_M):.4g} at M={max_M} is below the target {target_sum_rate:g}"
        )
    lo, hi = 0, max_M  # rate(lo) < target is implied for lo = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if rate(mid) >= target_sum_rate:
            hi = mid
        else:
            lo = mid
    return hi
