"""Large-antenna approximations, limits and the half-duplex baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import estimation_stats
from .config import SystemConfig
from .rate_exact import RateBreakdown, _assemble, amplification_gain

__all__ = [
    "UNBOUNDED",
    "Unbounded",
    "AsymptoticReport",
    "approx_rate",
    "limit_rate_infinite_M",
    "scaled_power_limit",
    "placement_rates",
    "half_duplex_rate",
    "asymptotic_report",
]

# theta above this is treated as a perfect destination ADC
THETA_ONE_GUARD = 1.0 - 1e-12


class Unbounded:
    """Marker for a rate that grows without bound as M goes to infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __bool__(self):
        return False


UNBOUNDED = Unbounded()


def _common(config: SystemConfig):
    st = estimation_stats(config)
    a, b = st.sigma2_SR, st.sigma2_RD
    return a, b, np.sum(config.beta_SR), np.sum(a**2 * b)


def _tilde_terms(config: SystemConfig) -> dict:
    a, b, S, a2b = _common(config)
    bs, br = config.beta_SR, config.beta_RD
    al, th = config.alpha, config.theta
    pS, pR, li, M = config.p_S, config.p_R, config.sigma_LI2, config.M
    qa, qt = (1.0 - al) / al, (1.0 - th) / th

    A = pS * M * a * b
    B = pS * (bs * b + br * a)
    C = pS * (b * (S - bs) + br * (a2b - a**2 * b) / (a * b))
    D = pR * li * b
    E = b.copy()
    F = qa * b * (pS * (a + S) + pR * li + 1.0)
    G = pS * a2b / (pR * a * b)
    H = (
        qt * pS * (M * a * b + a * br / b * np.sum(b))
        + qt * pS * b * (S + (pR * li + 1.0) / (al * pS))
        + qa * qt * b * pS * (a + S)
        + qt * pS * a2b / (pR * a * b)
    )
    return dict(A=A, B=B, C=C, D=D, E=E, F=F, G=G, H=H)


def approx_rate(config: SystemConfig) -> RateBreakdown:
    """Large-M approximation of every SINR term and the resulting rates."""
    return _assemble(_tilde_terms(config), amplification_gain(config), config.prelog)


def limit_rate_infinite_M(config: SystemConfig):
    """Per-user rate as M grows without bound, or ``UNBOUNDED`` if theta = 1.

    The limit depends on the destination ADC only.
    """
    th = config.theta
    if th > THETA_ONE_GUARD:
        return UNBOUNDED
    return np.full(config.K, config.prelog * np.log2(1.0 + th / (1.0 - th)))


def scaled_power_limit(config: SystemConfig, E_S: float, E_R: float) -> np.ndarray:
    """Per-user rate limit when ``p_S = E_S / M`` and ``p_R = E_R / M``.

    Pilot power stays at ``config.p_p``; the config's p_S, p_R and M are
    ignored.
    """
    if E_S <= 0 or E_R <= 0:
        raise ValueError("E_S and E_R must be positive")
    a, b, _, a2b = _common(config)
    al, th = config.alpha, config.theta
    den = (1.0 - th) + 1.0 / (al * E_S * a) + a2b / (E_R * a**2 * b**2)
    return config.prelog * np.log2(1.0 + th / den)


def placement_rates(config: SystemConfig, rho: float):
    """Rates with low-resolution ADCs only at the relay or only at the destinations.

    Returns ``(rate_relay_only, rate_dest_only)``: the first uses
    ``alpha = rho, theta = 1``; the second ``alpha = 1, theta = rho`` with its
    own destination-quantization term.
    """
    if not (0.0 < rho < 1.0):
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    relay = approx_rate(config.replace(alpha=rho, theta=1.0)).rate

    cfg = config.replace(alpha=1.0, theta=rho)
    terms = _tilde_terms(cfg)
    a, b, S, _ = _common(cfg)
    pS, pR, li, M = cfg.p_S, cfg.p_R, cfg.sigma_LI2, cfg.M
    qt = (1.0 - rho) / rho
    terms["F"] = np.zeros(cfg.K)
    terms["H"] = (
        qt * pS * (M * a * b + a * cfg.beta_RD / b * np.sum(b))
        + qt * pS * b * (S + (pR * li + 1.0) / pS)
    )
    dest = _assemble(terms, amplification_gain(cfg), cfg.prelog).rate
    return relay, dest


def half_duplex_rate(config: SystemConfig) -> np.ndarray:
    """Per-user rate of the half-duplex relay with the same energy budget.

    Pass the full-duplex config: the doubling of source and relay power is
    applied here, and the two hops share the data phase, so the prelog is
    halved. There is no loop interference, so sigma_LI2 has no effect.
    """
    t = _tilde_terms(config)
    a, b, S, a2b = _common(config)
    al, th = config.alpha, config.theta
    pS, pR, M = config.p_S, config.p_R, config.M
    qa, qt = (1.0 - al) / al, (1.0 - th) / th

    F_hd = qa * b * (2 * pS * (a + S) + 1.0)
    H_hd = (
        qt * 2 * pS * (M * a * b + a * config.beta_RD / b * np.sum(b))
        + qt * 2 * pS * b * (S + 1.0 / (2 * al * pS))
        + qa * qt * b * 2 * pS * (a + S)
        + qt * pS * a2b / (pR * a * b)
    )
    den = 2 * t["B"] + 2 * t["C"] + t["E"] + F_hd + t["G"] + H_hd
    return config.prelog / 2.0 * np.log2(1.0 + 2 * t["A"] / den)


@dataclass(frozen=True)
class AsymptoticReport:
    approx_breakdown: RateBreakdown
    limit_rate: np.ndarray | Unbounded
    scaled_limit_rate: np.ndarray
    hd_rate: np.ndarray


def asymptotic_report(config: SystemConfig, E_S: float, E_R: float) -> AsymptoticReport:
    return AsymptoticReport(
        approx_breakdown=approx_rate(config),
        limit_rate=limit_rate_infinite_M(config),
        scaled_limit_rate=scaled_power_limit(config, E_S, E_R),
        hd_rate=half_duplex_rate(config),
    )
