"""Exact closed-form achievable rate with MRC/MRT relaying.

The SINR of user k is ``A / (B + C + D + E + F + G + H)`` where, after
normalizing by the common gain ``alpha^2 theta^2 gamma^2``:

A  desired signal power          E  relay thermal noise
B  estimation-error variance     F  relay quantization noise
C  inter-pair interference       G  destination thermal noise
D  loop interference             H  destination quantization noise
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import estimation_stats
from .config import SystemConfig

__all__ = ["RateBreakdown", "amplification_gain", "exact_breakdown", "exact_rate"]

TERMS = ("A", "B", "C", "D", "E", "F", "G", "H")


@dataclass(frozen=True)
class RateBreakdown:
    """Per-user SINR terms, amplification gain and the resulting rates."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    gamma: float
    sinr: np.ndarray
    rate: np.ndarray
    sum_rate: float

    def terms(self) -> dict:
        return {name: getattr(self, name) for name in TERMS}


def _assemble(terms: dict, gamma: float, prelog: float, scale: float = 1.0) -> RateBreakdown:
    """Build a RateBreakdown from (possibly scaled) terms.

    The SINR is formed from the scaled terms; the stored terms are
    multiplied back by ``scale``. Denominators are summed with ``fsum``.
    """
    K = len(terms["A"])
    den = np.array(
        [math.fsum(float(terms[t][k]) for t in TERMS[1:]) for k in range(K)]
    )
    sinr = terms["A"] / den
    rate = prelog * np.log2(1.0 + sinr)
    stored = {t: np.asarray(terms[t], dtype=float) * scale for t in TERMS}
    return RateBreakdown(
        **stored, gamma=float(gamma), sinr=sinr, rate=rate,
        sum_rate=math.fsum(rate.tolist()),
    )


def _gain_denominator(config: SystemConfig, a, b) -> float:
    """``p_R / (M gamma)^2``, i.e. the bracket under the square root."""
    al, M = config.alpha, config.M
    return (
        config.p_S * np.sum(a**2 * b) * (M * al**2 + al * (1.0 - al))
        + al * np.sum(a * b)
        * (config.p_S * np.sum(config.beta_SR) + config.p_R * config.sigma_LI2 + 1.0)
    )


def amplification_gain(config: SystemConfig) -> float:
    """Closed-form relay amplification factor gamma."""
    st = estimation_stats(config)
    q = _gain_denominator(config, st.sigma2_SR, st.sigma2_RD)
    return math.sqrt(config.p_R / q) / config.M


def exact_breakdown(config: SystemConfig, printed_h: bool = False) -> RateBreakdown:
    """All eight SINR terms for every user.

    Terms are evaluated divided by ``M**4`` (so large-M limits stay well
    scaled) and multiplied back when stored.

    With ``printed_h=True`` the destination-side signal power inside H uses
    ``a_k (M a_k + S) beta_RD,k sum_i b_i`` for its second part instead of
    ``beta_RD,k sum_n a_n b_n (M a_n + S)``. The two agree whenever all users
    share the same large-scale gains; only the latter matches Monte Carlo in
    heterogeneous settings.
    """
    st = estimation_stats(config)
    a, b = st.sigma2_SR, st.sigma2_RD
    bs, br = config.beta_SR, config.beta_RD
    al, th = config.alpha, config.theta
    pS, pR, li = config.p_S, config.p_R, config.sigma_LI2
    M = config.M
    i = 1.0 / M
    S = np.sum(bs)
    ab = np.sum(a * b)
    a2b = np.sum(a**2 * b)

    A = pS * a**2 * b**2
    B = pS * (i * a * b * (bs * b + br * a) + i**2 * bs * br * ab)
    C = pS * (i * (a * b**2 * (S - bs) + br * (a2b - a**2 * b)) + i**2 * br * (S - bs) * ab)
    E = i * a * b**2 + i**2 * br * ab
    D = pR * li * E
    relay_in = i * a * b**2 * (a + S) + i**2 * br * np.sum(a * b * (a + S))
    F = (1.0 - al) / al * (pS * relay_in + (pR * li + 1.0) * E)
    G = np.full(config.K, _gain_denominator(config, a, b) / (al**2 * pR) * i**2)
    if printed_h:
        sig = a * b**2 * (a + S * i) + i * a * (a + S * i) * br * np.sum(b)
    else:
        sig = a * b**2 * (a + S * i) + i * br * np.sum(a * b * (a + S * i))
    # H collects everything the destination ADC sees, scaled by (1-theta)/theta
    H = (1.0 - th) / th * (pS * sig + D + E + F + G)

    terms = dict(A=A, B=B, C=C, D=D, E=E, F=F, G=G, H=H)
    return _assemble(terms, amplification_gain(config), config.prelog, scale=float(M) ** 4)


def exact_rate(config: SystemConfig, printed_h: bool = False) -> RateBreakdown:
    """Per-user and sum achievable rate (bits/s/Hz) from the exact terms."""
    return exact_breakdown(config, printed_h=printed_h)
