"""Monte-Carlo oracle for the closed-form rate terms.

Each realization draws fresh channels, runs quantized pilot training and
records a handful of channel functionals (per-user bilinear forms of the
MRC/MRT relay matrix and the pieces of the relay power constraint). Symbols
and thermal noise are never drawn: every rate term is an expectation of one
of these functionals, with the relay quantization noise entering through its
covariance conditioned on the realization.

Random streams
--------------
Realizations are grouped in blocks of ``BLOCK`` consecutive indices. Block
``j`` gets its own PCG64 stream seeded by ``SeedSequence(seed,
spawn_key=(j,))`` and draws one standard-normal array of shape
``(BLOCK, per_realization)``; realization ``i`` uses row ``i % BLOCK``. Row
contents do not depend on how many rows are drawn, so any split of
``[0, n)`` into ``start``/``n`` pieces reproduces the single-run values
exactly, and pooled means follow from concatenation in index order.

Loop channel
------------
``loop="full"`` draws the M x M loop channel. ``loop="subspace"`` draws only
its projection onto the column space of the source-relay estimate, which is
all that the loop-interference functionals see, and replaces the per-antenna
loop power in the quantization-noise covariance by its conditional mean.
Both give unbiased term estimates; the second costs O(MK) instead of O(M^2)
per realization. ``"auto"`` picks full for ``M <= FULL_LOOP_MAX_M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ChannelSet,
    complex_normal,
    draw_channels,
    mrc_mrt_products,
    simulate_pilot_estimation,
)
from .config import SystemConfig
from .rate_exact import TERMS

__all__ = [
    "BLOCK",
    "McEstimate",
    "McTermReport",
    "Functionals",
    "sample_functionals",
    "terms_from_functionals",
    "simulate_terms",
    "simulate_gamma",
    "simulate_rate",
]

BLOCK = 50
FULL_LOOP_MAX_M = 128
MIN_REALIZATIONS = 100

_USER_COLS = ("xr", "xi", "x2", "c", "lr", "e", "qS", "qR")
_SCALAR_COLS = ("fgsr", "fgrr", "fn", "fqS", "fqR")


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error. Arrays hold one entry per user."""

    mean: float | np.ndarray
    std_error: float | np.ndarray
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 realizations, got {self.n}")

    def z_score(self, reference):
        """``(mean - reference) / std_error``; 0 where both differences vanish."""
        diff = np.asarray(self.mean - reference, dtype=float)
        se = np.asarray(self.std_error, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(diff == 0.0, 0.0, diff / se)
        return z if z.ndim else float(z)


@dataclass(frozen=True)
class McTermReport:
    """Monte-Carlo estimates of every SINR term, gamma and the rates.

    ``terms`` maps ``"A"`` .. ``"H"`` to per-user estimates on the same
    scale as :class:`~fdrelay.rate_exact.RateBreakdown`; ``term_means`` holds
    the average over users of each, with its own standard error. ``raw`` holds the
    underlying expectations before the power and ADC factors are applied:

    ``desired``       ``|E{g_RD,k^T F g_SR,k}|^2``
    ``error_var``     ``Var(g_RD,k^T F g_SR,k)``
    ``interpair``     ``sum_{j != k} E{|g_RD,k^T F g_SR,j|^2}``
    ``loop``          ``E{||g_RD,k^T F G_RR||^2}``
    ``relay_noise``   ``E{||g_RD,k^T F||^2}``
    ``relay_quant``   ``E{|g_RD,k^T F n_q|^2}`` with the AQNM covariance
    ``FG_SR``, ``FG_RR``, ``F``, ``Fn_R``  the four power-constraint pieces
    """

    terms: dict
    term_means: dict
    raw: dict
    gamma: McEstimate
    sinr: McEstimate
    rate: McEstimate
    sum_rate: McEstimate
    n: int
    loop: str


@dataclass
class Functionals:
    """Per-realization functionals for realizations ``start .. start+n-1``."""

    data: np.ndarray
    K: int
    start: int
    seed: int
    loop: str
    key: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def column(self, name):
        if name in _USER_COLS:
            i = _USER_COLS.index(name) * self.K
            return self.data[:, i : i + self.K]
        i = len(_USER_COLS) * self.K + _SCALAR_COLS.index(name)
        return self.data[:, i]

    def concat(self, other: "Functionals") -> "Functionals":
        """Pool with the partition that follows this one in index order."""
        if other.key != self.key or other.seed != self.seed or other.loop != self.loop:
            raise ValueError("cannot pool functionals from different samplers")
        if other.start != self.start + self.n:
            raise ValueError(
                f"partitions are not contiguous: {self.start}+{self.n} != {other.start}"
            )
        return Functionals(
            np.concatenate([self.data, other.data]), self.K, self.start,
            self.seed, self.loop, self.key,
        )


def _sampling_key(config: SystemConfig) -> tuple:
    # everything the channel sample depends on; p_S, p_R, theta and tau_c
    # only enter when the terms are assembled
    return (
        config.M, config.K, config.tau_p, config.p_p, config.sigma_LI2,
        config.alpha, tuple(config.beta_SR), tuple(config.beta_RD),
    )


class _Carver:
    """Stream adapter that serves consecutive columns of a pre-drawn block."""

    def __init__(self, flat):
        self.flat = flat
        self.pos = 0

    def standard_normal(self, shape):
        shape = tuple(shape)
        if shape[0] != self.flat.shape[0]:
            raise ValueError("leading dimension must be the block batch")
        count = math.prod(shape[1:])
        out = self.flat[:, self.pos : self.pos + count].reshape(shape)
        self.pos += count
        return out


def _resolve_loop(loop: str, M: int) -> str:
    if loop == "auto":
        return "full" if M <= FULL_LOOP_MAX_M else "subspace"
    if loop not in ("full", "subspace"):
        raise ValueError(f"loop must be 'auto', 'full' or 'subspace', got {loop!r}")
    return loop


def _per_realization(config: SystemConfig, loop: str) -> int:
    M, K = config.M, config.K
    loop_count = M * M if loop == "full" else min(M, K) * M
    # channels, pilot noise and pilot quantization noise for both hops
    return 2 * (6 * M * K + loop_count)


def _sq(x):
    return x.real**2 + x.imag**2


def _block_functionals(config: SystemConfig, rng, rows: int, loop: str) -> np.ndarray:
    M, K = config.M, config.K
    ch = draw_channels(config, rng, batch=rows, loop=False)
    est = simulate_pilot_estimation(ch, config, rng)
    rp = mrc_mrt_products(est, ChannelSet(ch.G_SR, ch.G_RD, None))

    if loop == "full":
        G_RR = complex_normal(rng, (rows, M, M), config.sigma_LI2)
        P = rp.project(G_RR)
        rnR = _sq(G_RR).sum(axis=-1)
    else:
        Q, R = np.linalg.qr(est.Ghat_SR)
        z = complex_normal(rng, (rows, R.shape[-2], M), config.sigma_LI2)
        P = np.conj(np.swapaxes(R, -1, -2)) @ z
        S = z @ np.conj(np.swapaxes(z, -1, -2))
        inside = np.einsum("...mi,...ij,...mj->...m", Q, S, np.conj(Q)).real
        rnR = inside + M * config.sigma_LI2 * (1.0 - _sq(Q).sum(axis=-1))

    x = rp.gains()
    xkk = np.diagonal(x, axis1=-2, axis2=-1)
    x2 = _sq(xkk)
    rnS = _sq(ch.G_SR).sum(axis=-1)

    user = [
        xkk.real, xkk.imag, x2, _sq(x).sum(axis=-1) - x2,
        rp.row_norms_projected(P), rp.row_norms(),
        rp.quant_rows(rnS), rp.quant_rows(rnR),
    ]
    scalar = [
        rp.norm_F_G_SR(), rp.norm_projected(P), rp.norm_F(),
        rp.quant_total(rnS), rp.quant_total(rnR),
    ]
    return np.concatenate([np.concatenate(user, axis=-1), np.stack(scalar, axis=-1)], axis=-1)


def sample_functionals(
    config: SystemConfig, n: int, seed: int, start: int = 0, loop: str = "auto"
) -> Functionals:
    """Functionals of realizations ``start .. start+n-1`` of the stream ``seed``.

    The result depends only on the indices, never on how a run is split.
    """
    if n < 1 or start < 0:
        raise ValueError(f"need n >= 1 and start >= 0, got n={n}, start={start}")
    loop = _resolve_loop(loop, config.M)
    per = _per_realization(config, loop)
    stop = start + n
    parts = []
    for block in range(start // BLOCK, (stop - 1) // BLOCK + 1):
        lo = max(start - block * BLOCK, 0)
        hi = min(stop - block * BLOCK, BLOCK)
        ss = np.random.SeedSequence(seed, spawn_key=(block,))
        gen = np.random.Generator(np.random.PCG64(ss))
        flat = gen.standard_normal((hi, per))[lo:]
        carver = _Carver(flat)
        parts.append(_block_functionals(config, carver, hi - lo, loop))
        if carver.pos != per:
            raise RuntimeError("stream layout mismatch")
    return Functionals(
        np.concatenate(parts), config.K, start, seed, loop, _sampling_key(config)
    )


def _assemble(mu: np.ndarray, config: SystemConfig, K: int) -> np.ndarray:
    """Map functional means to [A..H (K each), gamma, sinr (K), rate (K), sum]."""
    cols = dict(zip(_USER_COLS, mu[: len(_USER_COLS) * K].reshape(-1, K)))
    cols.update(zip(_SCALAR_COLS, mu[len(_USER_COLS) * K :]))
    al, th = config.alpha, config.theta
    pS, pRM = config.p_S, config.p_R / config.M

    g2 = config.p_R / (
        al**2 * (pS * cols["fgsr"] + pRM * cols["fgrr"] + cols["fn"])
        + al * (1.0 - al) * (pS * cols["fqS"] + pRM * cols["fqR"] + cols["fn"])
    )
    A = pS * (cols["xr"] ** 2 + cols["xi"] ** 2)
    B = pS * cols["x2"] - A
    C = pS * cols["c"]
    D = pRM * cols["lr"]
    E = cols["e"]
    F = (1.0 - al) / al * (pS * cols["qS"] + pRM * cols["qR"] + E)
    G = np.full(K, 1.0 / (al**2 * g2))
    H = (1.0 - th) / th * (pS * (cols["x2"] + cols["c"]) + D + E + F + G)
    sinr = A / (B + C + D + E + F + G + H)
    rate = config.prelog * np.log2(1.0 + sinr)
    terms = [A, B, C, D, E, F, G, H]
    means = [t.mean() for t in terms]
    return np.concatenate(terms + [[math.sqrt(g2)], sinr, rate, [rate.sum()], means])


def _raw(mu: np.ndarray, config: SystemConfig, K: int) -> np.ndarray:
    cols = dict(zip(_USER_COLS, mu[: len(_USER_COLS) * K].reshape(-1, K)))
    cols.update(zip(_SCALAR_COLS, mu[len(_USER_COLS) * K :]))
    al, pRM = config.alpha, config.p_R / config.M
    desired = cols["xr"] ** 2 + cols["xi"] ** 2
    quant = al * (1.0 - al) * (config.p_S * cols["qS"] + pRM * cols["qR"] + cols["e"])
    fq = al * (1.0 - al) * (config.p_S * cols["fqS"] + pRM * cols["fqR"] + cols["fn"])
    return np.concatenate([
        desired, cols["x2"] - desired, cols["c"], cols["lr"], cols["e"], quant,
        [cols["fgsr"], cols["fgrr"], cols["fn"], fq],
    ])


def _delta_method(fn, X: np.ndarray):
    """Plug-in estimate ``fn(mean)`` and its influence-function standard error."""
    n = X.shape[0]
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    value = fn(mu)
    J = np.empty((value.size, mu.size))
    for j in range(mu.size):
        h = 1e-6 * (abs(mu[j]) + sd[j]) or 1e-12
        up, dn = mu.copy(), mu.copy()
        up[j] += h
        dn[j] -= h
        J[:, j] = (fn(up) - fn(dn)) / (2.0 * h)
    psi = (X - mu) @ J.T
    return value, psi.std(axis=0, ddof=1) / math.sqrt(n)


def terms_from_functionals(func: Functionals, config: SystemConfig) -> McTermReport:
    """Assemble every term for ``config`` from a functional sample.

    ``config`` may differ from the sampling config in ``p_S``, ``p_R``,
    ``theta`` and ``tau_c`` only, so one sample serves a whole power sweep.
    """
    if func.key != _sampling_key(config):
        raise ValueError("functionals were sampled for a different channel model")
    n = func.n
    if n < MIN_REALIZATIONS:
        raise ValueError(f"need n >= {MIN_REALIZATIONS} realizations, got {n}")
    K = func.K
    val, se = _delta_method(lambda m: _assemble(m, config, K), func.data)
    rval, rse = _delta_method(lambda m: _raw(m, config, K), func.data)

    def est(v, s, i, width):
        if width is None:
            return McEstimate(float(v[i]), float(s[i]), n)
        return McEstimate(v[i : i + width], s[i : i + width], n)

    terms = {t: est(val, se, i * K, K) for i, t in enumerate(TERMS)}
    o = len(TERMS) * K
    raw_user = ("desired", "error_var", "interpair", "loop", "relay_noise", "relay_quant")
    raw = {name: est(rval, rse, i * K, K) for i, name in enumerate(raw_user)}
    r0 = len(raw_user) * K
    for i, name in enumerate(("FG_SR", "FG_RR", "F", "Fn_R")):
        raw[name] = est(rval, rse, r0 + i, None)
    m0 = o + 2 + 2 * K
    term_means = {t: est(val, se, m0 + i, None) for i, t in enumerate(TERMS)}
    return McTermReport(
        terms=terms,
        term_means=term_means,
        raw=raw,
        gamma=est(val, se, o, None),
        sinr=est(val, se, o + 1, K),
        rate=est(val, se, o + 1 + K, K),
        sum_rate=est(val, se, o + 1 + 2 * K, None),
        n=n,
        loop=func.loop,
    )


def _check_n(n):
    if n < MIN_REALIZATIONS:
        raise ValueError(f"need n >= {MIN_REALIZATIONS} realizations, got {n}")


def simulate_terms(config: SystemConfig, n: int, seed: int, loop: str = "auto") -> McTermReport:
    """Monte-Carlo estimate of every SINR term from ``n`` realizations."""
    _check_n(n)
    return terms_from_functionals(sample_functionals(config, n, seed, loop=loop), config)


def simulate_gamma(config: SystemConfig, n: int, seed: int, loop: str = "auto") -> McEstimate:
    """Amplification gain assembled from the four sampled power-constraint pieces."""
    return simulate_terms(config, n, seed, loop).gamma


def simulate_rate(config: SystemConfig, n: int, seed: int, loop: str = "auto"):
    """Per-user rate and sum rate with delta-method standard errors.

    Returns
    -------
    rate : McEstimate
        Per-user rates.
    sum_rate : McEstimate
    """
    rep = simulate_terms(config, n, seed, loop)
    return rep.rate, rep.sum_rate
