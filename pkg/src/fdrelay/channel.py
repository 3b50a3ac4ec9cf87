"""Channel realizations, quantized pilot training and MMSE estimation.

All functions take an explicit random stream and accept an optional leading
``batch`` shape so that many independent realizations can be produced in one
call. A random stream is anything with a numpy-style
``standard_normal(shape)`` method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adc import aqnm_transform
from .config import ConfigError, SystemConfig

__all__ = [
    "ChannelSet",
    "ChannelEstimate",
    "EstimationStats",
    "RelayProducts",
    "complex_normal",
    "draw_channels",
    "estimation_stats",
    "simulate_pilot_estimation",
    "mrc_mrt_products",
]


def complex_normal(rng, shape, var=1.0):
    """Circularly-symmetric CN(0, var) samples.

    Real and imaginary parts come from two independent standard normals,
    each scaled by sqrt(var / 2). ``var`` broadcasts against ``shape``.
    """
    shape = tuple(shape)
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(np.asarray(var, dtype=float) / 2.0) * (z[..., 0] + 1j * z[..., 1])


def _herm(x):
    return np.conj(np.swapaxes(x, -1, -2))


def _sq(x):
    return x.real**2 + x.imag**2


@dataclass
class ChannelSet:
    """True channels. ``G_RR`` may be None when the loop channel is not drawn."""

    G_SR: np.ndarray
    G_RD: np.ndarray
    G_RR: np.ndarray | None


@dataclass
class ChannelEstimate:
    """MMSE estimates and their errors, ``G = Ghat + E``."""

    Ghat_SR: np.ndarray
    Ghat_RD: np.ndarray
    E_SR: np.ndarray
    E_RD: np.ndarray


@dataclass(frozen=True)
class EstimationStats:
    """Per-user variances of the estimate (sigma2_*) and error (sigma2err_*)."""

    sigma2_SR: np.ndarray
    sigma2err_SR: np.ndarray
    sigma2_RD: np.ndarray
    sigma2err_RD: np.ndarray


def draw_channels(config: SystemConfig, rng, batch=(), loop=True) -> ChannelSet:
    """Draw G_SR, G_RD (M x K) and, if ``loop``, G_RR (M x M).

    Column k of G_SR has i.i.d. CN(0, beta_SR[k]) entries (same for G_RD);
    G_RR has i.i.d. CN(0, sigma_LI2) entries. Draw order is fixed:
    G_SR, G_RD, G_RR.
    """
    batch = (batch,) if isinstance(batch, (int, np.integer)) else tuple(batch)
    M, K = config.M, config.K
    G_SR = complex_normal(rng, batch + (M, K), config.beta_SR)
    G_RD = complex_normal(rng, batch + (M, K), config.beta_RD)
    G_RR = complex_normal(rng, batch + (M, M), config.sigma_LI2) if loop else None
    return ChannelSet(G_SR, G_RD, G_RR)


def estimation_stats(config: SystemConfig) -> EstimationStats:
    """Closed-form estimate and error variances under quantized training."""
    a = config.alpha
    snr = config.tau_p * config.p_p

    def split(beta):
        est = a * snr * beta**2 / (1.0 + snr * beta)
        err = (beta + (1.0 - a) * snr * beta**2) / (1.0 + snr * beta)
        return est, err

    s_sr, e_sr = split(config.beta_SR)
    s_rd, e_rd = split(config.beta_RD)
    return EstimationStats(s_sr, e_sr, s_rd, e_rd)


def simulate_pilot_estimation(channels: ChannelSet, config: SystemConfig, rng) -> ChannelEstimate:
    """Synthesize the quantized pilot phase and apply the MMSE estimator.

    Pilots are the identity with ``tau_p == K``: column k of the received
    pilot block only carries user k. Noise draw order: N_rp, N_tp, then the
    relay quantization noise of each block.
    """
    if config.tau_p != config.K:
        raise ConfigError(
            f"pilot estimation supports tau_p == K only (identity pilots), "
            f"got tau_p={config.tau_p}, K={config.K}"
        )
    a = config.alpha
    snr = config.tau_p * config.p_p
    shape = channels.G_SR.shape
    if channels.G_RD.shape != shape:
        raise ValueError("G_SR and G_RD shapes differ")

    Y_rp = np.sqrt(snr) * channels.G_SR + complex_normal(rng, shape)
    Y_tp = np.sqrt(snr) * channels.G_RD + complex_normal(rng, shape)

    def estimate(Y, beta):
        # per-element power from the statistical model, not the sample
        power = np.broadcast_to(snr * beta + 1.0, shape)
        Yq, _ = aqnm_transform(Y, a, power, rng)
        gain = a * (snr * beta / (1.0 + snr * beta))
        return gain * Yq / (a * np.sqrt(snr))

    Ghat_SR = estimate(Y_rp, config.beta_SR)
    Ghat_RD = estimate(Y_tp, config.beta_RD)
    return ChannelEstimate(
        Ghat_SR, Ghat_RD, channels.G_SR - Ghat_SR, channels.G_RD - Ghat_RD
    )


class RelayProducts:
    """Quadratic forms of the MRC/MRT relay matrix without building it.

    The relay matrix is ``F = conj(Ghat_RD) @ Ghat_SR^H`` (M x M, rank <= K).
    Every quantity is computed through K x K and K x M factors:

    * ``U = G_RD^T conj(Ghat_RD)``, so row k of ``U @ Ghat_SR^H`` is
      ``g_RD,k^T F``;
    * ``V = Ghat_SR^H G_SR``, so ``(U @ V)[k, j] = g_RD,k^T F g_SR,j``;
    * ``Gram = Ghat_RD^T conj(Ghat_RD)``, so ``||F x||^2 = p^H Gram p`` with
      ``p = Ghat_SR^H x``.

    Leading batch dimensions are supported throughout.
    """

    def __init__(self, est: ChannelEstimate, channels: ChannelSet):
        shapes = {
            est.Ghat_SR.shape, est.Ghat_RD.shape,
            channels.G_SR.shape, channels.G_RD.shape,
        }
        if len(shapes) != 1:
            raise ValueError(f"inconsistent channel shapes: {sorted(shapes)}")
        self.est = est
        self.channels = channels
        self.M = est.Ghat_SR.shape[-2]
        self._U = np.swapaxes(channels.G_RD, -1, -2) @ np.conj(est.Ghat_RD)
        self._Gram = np.swapaxes(est.Ghat_RD, -1, -2) @ np.conj(est.Ghat_RD)
        self._SRh = _herm(est.Ghat_SR)
        self._V = self._SRh @ channels.G_SR
        self._W = None

    def project(self, X):
        """``Ghat_SR^H X``; every ``F X`` product depends on X only via this."""
        if X.shape[-2] != self.M:
            raise ValueError(f"expected {self.M} rows, got {X.shape[-2]}")
        return self._SRh @ X

    def gains(self):
        """K x K matrix of ``g_RD,k^T F g_SR,j``."""
        return self._U @ self._V

    def rows(self):
        """K x M matrix whose row k is ``g_RD,k^T F``."""
        if self._W is None:
            self._W = self._U @ self._SRh
        return self._W

    def row_norms(self):
        """``||g_RD,k^T F||^2`` for every k."""
        return _sq(self.rows()).sum(axis=-1)

    def column_norms(self):
        """``||F[:, m]||^2`` for every relay antenna m."""
        T = self._SRh
        return np.einsum("...nm,...nl,...lm->...m", np.conj(T), self._Gram, T).real

    def norm_F(self):
        return self.column_norms().sum(axis=-1)

    def norm_projected(self, P):
        """``||F X||^2`` given ``P = project(X)``."""
        return np.einsum("...nc,...nl,...lc->...", np.conj(P), self._Gram, P).real

    def row_norms_projected(self, P):
        """``||g_RD,k^T F X||^2`` for every k, given ``P = project(X)``."""
        return _sq(self._U @ P).sum(axis=-1)

    def norm_F_G_SR(self):
        return self.norm_projected(self._V)

    def norm_F_G_RR(self):
        return self.norm_projected(self.project(self._loop()))

    def loop_row_norms(self):
        """``||g_RD,k^T F G_RR||^2`` for every k."""
        return self.row_norms_projected(self.project(self._loop()))

    def quant_rows(self, d):
        """``sum_m |[g_RD,k^T F]_m|^2 d_m`` for a diagonal covariance ``d``."""
        return np.einsum("...km,...m->...k", _sq(self.rows()), d)

    def quant_total(self, d):
        """``tr(F diag(d) F^H)``."""
        return np.einsum("...m,...m->...", self.column_norms(), d)

    def _loop(self):
        if self.channels.G_RR is None:
            raise ValueError("loop channel G_RR was not drawn")
        return self.channels.G_RR


def mrc_mrt_products(est: ChannelEstimate, channels: ChannelSet) -> RelayProducts:
    """Factorized evaluator for the MRC/MRT relay matrix."""
    return RelayProducts(est, channels)
