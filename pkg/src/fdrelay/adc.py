"""Additive quantization noise model (AQNM) for low-resolution ADCs.

A b-bit ADC is replaced by a linear gain ``rho`` followed by additive
Gaussian noise whose variance scales with the input power::

    y_q = rho * y + n_q,    E|n_q|^2 = rho * (1 - rho) * E|y|^2

``rho`` is called alpha at the relay and theta at the destinations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["AdcModel", "distortion_factor", "aqnm_transform", "MAX_BITS"]

# Lloyd-Max distortion factors for a unit-variance Gaussian input, b = 1..5.
_TABLE = {1: 0.6366, 2: 0.8825, 3: 0.96546, 4: 0.990503, 5: 0.997501}

#: Beyond this resolution rho is clamped to exactly 1.
MAX_BITS = 64


def distortion_factor(bits) -> float:
    """Return the AQNM distortion factor for a ``bits``-bit ADC.

    Tabulated values are used for 1 to 5 bits and the high-resolution
    approximation ``1 - (pi*sqrt(3)/2) * 2**(-2b)`` above that.
    ``math.inf`` (a perfect ADC) gives exactly 1.

    Raises
    ------
    ValueError
        If ``bits`` is not a positive integer or infinity.
    """
    if bits == math.inf:
        return 1.0
    if isinstance(bits, bool) or not float(bits).is_integer():
        raise ValueError(f"bits must be a positive integer or inf, got {bits!r}")
    b = int(bits)
    if b < 1:
        raise ValueError(f"bits must be >= 1, got {b}")
    if b in _TABLE:
        return _TABLE[b]
    if b > MAX_BITS:
        return 1.0
    return 1.0 - (math.pi * math.sqrt(3.0) / 2.0) * 2.0 ** (-2 * b)


@dataclass(frozen=True)
class AdcModel:
    """Quantizer resolution and its distortion factor.

    Build from a bit depth with ``AdcModel.from_bits`` or from a raw
    distortion factor with ``AdcModel.from_rho`` (``bits`` is then None).
    """

    bits: float | int | None
    rho: float

    def __post_init__(self):
        if not (0.0 < self.rho <= 1.0):
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")
        if self.bits == math.inf and self.rho != 1.0:
            raise ValueError("an infinite-resolution ADC must have rho = 1")

    @classmethod
    def from_bits(cls, bits) -> "AdcModel":
        return cls(bits=bits, rho=distortion_factor(bits))

    @classmethod
    def from_rho(cls, rho: float) -> "AdcModel":
        if rho == 1.0:
            return cls(bits=math.inf, rho=1.0)
        return cls(bits=None, rho=float(rho))

    @classmethod
    def perfect(cls) -> "AdcModel":
        return cls(bits=math.inf, rho=1.0)

    @property
    def is_perfect(self) -> bool:
        return self.rho == 1.0


def aqnm_transform(y, rho, input_power, rng):
    """Pass ``y`` through the AQNM quantizer.

    Parameters
    ----------
    y : complex array
        ADC input samples.
    rho : float
        Distortion factor in (0, 1].
    input_power : real array, same shape as ``y``
        Per-element input power E|y_i|^2 conditioned on the channel
        realization (not the sample power of ``y``).
    rng : numpy.random.Generator
        Source of the quantization noise.

    Returns
    -------
    out : complex array
        ``rho * y + n_q``.
    noise_var : real array
        Element-wise variance of ``n_q``, ``rho * (1 - rho) * input_power``.
    """
    y = np.asarray(y)
    input_power = np.asarray(input_power, dtype=float)
    if y.shape != input_power.shape:
        raise ValueError(
            f"shape mismatch: input {y.shape} vs input_power {input_power.shape}"
        )
    if not (0.0 < rho <= 1.0):
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    if np.any(input_power < 0):
        raise ValueError("input_power must be nonnegative")
    noise_var = rho * (1.0 - rho) * input_power
    # the draw happens even for rho == 1 so the stream layout does not
    # depend on the resolution
    z = rng.standard_normal(y.shape + (2,))
    n_q = np.sqrt(noise_var / 2.0) * (z[..., 0] + 1j * z[..., 1])
    return rho * y + n_q, noise_var
