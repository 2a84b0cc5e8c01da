"""Gaussian high-pass filtering and high-frequency energy ratios.

The central quantity is the high-frequency ratio (HFR) of a feature map:
the fraction of total spectral energy that survives a Gaussian high-pass
filter. With unnormalised forward transforms, Parseval gives
sum|F|^2 = H*W * sum x^2, so the ratio

    hfr = sum_c sum_uv gain(u,v)^2 |F_c(u,v)|^2 / sum_c sum_uv |F_c(u,v)|^2

equals filtered spatial energy over raw spatial energy without ever
running an inverse transform. Gains live in [0, 1) (the DC gain is exactly
zero), so the ratio is bounded to [0, 1), and because both sums scale by
|s|^2 under x -> s*x the ratio is scale-invariant.

All spectral sums are accumulated with the fixed pairwise tree from
:mod:`freqsel.reduction`, so results do not depend on evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimMismatch, NonPositiveCutoff, ZeroEnergyFeature
from .fft import fft2, fftshift, ifft2, ifftshift
from .reduction import pairwise_sum
from .tensor_io import FeatureMap

__all__ = [
    "DEFAULT_CUTOFF",
    "HighPassMask",
    "Decomposition",
    "gaussian_highpass_mask",
    "energy",
    "hfr",
    "hfr_per_channel",
    "extract_high_freq",
    "decompose",
]

# published default for the Gaussian high-pass cutoff D0
DEFAULT_CUTOFF = 30.0


@dataclass(frozen=True)
class HighPassMask:
    """Gain grid for one (height, width, cutoff) combination.

    ``gains`` is stored centred (zero-frequency bin at (H//2, W//2)) and
    read-only. gain(u, v) = 1 - exp(-D^2 / (2 * cutoff^2)) with D the
    Euclidean distance from the centre bin, then symmetrised so the
    unshifted grid satisfies g[u, v] = g[(H-u) % H, (W-v) % W] exactly and
    real inputs stay real after filtering.
    """

    height: int
    width: int
    cutoff: float
    gains: np.ndarray

    def unshifted(self) -> np.ndarray:
        """Gains in standard DFT layout (zero-frequency bin at [0, 0])."""
        return ifftshift(self.gains)


@dataclass(frozen=True)
class Decomposition:
    """A feature map split into filtered parts; high + low == original."""

    high: FeatureMap
    low: FeatureMap


def _conjugate_symmetrise(unshifted: np.ndarray) -> np.ndarray:
    h, w = unshifted.shape
    flipped = unshifted[(-np.arange(h)) % h][:, (-np.arange(w)) % w]
    # the Gaussian grid is already symmetric, so this halving is exact and
    # serves as a guarantee rather than a correction
    return 0.5 * (unshifted + flipped)


@lru_cache(maxsize=128)
def _mask_cached(height: int, width: int, cutoff: float) -> HighPassMask:
    cy, cx = height // 2, width // 2
    dy = np.arange(height, dtype=np.float64)[:, np.newaxis] - cy
    dx = np.arange(width, dtype=np.float64)[np.newaxis, :] - cx
    centred = 1.0 - np.exp(-(dy * dy + dx * dx) / (2.0 * cutoff * cutoff))
    gains = fftshift(_conjugate_symmetrise(ifftshift(centred)))
    gains.setflags(write=False)
    return HighPassMask(height, width, cutoff, gains)


def gaussian_highpass_mask(height: int, width: int, cutoff: float = DEFAULT_CUTOFF) -> HighPassMask:
    """Build (or fetch from cache) the gain grid for one configuration."""
    if height < 1 or width < 1:
        raise DimMismatch(f"mask dims must be >= 1, got {height}x{width}")
    if not cutoff > 0.0:
        raise NonPositiveCutoff(f"cutoff must be > 0, got {cutoff}")
    return _mask_cached(int(height), int(width), float(cutoff))


@lru_cache(maxsize=128)
def _gain_sq_unshifted(height: int, width: int, cutoff: float) -> np.ndarray:
    g = _mask_cached(height, width, cutoff).unshifted()
    g2 = g * g
    g2.setflags(write=False)
    return g2


def energy(fmap: FeatureMap) -> float:
    """Total energy sum(values^2), accumulated pairwise."""
    return pairwise_sum(np.square(fmap.values))


def _spectral_power(fmap: FeatureMap) -> np.ndarray:
    spectra = fft2(fmap.values)
    return spectra.real * spectra.real + spectra.imag * spectra.imag


def hfr(fmap: FeatureMap, cutoff: float = DEFAULT_CUTOFF) -> float:
    """High-frequency energy ratio of one map, channels pooled.

    Numerator and denominator are summed per channel with the fixed pair
    tree, then combined pairwise across channels, so the value is
    independent of how callers batch or thread the surrounding loop.
    """
    if not cutoff > 0.0:
        raise NonPositiveCutoff(f"cutoff must be > 0, got {cutoff}")
    g2 = _gain_sq_unshifted(fmap.height, fmap.width, float(cutoff))
    power = _spectral_power(fmap)
    total = pairwise_sum([pairwise_sum(power[c]) for c in range(fmap.channels)])
    if total == 0.0:
        raise ZeroEnergyFeature(
            f"feature map {fmap.meta.image_id!r} (t={fmap.meta.timestep}) has zero energy"
        )
    kept = pairwise_sum([pairwise_sum(g2 * power[c]) for c in range(fmap.channels)])
    return kept / total


def hfr_per_channel(fmap: FeatureMap, cutoff: float = DEFAULT_CUTOFF) -> np.ndarray:
    """Diagnostic variant: one ratio per channel."""
    if not cutoff > 0.0:
        raise NonPositiveCutoff(f"cutoff must be > 0, got {cutoff}")
    g2 = _gain_sq_unshifted(fmap.height, fmap.width, float(cutoff))
    power = _spectral_power(fmap)
    out = np.empty(fmap.channels, dtype=np.float64)
    for c in range(fmap.channels):
        total = pairwise_sum(power[c])
        if total == 0.0:
            raise ZeroEnergyFeature(
                f"feature map {fmap.meta.image_id!r} channel {c} has zero energy"
            )
        out[c] = pairwise_sum(g2 * power[c]) / total
    return out


def _apply_gains(fmap: FeatureMap, gains_unshifted: np.ndarray) -> FeatureMap:
    filtered = ifft2(fft2(fmap.values) * gains_unshifted)
    return FeatureMap(filtered.real, fmap.meta)


def extract_high_freq(fmap: FeatureMap, mask: HighPassMask) -> FeatureMap:
    """Filter a map through the high-pass gains (per channel)."""
    if (mask.height, mask.width) != (fmap.height, fmap.width):
        raise DimMismatch(
            f"mask is {mask.height}x{mask.width} but map is {fmap.height}x{fmap.width}"
        )
    return _apply_gains(fmap, mask.unshifted())


def decompose(fmap: FeatureMap, mask: HighPassMask) -> Decomposition:
    """Split a map into high-pass and complementary low-pass parts.

    The low part is computed as original minus high, so the two parts
    recompose to the input up to one rounding per element.
    """
    high = extract_high_freq(fmap, mask)
    low = FeatureMap(fmap.values - high.values, fmap.meta)
    return Decomposition(high=high, low=low)
