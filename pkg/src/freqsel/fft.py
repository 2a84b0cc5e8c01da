"""Exact-size discrete Fourier transforms over the trailing axes.

Self-contained: no numpy.fft. Power-of-two lengths run through an iterative
radix-2 Cooley-Tukey kernel (vectorised over leading axes); every other
length falls back to Bluestein's chirp-z algorithm, whose circular
convolution is carried out on zero-padded power-of-two transforms. Both
paths compute the exact N-point DFT, so prime sizes are handled without
padding artefacts.

Conventions:
  * forward transform is unnormalised: X[k] = sum_n x[n] exp(-2*pi*i*k*n/N)
  * inverse carries the full 1/N (or 1/(H*W)) factor
  * all arithmetic is complex128 regardless of input dtype
  * 2-D transforms act on the last two axes, so a (channels, H, W) stack is
    transformed per channel in one call

Twiddle factors, bit-reversal tables, and Bluestein chirps are cached per
size; the cached arrays are marked read-only so sharing them across threads
is safe.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import SizeZero

__all__ = ["fft", "ifft", "fft2", "ifft2", "fftshift", "ifftshift"]


@lru_cache(maxsize=64)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.intp)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=128)
def _stage_twiddles(n: int, sign: int) -> tuple[np.ndarray, ...]:
    stages = []
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(sign * 2j * np.pi * np.arange(half) / size)
        tw.setflags(write=False)
        stages.append(tw)
        size *= 2
    return tuple(stages)


def _fft_pow2(x: np.ndarray, sign: int) -> np.ndarray:
    """DFT along the last axis; x.shape[-1] must be a power of two."""
    n = x.shape[-1]
    if n == 1:
        return x.astype(np.complex128, copy=True)
    # fancy indexing yields a fresh array, so the in-place butterflies below
    # never touch the caller's data
    y = np.ascontiguousarray(x, dtype=np.complex128)[..., _bit_reversal(n)]
    lead = y.shape[:-1]
    for stage, tw in enumerate(_stage_twiddles(n, sign)):
        size = 2 << stage
        half = size >> 1
        blocks = y.reshape(lead + (n // size, size))
        odd = blocks[..., half:] * tw
        even = blocks[..., :half].copy()
        blocks[..., :half] = even + odd
        blocks[..., half:] = even - odd
    return y


@lru_cache(maxsize=64)
def _bluestein_tables(n: int, sign: int):
    m = 1 << (2 * n - 1).bit_length()
    k = np.arange(n, dtype=np.int64)
    # quadratic phase reduced mod 2n keeps the argument small and accurate
    chirp = np.exp(sign * 1j * np.pi * ((k * k) % (2 * n)) / n)
    kernel = np.zeros(m, dtype=np.complex128)
    kernel[:n] = np.conj(chirp)
    if n > 1:
        kernel[m - (n - 1):] = np.conj(chirp[1:])[::-1]
    kernel_fft = _fft_pow2(kernel, -1)
    chirp.setflags(write=False)
    kernel_fft.setflags(write=False)
    return m, chirp, kernel_fft


def _fft_bluestein(x: np.ndarray, sign: int) -> np.ndarray:
    n = x.shape[-1]
    m, chirp, kernel_fft = _bluestein_tables(n, sign)
    a = np.zeros(x.shape[:-1] + (m,), dtype=np.complex128)
    a[..., :n] = x * chirp
    conv = _fft_pow2(_fft_pow2(a, -1) * kernel_fft, +1) / m
    return conv[..., :n] * chirp


def _transform_last(x: np.ndarray, sign: int) -> np.ndarray:
    n = x.shape[-1]
    if n == 0:
        raise SizeZero("transform over a zero-length axis")
    if n & (n - 1) == 0:
        return _fft_pow2(x, sign)
    return _fft_bluestein(x, sign)


def fft(a) -> np.ndarray:
    """Forward DFT along the last axis."""
    return _transform_last(np.asarray(a), -1)


def ifft(a) -> np.ndarray:
    """Inverse DFT along the last axis, including the 1/N factor."""
    a = np.asarray(a)
    return _transform_last(a, +1) / a.shape[-1]


def fft2(a) -> np.ndarray:
    """Forward DFT over the last two axes (rows, then columns)."""
    a = np.asarray(a)
    if a.ndim < 2:
        raise ValueError("fft2 needs at least 2 dimensions")
    if a.shape[-1] == 0 or a.shape[-2] == 0:
        raise SizeZero("transform over a zero-length axis")
    rows = _transform_last(a, -1)
    return _transform_last(rows.swapaxes(-1, -2), -1).swapaxes(-1, -2)


def ifft2(a) -> np.ndarray:
    """Inverse DFT over the last two axes, including the 1/(H*W) factor."""
    a = np.asarray(a)
    if a.ndim < 2:
        raise ValueError("ifft2 needs at least 2 dimensions")
    if a.shape[-1] == 0 or a.shape[-2] == 0:
        raise SizeZero("transform over a zero-length axis")
    rows = _transform_last(a, +1)
    out = _transform_last(rows.swapaxes(-1, -2), +1).swapaxes(-1, -2)
    return out / (a.shape[-1] * a.shape[-2])


def _shift_axes(a: np.ndarray) -> tuple[int, ...]:
    return (-2, -1) if a.ndim >= 2 else (-1,)


def fftshift(a) -> np.ndarray:
    """Move the zero-frequency bin to the grid centre (floor(N/2))."""
    a = np.asarray(a)
    axes = _shift_axes(a)
    shift = tuple(a.shape[ax] // 2 for ax in axes)
    return np.roll(a, shift, axis=axes)


def ifftshift(a) -> np.ndarray:
    """Exact inverse of :func:`fftshift` for every size, odd included."""
    a = np.asarray(a)
    axes = _shift_axes(a)
    shift = tuple(-(a.shape[ax] // 2) for ax in axes)
    return np.roll(a, shift, axis=axes)
