import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freqsel import fft, fft2, fftshift, ifft, ifft2, ifftshift
from freqsel.errors import SizeZero

from util import naive_dft2, rel_err

PRIME_SIZES = (2, 3, 5, 7, 11, 13, 17, 31)
MIXED_SIZES = (1, 2, 3, 4, 6, 8, 9, 12, 15, 16, 20, 27, 32)


def rand_complex(shape, seed):
    rng = np.random.default_rng(seed)
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


@pytest.mark.parametrize("n", PRIME_SIZES + MIXED_SIZES)
def test_fft_1d_matches_definition(n):
    x = rand_complex((n,), n)
    k = np.arange(n)
    dft = np.exp(-2j * np.pi * np.outer(k, k) / n) @ x
    assert rel_err(fft(x), dft) < 1e-12


@pytest.mark.parametrize("h", (1, 4, 7, 13, 16))
@pytest.mark.parametrize("w", (1, 5, 8, 27, 31))
def test_fft2_matches_definition(h, w):
    x = rand_complex((h, w), h * 100 + w)
    assert rel_err(fft2(x), naive_dft2(x)) < 1e-12


def test_batched_equals_per_channel():
    x = rand_complex((5, 12, 9), 3)
    batched = fft2(x)
    for c in range(5):
        assert np.array_equal(batched[c], fft2(x[c]))


@pytest.mark.parametrize("h,w", [(8, 8), (7, 5), (16, 12), (31, 31)])
def test_roundtrip(h, w):
    x = rand_complex((h, w), h + w)
    assert rel_err(ifft2(fft2(x)), x) < 1e-12
    assert rel_err(fft2(ifft2(x)), x) < 1e-12
    v = rand_complex((w,), w)
    assert rel_err(ifft(fft(v)), v) < 1e-12


@settings(max_examples=30, deadline=None)
@given(
    h=st.integers(min_value=1, max_value=20),
    w=st.integers(min_value=1, max_value=20),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_parseval(h, w, seed):
    x = rand_complex((h, w), seed)
    space = np.sum(np.abs(x) ** 2)
    freq = np.sum(np.abs(fft2(x)) ** 2)
    assert abs(freq - h * w * space) <= 1e-10 * max(1.0, h * w * space)


@settings(max_examples=30, deadline=None)
@given(
    h=st.integers(min_value=1, max_value=16),
    w=st.integers(min_value=1, max_value=16),
    a=st.floats(min_value=-10, max_value=10),
    b=st.floats(min_value=-10, max_value=10),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_linearity(h, w, a, b, seed):
    x = rand_complex((h, w), seed)
    y = rand_complex((h, w), seed + 1)
    assert rel_err(fft2(a * x + b * y), a * fft2(x) + b * fft2(y)) < 1e-11


def test_known_transforms():
    # impulse at the origin -> flat spectrum of ones
    imp = np.zeros((6, 6))
    imp[0, 0] = 1.0
    assert np.allclose(fft2(imp), np.ones((6, 6)), atol=1e-12)
    # constant map -> all energy in the DC bin
    const = np.ones((4, 10))
    spectrum = fft2(const)
    assert abs(spectrum[0, 0] - 40.0) < 1e-12
    off_dc = np.abs(spectrum).sum() - abs(spectrum[0, 0])
    assert off_dc < 1e-10


def test_real_input_conjugate_symmetry():
    x = np.random.default_rng(9).normal(size=(8, 12))
    spectrum = fft2(x)
    h, w = x.shape
    mirrored = spectrum[(-np.arange(h)) % h][:, (-np.arange(w)) % w]
    assert rel_err(np.conj(mirrored), spectrum) < 1e-12


@pytest.mark.parametrize("h,w", [(2, 2), (3, 3), (4, 6), (5, 8), (7, 7)])
def test_shift_roundtrip_all_parities(h, w):
    x = np.arange(h * w, dtype=float).reshape(h, w)
    assert np.array_equal(ifftshift(fftshift(x)), x)
    assert np.array_equal(fftshift(ifftshift(x)), x)


def test_shift_documented_layout():
    # 2x2: fftshift swaps quadrants
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(fftshift(x), np.array([[4.0, 3.0], [2.0, 1.0]]))
    # DC at [0,0] moves to the centre bin (floor(n/2))
    imp = np.zeros((5, 4))
    imp[0, 0] = 1.0
    shifted = fftshift(imp)
    assert shifted[2, 2] == 1.0 and shifted.sum() == 1.0


def test_zero_length_axis_rejected():
    with pytest.raises(SizeZero):
        fft(np.zeros((0,)))
    with pytest.raises(SizeZero):
        fft2(np.zeros((0, 4)))
    with pytest.raises(SizeZero):
        fft2(np.zeros((4, 0)))
    with pytest.raises(SizeZero):
        ifft2(np.zeros((0, 0)))


def test_rank_below_two_rejected_for_2d():
    with pytest.raises(ValueError):
        fft2(np.zeros(4))


def test_input_left_untouched():
    x = rand_complex((8, 8), 2)
    before = x.copy()
    fft2(x)
    ifft2(x)
    assert np.array_equal(x, before)
