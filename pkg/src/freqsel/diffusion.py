"""Noise schedules, forward-process mixing, seeded noise, synthetic oracles.

Forward process
---------------
A clean feature map z0 is noised by convex interpolation against a pure
noise map: z_t = alpha * eps + (1 - alpha) * z0. At alpha = 0 this is the
identity on z0 and at alpha = 1 the identity on eps, exactly (0 * x + 1 * y
evaluates to y in IEEE-754 for finite x, y). The default schedule is linear,
alpha_t = t / T for t = 1..T.

Noise generator (full contract)
-------------------------------
Noise is produced by a counter-based SplitMix64 stream feeding Box-Muller,
so any element can be regenerated from (seed, index) alone:

  * mix64(z): z ^= z >> 30, z *= 0xBF58476D1CE4E5B9; z ^= z >> 27,
    z *= 0x94D049BB133111EB; z ^= z >> 31 (all mod 2^64)
  * stream output j (0-based): mix64(seed + (j+1) * 0x9E3779B97F4A7C15 mod 2^64)
  * consecutive outputs (a, b) map to u1 = ((a >> 11) + 1) * 2^-53 in (0, 1]
    and u2 = (b >> 11) * 2^-53 in [0, 1)
  * Box-Muller: r = sqrt(-2 ln u1); the pair contributes r*cos(2 pi u2)
    then r*sin(2 pi u2); values fill the output in C order, odd tail dropped

Derived streams for (image, timestep, ...) are keyed by folding each field
into the seed with mix64 (see :func:`stream_seed`). The arithmetic is fully
specified; bit-level reproducibility across platforms holds wherever libm
rounds log/cos/sin identically, and within one platform it is exact.

Synthetic oracle
----------------
:func:`oracle_features` writes a dataset whose high-frequency content is
controlled analytically: each image is a fixed low-frequency field (white
noise band-limited to radius <= 2 bins around DC, RMS-normalised) plus a
diagonal sinusoid at a known frequency whose amplitude follows a
caller-chosen per-timestep profile. The mean high-frequency ratio is then
strictly increasing in the detail amplitude, so the profile's argmax is the
provably correct selection answer.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import (
    FrequencyTooHigh,
    ProfileInvalid,
    ScheduleInvalid,
    ShapeMismatch,
)
from .fft import fft2, ifft2, ifftshift
from .tensor_io import (
    DatasetManifest,
    FeatureMap,
    FeatureMeta,
    ManifestEntry,
    atomic_write_text,
    iter_loaded,
    save_manifest,
    write_tensor,
)

__all__ = [
    "DEFAULT_TOTAL_TIMESTEPS",
    "NoiseSchedule",
    "OracleProfile",
    "linear_schedule",
    "load_schedule_csv",
    "save_schedule_csv",
    "forward_noise",
    "sample_noise",
    "standard_normal",
    "uniforms",
    "stream_seed",
    "simulate_forward",
    "gaussian_bump_curve",
    "oracle_features",
]

DEFAULT_TOTAL_TIMESTEPS = 1000

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)
_TWO_NEG_53 = 2.0 ** -53


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-timestep mixing coefficients alpha_1..alpha_T (1-based lookup)."""

    alphas: tuple[float, ...]

    def __post_init__(self) -> None:
        alphas = tuple(float(a) for a in self.alphas)
        if len(alphas) < 1:
            raise ScheduleInvalid("schedule must cover at least one timestep")
        if not all(np.isfinite(a) and 0.0 <= a <= 1.0 for a in alphas):
            raise ScheduleInvalid("every alpha must be finite and in [0, 1]")
        if any(b < a for a, b in zip(alphas, alphas[1:])):
            raise ScheduleInvalid("alphas must be non-decreasing in t")
        object.__setattr__(self, "alphas", alphas)

    @property
    def total_timesteps(self) -> int:
        return len(self.alphas)

    def alpha(self, t: int) -> float:
        if not 1 <= t <= len(self.alphas):
            raise ScheduleInvalid(f"timestep {t} outside schedule [1, {len(self.alphas)}]")
        return self.alphas[t - 1]

    def alpha_for(self, t: int, indexing: str = "t") -> float:
        """Coefficient under either indexing convention.

        "t" reads alpha_t directly; "t-1" shifts by one so that t = 1 mixes
        with alpha = 0 (pure signal) and t = T with alpha_{T-1}.
        """
        if indexing == "t":
            return self.alpha(t)
        if indexing == "t-1":
            if not 1 <= t <= len(self.alphas):
                raise ScheduleInvalid(f"timestep {t} outside schedule [1, {len(self.alphas)}]")
            return 0.0 if t == 1 else self.alphas[t - 2]
        raise ValueError(f"indexing must be 't' or 't-1', got {indexing!r}")


def linear_schedule(total_timesteps: int = DEFAULT_TOTAL_TIMESTEPS) -> NoiseSchedule:
    """alpha_t = t / T; reaches exactly 1 at t = T."""
    if total_timesteps < 1:
        raise ScheduleInvalid(f"total_timesteps must be >= 1, got {total_timesteps}")
    return NoiseSchedule(tuple(t / total_timesteps for t in range(1, total_timesteps + 1)))


def load_schedule_csv(path) -> NoiseSchedule:
    """Parse a ``t,alpha`` CSV covering t = 1..T contiguously."""
    p = Path(path)
    try:
        with open(p, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ScheduleInvalid(f"cannot read schedule {p}: {exc}") from exc
    if not rows or rows[0] != ["t", "alpha"]:
        raise ScheduleInvalid(f"{p}: first line must be the header 't,alpha'")
    alphas = []
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != 2:
            raise ScheduleInvalid(f"{p}: row {i} must have exactly two fields")
        try:
            t, alpha = int(row[0]), float(row[1])
        except ValueError as exc:
            raise ScheduleInvalid(f"{p}: row {i} is not numeric: {row}") from exc
        if t != i:
            raise ScheduleInvalid(f"{p}: row {i} has t={t}; rows must run 1..T in order")
        alphas.append(alpha)
    return NoiseSchedule(tuple(alphas))


def save_schedule_csv(schedule: NoiseSchedule, path) -> None:
    lines = ["t,alpha"]
    lines += [f"{t},{a!r}" for t, a in enumerate(schedule.alphas, start=1)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def forward_noise(z0: FeatureMap, eps: FeatureMap, alpha: float) -> FeatureMap:
    """z_t = alpha * eps + (1 - alpha) * z0, elementwise."""
    if z0.values.shape != eps.values.shape:
        raise ShapeMismatch(
            f"signal {z0.values.shape} and noise {eps.values.shape} must match"
        )
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    return FeatureMap(alpha * eps.values + (1.0 - alpha) * z0.values, z0.meta)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def _stream_bits(seed: int, count: int) -> np.ndarray:
    base = np.uint64(seed & _MASK64)
    counters = np.arange(1, count + 1, dtype=np.uint64)
    return _mix64(base + counters * _GAMMA)


def stream_seed(root_seed: int, *fields: int) -> int:
    """Derive an independent stream seed by folding fields in order.

    Used to key noise and phases by (image index, timestep, ...) so that
    regenerating any single tensor never requires replaying a global stream.
    """
    h = _mix64(np.array([root_seed & _MASK64], dtype=np.uint64))
    for f in fields:
        g = _mix64(np.array([f & _MASK64], dtype=np.uint64))
        h = _mix64((h + _GAMMA) ^ g)
    return int(h[0])


def uniforms(count: int, seed: int) -> np.ndarray:
    """`count` doubles in [0, 1) from the documented stream."""
    if count < 0:
        raise ValueError("count must be >= 0")
    bits = _stream_bits(seed, count)
    return (bits >> np.uint64(11)).astype(np.float64) * _TWO_NEG_53


def standard_normal(count: int, seed: int) -> np.ndarray:
    """`count` N(0,1) doubles from the documented SplitMix64 + Box-Muller stream."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return np.empty(0, dtype=np.float64)
    pairs = (count + 1) // 2
    bits = _stream_bits(seed, 2 * pairs)
    u1 = ((bits[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_NEG_53
    u2 = (bits[1::2] >> np.uint64(11)).astype(np.float64) * _TWO_NEG_53
    r = np.sqrt(-2.0 * np.log(u1))
    theta = (2.0 * np.pi) * u2
    out = np.empty(2 * pairs, dtype=np.float64)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:count]


def sample_noise(shape: tuple[int, int, int], seed: int, meta: FeatureMeta | None = None) -> FeatureMap:
    """A (channels, height, width) map of seeded standard normals."""
    c, h, w = (int(d) for d in shape)
    if min(c, h, w) < 1:
        raise ShapeMismatch(f"noise shape must be positive, got {shape}")
    values = standard_normal(c * h * w, seed).reshape(c, h, w)
    return FeatureMap(values, meta or FeatureMeta(image_id=f"noise-{seed & _MASK64:016x}"))


def simulate_forward(
    manifest: DatasetManifest,
    schedule: NoiseSchedule,
    timesteps: tuple[int, ...],
    seed: int,
    out_dir,
    indexing: str = "t",
    dtype: str = "f64",
) -> DatasetManifest:
    """Noise every manifest entry at each grid timestep and write a new dataset.

    Every input entry is treated as a clean image regardless of its own
    timestep field. Noise for (entry i, timestep t) comes from
    ``stream_seed(seed, i, t)``, so outputs are independent of the grid
    order and of how work might be batched.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sources = list(iter_loaded(manifest))
    entries = []
    for t in timesteps:
        alpha = schedule.alpha_for(t, indexing)
        for i, (entry, z0) in enumerate(sources):
            eps = sample_noise(z0.values.shape, stream_seed(seed, i, t))
            noised = forward_noise(z0, eps, alpha)
            name = f"t{t:04d}_i{i:04d}.npy"
            write_tensor(noised, out / name, dtype)
            entries.append(
                ManifestEntry(name, entry.image_id, t, entry.group, entry.label, entry.accuracy)
            )
    result = DatasetManifest(schedule.total_timesteps, tuple(entries), False, out)
    save_manifest(result, out / "manifest.json")
    return result


@dataclass(frozen=True)
class OracleProfile:
    """Ground-truth detail-amplitude profile with a unique peak.

    ``detail_amplitude_curve[t-1]`` is the sinusoid amplitude at timestep t;
    the curve must have its unique maximum at ``peak_timestep``, which is
    what a correct selection pipeline has to recover.
    """

    peak_timestep: int
    base_low_freq_amplitude: float
    detail_amplitude_curve: tuple[float, ...]
    detail_frequency: int

    def __post_init__(self) -> None:
        curve = tuple(float(a) for a in self.detail_amplitude_curve)
        if len(curve) < 1:
            raise ProfileInvalid("amplitude curve must cover at least one timestep")
        if not all(np.isfinite(a) and a >= 0.0 for a in curve):
            raise ProfileInvalid("amplitudes must be finite and >= 0")
        if not (self.base_low_freq_amplitude > 0.0 and np.isfinite(self.base_low_freq_amplitude)):
            raise ProfileInvalid("base low-frequency amplitude must be > 0")
        if self.detail_frequency < 1:
            raise ProfileInvalid(f"detail frequency must be >= 1, got {self.detail_frequency}")
        if not 1 <= self.peak_timestep <= len(curve):
            raise ProfileInvalid(
                f"peak timestep {self.peak_timestep} outside curve [1, {len(curve)}]"
            )
        peak = max(curve)
        if curve.count(peak) != 1 or curve[self.peak_timestep - 1] != peak:
            raise ProfileInvalid("amplitude curve must have its unique maximum at peak_timestep")
        object.__setattr__(self, "detail_amplitude_curve", curve)

    @property
    def total_timesteps(self) -> int:
        return len(self.detail_amplitude_curve)


def gaussian_bump_curve(
    total_timesteps: int, peak_timestep: int, peak_amplitude: float, width: float
) -> tuple[float, ...]:
    """Amplitude profile A * exp(-(t - t*)^2 / (2 * width^2)) for t = 1..T."""
    if width <= 0.0:
        raise ProfileInvalid(f"width must be > 0, got {width}")
    t = np.arange(1, total_timesteps + 1, dtype=np.float64)
    return tuple(float(a) for a in peak_amplitude * np.exp(-((t - peak_timestep) ** 2) / (2.0 * width**2)))


# band-limit radius (in centred frequency bins) of the oracle's background
LOW_BAND_RADIUS = 2.0


@lru_cache(maxsize=32)
def _low_band_unshifted(height: int, width: int) -> np.ndarray:
    cy, cx = height // 2, width // 2
    dy = np.arange(height, dtype=np.float64)[:, np.newaxis] - cy
    dx = np.arange(width, dtype=np.float64)[np.newaxis, :] - cx
    keep = (dy * dy + dx * dx) <= LOW_BAND_RADIUS**2
    band = ifftshift(keep.astype(np.float64))
    band.setflags(write=False)
    return band


def _low_field(shape: tuple[int, int, int], amplitude: float, seed: int) -> np.ndarray:
    c, h, w = shape
    white = standard_normal(c * h * w, seed).reshape(c, h, w)
    low = ifft2(fft2(white) * _low_band_unshifted(h, w)).real
    rms = float(np.sqrt(np.mean(low * low)))
    if rms == 0.0:
        raise ProfileInvalid("degenerate background field (all zeros); change the seed")
    return low * (amplitude / rms)


def _detail_pattern(shape: tuple[int, int, int], frequency: int, phases: np.ndarray) -> np.ndarray:
    c, h, w = shape
    hh = np.arange(h, dtype=np.float64)[:, np.newaxis] / h
    ww = np.arange(w, dtype=np.float64)[np.newaxis, :] / w
    arg = 2.0 * np.pi * frequency * (hh + ww)
    # exact unit RMS: the phase-dependent cross term sums to zero whenever
    # 2 * frequency is not a multiple of the grid size, which the
    # frequency bound guarantees
    return np.sqrt(2.0) * np.sin(arg[np.newaxis, :, :] + phases[:, np.newaxis, np.newaxis])


def oracle_features(
    profile: OracleProfile,
    schedule: NoiseSchedule,
    n_images: int,
    shape: tuple[int, int, int],
    seed: int,
    out_dir,
    timesteps: tuple[int, ...] | None = None,
    dtype: str = "f64",
) -> DatasetManifest:
    """Write a synthetic dataset whose correct selection answer is known.

    Image i is a fixed band-limited background (independent of t, keyed by
    ``stream_seed(seed, i, 0)``) plus a diagonal sinusoid at the profile's
    detail frequency with per-channel phases keyed by
    ``stream_seed(seed, i, t)`` and amplitude ``curve[t-1]``. Because the
    background is identical across timesteps, the per-image high-frequency
    ratio is strictly increasing in the detail amplitude; a detail
    frequency >= 3 keeps the sinusoid spectrally clear of the background
    band. Writes tensors plus ``manifest.json`` into ``out_dir``.
    """
    if profile.total_timesteps != schedule.total_timesteps:
        raise ProfileInvalid(
            f"amplitude curve covers {profile.total_timesteps} timesteps but the "
            f"schedule has {schedule.total_timesteps}"
        )
    c, h, w = (int(d) for d in shape)
    if min(c, h, w) < 1:
        raise ShapeMismatch(f"oracle shape must be positive, got {shape}")
    if n_images < 1:
        raise ProfileInvalid(f"need at least one image, got {n_images}")
    if 2 * profile.detail_frequency >= min(h, w):
        raise FrequencyTooHigh(
            f"detail frequency {profile.detail_frequency} needs a grid larger than "
            f"{h}x{w} (require 2 * frequency < min(H, W))"
        )
    grid = tuple(range(1, profile.total_timesteps + 1)) if timesteps is None else tuple(timesteps)
    if len(grid) < 1 or len(set(grid)) != len(grid) or list(grid) != sorted(grid):
        raise ProfileInvalid("timestep grid must be non-empty, unique, ascending")
    if grid[0] < 1 or grid[-1] > profile.total_timesteps:
        raise ProfileInvalid(f"timestep grid must stay within [1, {profile.total_timesteps}]")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lows = [
        _low_field((c, h, w), profile.base_low_freq_amplitude, stream_seed(seed, i, 0))
        for i in range(n_images)
    ]
    entries = []
    for t in grid:
        amplitude = profile.detail_amplitude_curve[t - 1]
        for i in range(n_images):
            phases = 2.0 * np.pi * uniforms(c, stream_seed(seed, i, t))
            detail = _detail_pattern((c, h, w), profile.detail_frequency, phases)
            meta = FeatureMeta(image_id=f"img{i:04d}", timestep=t, group="oracle", dtype=dtype)
            fmap = FeatureMap(lows[i] + amplitude * detail, meta)
            name = f"t{t:04d}_img{i:04d}.npy"
            write_tensor(fmap, out / name, dtype)
            entries.append(ManifestEntry(name, meta.image_id, t, meta.group))
    manifest = DatasetManifest(profile.total_timesteps, tuple(entries), False, out)
    save_manifest(manifest, out / "manifest.json")
    return manifest
