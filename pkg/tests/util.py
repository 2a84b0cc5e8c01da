"""Shared test helpers: independent oracles and fixture builders.

The oracles here deliberately avoid the library's own code paths: the DFT
oracle is the quadratic-time definition evaluated by matrix product, the
Fisher oracle materialises full scatter matrices, and the stream oracle is
a pure-Python big-int reimplementation of the documented generator.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from freqsel import (
    DatasetManifest,
    FeatureMap,
    FeatureMeta,
    ManifestEntry,
    gaussian_highpass_mask,
    save_manifest,
    write_tensor,
)
from freqsel.errors import (
    MalformedHeader,
    NonFiniteValue,
    RankError,
    UnsupportedDtype,
)

MASK64 = (1 << 64) - 1


# --- quadratic-time DFT oracle ---------------------------------------------

def naive_dft2(x) -> np.ndarray:
    """O(H^2 W^2) DFT straight from the definition."""
    x = np.asarray(x, dtype=np.complex128)
    h, w = x.shape[-2], x.shape[-1]
    wh = np.exp(-2j * np.pi * np.outer(np.arange(h), np.arange(h)) / h)
    ww = np.exp(-2j * np.pi * np.outer(np.arange(w), np.arange(w)) / w)
    return np.einsum("uh,...hw,wv->...uv", wh, x, ww)


def rel_err(got, want) -> float:
    got, want = np.asarray(got), np.asarray(want)
    denom = np.linalg.norm(want.ravel())
    if denom == 0.0:
        return float(np.linalg.norm(got.ravel()))
    return float(np.linalg.norm((got - want).ravel()) / denom)


# --- pure-Python reimplementation of the noise stream ------------------------

def mix64_py(z: int) -> int:
    z &= MASK64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return (z ^ (z >> 31)) & MASK64


def stream_bits_py(seed: int, count: int) -> list[int]:
    return [mix64_py((seed + (j + 1) * 0x9E3779B97F4A7C15) & MASK64) for j in range(count)]


def normals_py(count: int, seed: int) -> list[float]:
    import math

    pairs = (count + 1) // 2
    bits = stream_bits_py(seed, 2 * pairs)
    out: list[float] = []
    for a, b in zip(bits[0::2], bits[1::2]):
        u1 = ((a >> 11) + 1) * 2.0**-53
        u2 = (b >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        out.append(r * math.cos(2.0 * math.pi * u2))
        out.append(r * math.sin(2.0 * math.pi * u2))
    return out[:count]


# --- Fisher oracle via explicit scatter matrices ------------------------------

def fisher_scatter_oracle(embeddings, labels) -> tuple[float, float]:
    """(trace_between, trace_within) from materialised d x d scatters."""
    x = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels)
    mu = x.mean(axis=0)
    d = x.shape[1]
    s_w = np.zeros((d, d))
    s_b = np.zeros((d, d))
    for cls in np.unique(labels):
        rows = x[labels == cls]
        mc = rows.mean(axis=0)
        centred = rows - mc
        s_w += centred.T @ centred
        offset = (mc - mu)[:, None]
        s_b += rows.shape[0] * (offset @ offset.T)
    return float(np.trace(s_b)), float(np.trace(s_w))


# --- dataset builders ----------------------------------------------------------

def make_map(values, image_id: str = "m", timestep: int = 1, group: str = "") -> FeatureMap:
    return FeatureMap(np.asarray(values, dtype=np.float64), FeatureMeta(image_id, timestep, group))


def write_dataset(dirpath, maps, total_timesteps: int, **manifest_extra) -> Path:
    """Write maps + manifest.json into `dirpath`; returns the manifest path."""
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, fmap in enumerate(maps):
        name = f"t{fmap.meta.timestep:04d}_{i:04d}.npy"
        write_tensor(fmap, dirpath / name)
        entries.append(
            ManifestEntry(
                name,
                fmap.meta.image_id,
                fmap.meta.timestep,
                fmap.meta.group,
                manifest_extra.get("labels", {}).get(i),
                None,
            )
        )
    manifest = DatasetManifest(total_timesteps, tuple(entries), manifest_extra.get("allow_ragged", False), dirpath)
    save_manifest(manifest, dirpath / "manifest.json")
    return dirpath / "manifest.json"


def write_exact_hfr_fixture(
    dirpath, timesteps, hfr_values, size: int = 128, frequency: int = 60, total_timesteps: int = 1000
) -> Path:
    """Dataset whose mean-HFR curve hits prescribed values almost exactly.

    Each map is  1 + b * sin(2 pi f (h + w) / N): all energy sits in the DC
    bin (gain exactly 0) and the two conjugate sinusoid bins (equal gain g).
    Solving hfr = g^2 * E_sin / (E_dc + E_sin) for the sinusoid amplitude
    gives b = sqrt(2 s / (1 - s)) with s = hfr / g^2, so the realised ratio
    matches the target to rounding error. Requires g^2 > max(hfr), which a
    128 grid with frequency 60 satisfies for the default cutoff.
    """
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    mask = gaussian_highpass_mask(size, size, 30.0)
    gain_sq = float(mask.unshifted()[frequency, frequency]) ** 2
    assert gain_sq > max(hfr_values), "fixture grid too small for these ratios"
    hh = np.arange(size, dtype=np.float64)[:, None]
    ww = np.arange(size, dtype=np.float64)[None, :]
    pattern = np.sin(2.0 * np.pi * frequency * (hh + ww) / size)
    entries = []
    for t, r in zip(timesteps, hfr_values):
        s = r / gain_sq
        amp = np.sqrt(2.0 * s / (1.0 - s))
        fmap = FeatureMap(1.0 + amp * pattern, FeatureMeta(f"ref{t:04d}", t, "reference"))
        name = f"t{t:04d}.npy"
        write_tensor(fmap, dirpath / name)
        entries.append(ManifestEntry(name, fmap.meta.image_id, t, "reference"))
    manifest = DatasetManifest(total_timesteps, tuple(entries), False, dirpath)
    save_manifest(manifest, dirpath / "manifest.json")
    return dirpath / "manifest.json"


# --- corrupted tensor-file corpus ----------------------------------------------

def _raw_npy(shape="(2, 3)", descr="'<f8'", fortran="False", payload=None, header_literal=None) -> bytes:
    body = (
        header_literal
        if header_literal is not None
        else "{'descr': %s, 'fortran_order': %s, 'shape': %s, }" % (descr, fortran, shape)
    )
    pad = -(10 + len(body)) % 64
    header = (body + " " * pad).encode("latin-1")
    if payload is None:
        payload = np.arange(6, dtype="<f8").tobytes()
    return b"\x93NUMPY\x01\x00" + struct.pack("<H", len(header)) + header + payload


def corrupt_corpus() -> list[tuple[str, bytes, type]]:
    """Exactly 20 malformed tensor files with their documented exception."""
    good = _raw_npy()
    return [
        ("bad_magic", b"\x00" + good[1:], MalformedHeader),
        ("bad_version", good[:6] + b"\x02\x00" + good[8:], MalformedHeader),
        ("header_past_eof", good[:8] + struct.pack("<H", 60000) + good[10:], MalformedHeader),
        ("non_ascii_header", good[:12] + b"\xff" + good[13:], MalformedHeader),
        ("header_not_dict", _raw_npy(header_literal="[1, 2, 3]"), MalformedHeader),
        ("header_missing_key", _raw_npy(header_literal="{'descr': '<f8', 'shape': (2, 3), }"), MalformedHeader),
        (
            "header_extra_key",
            _raw_npy(header_literal="{'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), 'pad': 1, }"),
            MalformedHeader,
        ),
        ("integer_dtype", _raw_npy(descr="'<i8'", payload=np.arange(6, dtype="<i8").tobytes()), UnsupportedDtype),
        ("big_endian_dtype", _raw_npy(descr="'>f8'", payload=np.arange(6, dtype=">f8").tobytes()), UnsupportedDtype),
        ("descr_not_string", _raw_npy(descr="7"), MalformedHeader),
        ("fortran_order_true", _raw_npy(fortran="True"), MalformedHeader),
        ("rank_1", _raw_npy(shape="(6,)"), RankError),
        ("rank_4", _raw_npy(shape="(1, 1, 2, 3)"), RankError),
        ("zero_dim", _raw_npy(shape="(0, 6)", payload=b""), MalformedHeader),
        ("shape_list", _raw_npy(shape="[2, 3]"), MalformedHeader),
        ("shape_float", _raw_npy(shape="(2.0, 3)"), MalformedHeader),
        ("payload_truncated", good[:-8], MalformedHeader),
        ("payload_oversized", good + b"\x00" * 8, MalformedHeader),
        ("nan_payload", _raw_npy(payload=np.array([1, 2, np.nan, 4, 5, 6], dtype="<f8").tobytes()), NonFiniteValue),
        ("inf_payload", _raw_npy(payload=np.array([1, 2, np.inf, 4, 5, 6], dtype="<f8").tobytes()), NonFiniteValue),
    ]
