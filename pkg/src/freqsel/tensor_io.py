"""On-disk tensor container and dataset manifest handling.

Tensor container
----------------
A tensor file is a restricted NPY v1.0 stream:

  * bytes 0-5   magic ``\\x93NUMPY``
  * bytes 6-7   version ``\\x01\\x00``
  * bytes 8-9   little-endian uint16: header length
  * header      ASCII Python dict literal with exactly the keys
    ``'descr'`` (``'<f4'`` or ``'<f8'``), ``'fortran_order'`` (``False``)
    and ``'shape'`` (rank 2 or 3, all dims >= 1), padded with spaces so
    that the total preamble length is a multiple of 64
  * payload     raw little-endian IEEE-754 values, C order, exactly
    ``prod(shape) * itemsize`` bytes

Anything else - wrong magic, wrong version, truncated or oversized
payloads, Fortran order, zero dims, exotic dtypes, NaN/Inf values - is
rejected with a specific exception rather than guessed at. Rank-2 files
are promoted to a single-channel rank-3 map on load. f32 payloads are
widened to f64 in memory; a read-write-read trip through either dtype is
byte-identical.

Dataset manifest
----------------
JSON index binding tensor files to dataset identity::

    {"total_timesteps": int,
     "entries": [{"path": str, "image_id": str, "timestep": int,
                  "group": str, "label": int|null, "accuracy": float|null}]}

Relative entry paths resolve against the manifest's own directory. All
tensors sharing a timestep must share a shape unless the manifest sets
``"allow_ragged": true``.
"""
from __future__ import annotations

import ast
import json
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    IoFailure,
    MalformedHeader,
    ManifestSchemaError,
    MetaMismatch,
    MissingFile,
    NonFiniteValue,
    RankError,
    ShapeMismatch,
    UnsupportedDtype,
)

__all__ = [
    "FeatureMeta",
    "FeatureMap",
    "ManifestEntry",
    "DatasetManifest",
    "read_tensor",
    "write_tensor",
    "reshape_tokens",
    "flatten_tokens",
    "load_manifest",
    "save_manifest",
    "load_entry",
    "iter_loaded",
    "iterate",
    "atomic_write_bytes",
    "atomic_write_text",
]

_MAGIC = b"\x93NUMPY"
_VERSION = b"\x01\x00"
_ALIGN = 64
_DESCR_BY_DTYPE = {"f32": "<f4", "f64": "<f8"}
_DTYPE_BY_DESCR = {v: k for k, v in _DESCR_BY_DTYPE.items()}
_HEADER_KEYS = {"descr", "fortran_order", "shape"}


@dataclass(frozen=True)
class FeatureMeta:
    """Identity attached to one feature map."""

    image_id: str = ""
    timestep: int = 1
    group: str = ""
    dtype: str = "f64"

    def __post_init__(self) -> None:
        if self.timestep < 1:
            raise ValueError(f"timestep must be >= 1, got {self.timestep}")
        if self.dtype not in _DESCR_BY_DTYPE:
            raise ValueError(f"dtype must be 'f32' or 'f64', got {self.dtype!r}")


@dataclass(frozen=True)
class FeatureMap:
    """A (channels, height, width) float64 array plus its identity.

    Values are copied on construction, forced C-contiguous, and marked
    read-only; rank-2 input is promoted to channels = 1. Finiteness is
    checked at the I/O boundary (read/write), not here, so in-memory
    scratch maps stay cheap to build.
    """

    values: np.ndarray
    meta: FeatureMeta = field(default_factory=FeatureMeta)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if arr.ndim == 2:
            arr = arr[np.newaxis, :, :]
        if arr.ndim != 3:
            raise RankError(f"feature map must have rank 2 or 3, got rank {arr.ndim}")
        if min(arr.shape) < 1:
            raise ShapeMismatch(f"feature map dims must all be >= 1, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]


def _check_finite(arr: np.ndarray, context: str) -> None:
    if not np.isfinite(arr).all():
        raise NonFiniteValue(f"{context}: payload contains NaN or Inf")


def _parse_header_dict(header: bytes, context: str) -> dict:
    try:
        text = header.decode("ascii")
    except UnicodeDecodeError as exc:
        raise MalformedHeader(f"{context}: header is not ASCII") from exc
    try:
        parsed = ast.literal_eval(text.strip())
    except (ValueError, SyntaxError) as exc:
        raise MalformedHeader(f"{context}: header is not a dict literal") from exc
    if not isinstance(parsed, dict) or set(parsed) != _HEADER_KEYS:
        raise MalformedHeader(
            f"{context}: header must have exactly the keys descr/fortran_order/shape"
        )
    return parsed


def _parse_tensor_bytes(raw: bytes, context: str) -> tuple[np.ndarray, str]:
    if len(raw) < 10 or raw[:6] != _MAGIC:
        raise MalformedHeader(f"{context}: bad magic, not a tensor file")
    if raw[6:8] != _VERSION:
        raise MalformedHeader(f"{context}: unsupported container version {raw[6:8]!r}")
    (header_len,) = struct.unpack("<H", raw[8:10])
    body_start = 10 + header_len
    if body_start > len(raw):
        raise MalformedHeader(f"{context}: header extends past end of file")
    fields = _parse_header_dict(raw[10:body_start], context)

    descr = fields["descr"]
    if not isinstance(descr, str):
        raise MalformedHeader(f"{context}: descr must be a string")
    if descr not in _DTYPE_BY_DESCR:
        raise UnsupportedDtype(f"{context}: dtype {descr!r} not supported (need '<f4' or '<f8')")
    if fields["fortran_order"] is not False:
        raise MalformedHeader(f"{context}: fortran_order must be False")

    shape = fields["shape"]
    if not isinstance(shape, tuple) or not all(
        isinstance(d, int) and not isinstance(d, bool) for d in shape
    ):
        raise MalformedHeader(f"{context}: shape must be a tuple of ints")
    if len(shape) not in (2, 3):
        raise RankError(f"{context}: rank must be 2 or 3, got {len(shape)}")
    if any(d < 1 for d in shape):
        raise MalformedHeader(f"{context}: zero or negative dimension in shape {shape}")

    itemsize = 4 if descr == "<f4" else 8
    expected = itemsize
    for d in shape:
        expected *= d
    payload = raw[body_start:]
    if len(payload) != expected:
        raise MalformedHeader(
            f"{context}: payload is {len(payload)} bytes, shape {shape} needs {expected}"
        )
    values = np.frombuffer(payload, dtype=descr).astype(np.float64).reshape(shape)
    _check_finite(values, context)
    return values, _DTYPE_BY_DESCR[descr]


def read_tensor(path, meta: FeatureMeta | None = None) -> FeatureMap:
    """Load one tensor file. `meta` overrides identity; file dtype always wins."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {p}: {exc}") from exc
    values, dtype = _parse_tensor_bytes(raw, str(p))
    if meta is None:
        meta = FeatureMeta(image_id=p.stem, dtype=dtype)
    else:
        meta = FeatureMeta(meta.image_id, meta.timestep, meta.group, dtype)
    return FeatureMap(values, meta)


def _build_header(shape: tuple[int, ...], descr: str) -> bytes:
    body = "{'descr': '%s', 'fortran_order': False, 'shape': (%s), }" % (
        descr,
        ", ".join(str(d) for d in shape),
    )
    pad = -(10 + len(body)) % _ALIGN
    header = (body + " " * pad).encode("ascii")
    return _MAGIC + _VERSION + struct.pack("<H", len(header)) + header


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a sibling temp file and rename, so readers never see partials."""
    p = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=p.name + ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, p)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {p}: {exc}") from exc


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_tensor(fmap: FeatureMap, path, dtype: str | None = None) -> None:
    """Serialise a feature map; `dtype` defaults to the map's own."""
    dtype = fmap.meta.dtype if dtype is None else dtype
    if dtype not in _DESCR_BY_DTYPE:
        raise UnsupportedDtype(f"cannot write dtype {dtype!r} (need 'f32' or 'f64')")
    _check_finite(fmap.values, str(path))
    descr = _DESCR_BY_DTYPE[dtype]
    payload = np.ascontiguousarray(fmap.values).astype(descr).tobytes()
    atomic_write_bytes(path, _build_header(fmap.values.shape, descr) + payload)


def reshape_tokens(tokens, height: int, width: int, meta: FeatureMeta | None = None) -> FeatureMap:
    """Fold a (tokens, dims) matrix into a (dims, height, width) map.

    Token order is row-major over the spatial grid, matching the way
    transformer activations are flattened.
    """
    arr = np.asarray(tokens, dtype=np.float64)
    if arr.ndim != 2:
        raise RankError(f"token matrix must have rank 2, got rank {arr.ndim}")
    if height < 1 or width < 1:
        raise ShapeMismatch(f"target grid must be positive, got {height}x{width}")
    if arr.shape[0] != height * width:
        raise ShapeMismatch(
            f"{arr.shape[0]} tokens cannot fill a {height}x{width} grid"
        )
    values = arr.reshape(height, width, arr.shape[1]).transpose(2, 0, 1)
    return FeatureMap(values, meta or FeatureMeta())


def flatten_tokens(fmap: FeatureMap) -> np.ndarray:
    """Inverse of :func:`reshape_tokens`: (channels, H, W) -> (H*W, channels)."""
    return fmap.values.transpose(1, 2, 0).reshape(fmap.height * fmap.width, fmap.channels)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    image_id: str
    timestep: int
    group: str
    label: int | None = None
    accuracy: float | None = None


@dataclass(frozen=True)
class DatasetManifest:
    total_timesteps: int
    entries: tuple[ManifestEntry, ...]
    allow_ragged: bool = False
    root: Path = field(default_factory=Path)

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else self.root / p

    def timesteps(self) -> tuple[int, ...]:
        return tuple(sorted({e.timestep for e in self.entries}))

    def entries_at(self, timestep: int) -> tuple[ManifestEntry, ...]:
        return tuple(e for e in self.entries if e.timestep == timestep)


def _schema(cond: bool, message: str) -> None:
    if not cond:
        raise ManifestSchemaError(message)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _parse_entry(raw, index: int, total: int, context: str) -> ManifestEntry:
    where = f"{context}: entries[{index}]"
    _schema(isinstance(raw, dict), f"{where} must be an object")
    allowed = {"path", "image_id", "timestep", "group", "label", "accuracy"}
    _schema(set(raw) <= allowed, f"{where} has unknown keys {sorted(set(raw) - allowed)}")
    for key in ("path", "image_id", "timestep", "group"):
        _schema(key in raw, f"{where} missing required key {key!r}")
    _schema(isinstance(raw["path"], str) and raw["path"] != "", f"{where}: path must be a non-empty string")
    _schema(isinstance(raw["image_id"], str), f"{where}: image_id must be a string")
    _schema(isinstance(raw["group"], str), f"{where}: group must be a string")
    t = raw["timestep"]
    _schema(_is_int(t), f"{where}: timestep must be an integer")
    _schema(1 <= t <= total, f"{where}: timestep {t} outside [1, {total}]")
    label = raw.get("label")
    _schema(label is None or _is_int(label), f"{where}: label must be an integer or null")
    acc = raw.get("accuracy")
    if acc is not None:
        _schema(
            isinstance(acc, (int, float)) and not isinstance(acc, bool) and 0.0 <= acc <= 1.0,
            f"{where}: accuracy must be in [0, 1] or null",
        )
        acc = float(acc)
    return ManifestEntry(raw["path"], raw["image_id"], t, raw["group"], label, acc)


def load_manifest(path) -> DatasetManifest:
    """Parse and validate a manifest; every referenced file must exist."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read manifest {p}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestSchemaError(f"{p}: not valid JSON ({exc})") from exc

    _schema(isinstance(doc, dict), f"{p}: manifest must be a JSON object")
    allowed = {"total_timesteps", "entries", "allow_ragged"}
    _schema(set(doc) <= allowed, f"{p}: unknown keys {sorted(set(doc) - allowed)}")
    _schema("total_timesteps" in doc and "entries" in doc, f"{p}: need total_timesteps and entries")
    total = doc["total_timesteps"]
    _schema(_is_int(total) and total >= 1, f"{p}: total_timesteps must be an integer >= 1")
    ragged = doc.get("allow_ragged", False)
    _schema(isinstance(ragged, bool), f"{p}: allow_ragged must be a boolean")
    _schema(isinstance(doc["entries"], list), f"{p}: entries must be a list")

    entries = tuple(
        _parse_entry(raw, i, total, str(p)) for i, raw in enumerate(doc["entries"])
    )
    manifest = DatasetManifest(total, entries, ragged, p.parent)
    for entry in entries:
        target = manifest.resolve(entry)
        if not target.is_file():
            raise MissingFile(f"{p}: entry {entry.image_id!r} points at missing file {target}")
    return manifest


def save_manifest(manifest: DatasetManifest, path) -> None:
    doc: dict = {
        "total_timesteps": manifest.total_timesteps,
        "entries": [
            {
                "path": e.path,
                "image_id": e.image_id,
                "timestep": e.timestep,
                "group": e.group,
                "label": e.label,
                "accuracy": e.accuracy,
            }
            for e in manifest.entries
        ],
    }
    if manifest.allow_ragged:
        doc["allow_ragged"] = True
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def load_entry(manifest: DatasetManifest, entry: ManifestEntry) -> FeatureMap:
    target = manifest.resolve(entry)
    if not target.is_file():
        raise MissingFile(f"entry {entry.image_id!r} points at missing file {target}")
    meta = FeatureMeta(entry.image_id, entry.timestep, entry.group)
    return read_tensor(target, meta)


def iter_loaded(
    manifest: DatasetManifest, timesteps: Iterable[int] | None = None
) -> Iterator[tuple[ManifestEntry, FeatureMap]]:
    """Yield (entry, map) pairs in manifest order, optionally filtered.

    Unless the manifest allows ragged data, all maps sharing a timestep must
    share a shape; the first disagreement aborts the iteration.
    """
    wanted = None if timesteps is None else set(timesteps)
    seen: dict[int, tuple[tuple[int, ...], str]] = {}
    for entry in manifest.entries:
        if wanted is not None and entry.timestep not in wanted:
            continue
        fmap = load_entry(manifest, entry)
        if not manifest.allow_ragged:
            dims = fmap.values.shape
            first_dims, first_path = seen.setdefault(entry.timestep, (dims, entry.path))
            if dims != first_dims:
                raise MetaMismatch(
                    f"timestep {entry.timestep}: {entry.path} has shape {dims} "
                    f"but {first_path} has shape {first_dims}"
                )
        yield entry, fmap


def iterate(manifest: DatasetManifest, timestep: int | None = None) -> Iterator[FeatureMap]:
    """Yield feature maps in manifest order, optionally for one timestep."""
    steps = None if timestep is None else (timestep,)
    for _, fmap in iter_loaded(manifest, steps):
        yield fmap
