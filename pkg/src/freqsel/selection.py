"""Dataset-level HFR curves and automatic timestep selection.

A curve is the per-timestep mean of single-map high-frequency ratios over
a dataset. Selection is argmax over the curve; exact ties break toward the
smaller timestep, and every timestep whose mean lies within ``tie_epsilon``
of the maximum is reported so near-ties are visible rather than silently
resolved.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCurve, EmptyTimestep, MetaMismatch, SeriesInvalid, ZeroEnergyFeature
from .reduction import pairwise_sum
from .spectral import DEFAULT_CUTOFF, hfr
from .tensor_io import DatasetManifest, atomic_write_text, load_entry

__all__ = [
    "HfrCurve",
    "SelectionReport",
    "average_hfr",
    "select_timestep",
    "curve_to_csv_text",
    "write_curve_csv",
    "read_curve_csv",
    "report_to_dict",
    "write_report_json",
]


@dataclass(frozen=True)
class HfrCurve:
    """Mean HFR per timestep, with the sample count behind each mean."""

    timesteps: tuple[int, ...]
    mean_hfr: tuple[float, ...]
    counts: tuple[int, ...]
    cutoff: float = DEFAULT_CUTOFF

    def __post_init__(self) -> None:
        ts = tuple(int(t) for t in self.timesteps)
        vs = tuple(float(v) for v in self.mean_hfr)
        ns = tuple(int(n) for n in self.counts)
        if not (len(ts) == len(vs) == len(ns)):
            raise SeriesInvalid(
                f"curve columns disagree: {len(ts)} timesteps, {len(vs)} values, {len(ns)} counts"
            )
        if any(t < 1 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
            raise SeriesInvalid("curve timesteps must be >= 1 and strictly increasing")
        if not all(np.isfinite(v) and 0.0 <= v <= 1.0 for v in vs):
            raise SeriesInvalid("curve values must be finite and in [0, 1]")
        if any(n < 1 for n in ns):
            raise SeriesInvalid("curve counts must be >= 1")
        object.__setattr__(self, "timesteps", ts)
        object.__setattr__(self, "mean_hfr", vs)
        object.__setattr__(self, "counts", ns)

    def __len__(self) -> int:
        return len(self.timesteps)


@dataclass(frozen=True)
class SelectionReport:
    selected_timestep: int
    max_mean_hfr: float
    ties: tuple[int, ...]
    curve: HfrCurve
    config: dict = field(default_factory=dict)


def _hfr_job(manifest: DatasetManifest, entry, cutoff: float):
    fmap = load_entry(manifest, entry)
    try:
        value = hfr(fmap, cutoff)
    except ZeroEnergyFeature:
        raise ZeroEnergyFeature(
            f"{manifest.resolve(entry)}: zero-energy feature map "
            f"(image {entry.image_id!r}, t={entry.timestep})"
        ) from None
    return entry, fmap.values.shape, value


def average_hfr(
    manifest: DatasetManifest,
    cutoff: float = DEFAULT_CUTOFF,
    timesteps=None,
    threads: int = 1,
) -> HfrCurve:
    """Mean HFR per timestep over a manifest, in a fixed reduction order.

    ``threads`` only parallelises per-map work (load + transform); the
    per-timestep averages are reduced from results in manifest order with
    the fixed pairwise tree, so the curve is bit-identical for any thread
    count. A zero-energy map anywhere aborts with a pointer to the file.
    """
    if timesteps is None:
        steps = manifest.timesteps()
        if not steps:
            raise EmptyTimestep("manifest has no entries")
    else:
        steps = tuple(sorted(set(int(t) for t in timesteps)))
        if not steps:
            raise EmptyTimestep("no timesteps requested")
    wanted = set(steps)
    tasks = [e for e in manifest.entries if e.timestep in wanted]
    present = {e.timestep for e in tasks}
    for t in steps:
        if t not in present:
            raise EmptyTimestep(f"no feature maps at timestep {t}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda e: _hfr_job(manifest, e, cutoff), tasks))
    else:
        results = [_hfr_job(manifest, e, cutoff) for e in tasks]

    # shape agreement is checked on the ordered results, so the verdict is
    # the same no matter how the pool interleaved the work
    by_timestep: dict[int, list[float]] = {t: [] for t in steps}
    first_shape: dict[int, tuple] = {}
    for entry, shape, value in results:
        if not manifest.allow_ragged:
            prev = first_shape.setdefault(entry.timestep, (shape, entry.path))
            if shape != prev[0]:
                raise MetaMismatch(
                    f"timestep {entry.timestep}: {entry.path} has shape {shape} "
                    f"but {prev[1]} has shape {prev[0]}"
                )
        by_timestep[entry.timestep].append(value)

    means = tuple(pairwise_sum(by_timestep[t]) / len(by_timestep[t]) for t in steps)
    counts = tuple(len(by_timestep[t]) for t in steps)
    return HfrCurve(steps, means, counts, float(cutoff))


def select_timestep(curve: HfrCurve, tie_epsilon: float = 1e-4, config: dict | None = None) -> SelectionReport:
    """Argmax of the curve; exact ties break toward the smaller timestep."""
    if len(curve) == 0:
        raise EmptyCurve("cannot select from an empty curve")
    if tie_epsilon < 0.0:
        raise ValueError(f"tie_epsilon must be >= 0, got {tie_epsilon}")
    best = max(curve.mean_hfr)
    selected = min(t for t, v in zip(curve.timesteps, curve.mean_hfr) if v == best)
    ties = tuple(t for t, v in zip(curve.timesteps, curve.mean_hfr) if best - v <= tie_epsilon)
    return SelectionReport(selected, best, ties, curve, dict(config or {}))


def curve_to_csv_text(curve: HfrCurve) -> str:
    lines = ["t,mean_hfr,n"]
    lines += [
        f"{t},{v!r},{n}" for t, v, n in zip(curve.timesteps, curve.mean_hfr, curve.counts)
    ]
    return "\n".join(lines) + "\n"


def write_curve_csv(curve: HfrCurve, path) -> None:
    atomic_write_text(path, curve_to_csv_text(curve))


def read_curve_csv(path, cutoff: float = DEFAULT_CUTOFF) -> HfrCurve:
    """Parse a ``t,mean_hfr,n`` CSV. The cutoff is not stored in the CSV and
    must be supplied by the caller (it is only echoed into reports)."""
    p = Path(path)
    try:
        lines = p.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise SeriesInvalid(f"cannot read curve {p}: {exc}") from exc
    if not lines or lines[0].strip() != "t,mean_hfr,n":
        raise SeriesInvalid(f"{p}: first line must be the header 't,mean_hfr,n'")
    ts: list[int] = []
    vs: list[float] = []
    ns: list[int] = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise SeriesInvalid(f"{p}: line {i} must have exactly three fields")
        try:
            ts.append(int(parts[0]))
            vs.append(float(parts[1]))
            ns.append(int(parts[2]))
        except ValueError as exc:
            raise SeriesInvalid(f"{p}: line {i} is not numeric: {line!r}") from exc
    return HfrCurve(tuple(ts), tuple(vs), tuple(ns), float(cutoff))


def report_to_dict(report: SelectionReport) -> dict:
    return {
        "selected_t": report.selected_timestep,
        "max_mean_hfr": report.max_mean_hfr,
        "ties": list(report.ties),
        "cutoff": report.curve.cutoff,
        "curve": [
            {"t": t, "mean_hfr": v, "n": n}
            for t, v, n in zip(report.curve.timesteps, report.curve.mean_hfr, report.curve.counts)
        ],
        "config": report.config,
    }


def write_report_json(report: SelectionReport, path) -> None:
    atomic_write_text(path, json.dumps(report_to_dict(report), indent=2) + "\n")
