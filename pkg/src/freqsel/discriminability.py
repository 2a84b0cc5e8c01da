"""Label-based separability scores and rank correlations.

The Fisher score of a labeled embedding set is computed in trace form,

    J = tr(S_b) / tr(S_w)
    tr(S_w) = sum_k sum_{x in class k} ||x - mu_k||^2
    tr(S_b) = sum_k n_k ||mu_k - mu||^2,

which never materialises a d x d scatter matrix and therefore scales to
wide embeddings. The traces satisfy tr(S_b) + tr(S_w) = total scatter
around the global mean. Partial sums are combined with the fixed pairwise
tree so the result is independent of class iteration order.

Correlations come in both flavours: Pearson on raw values and Spearman as
Pearson on average-tie ranks (stable mergesort ordering).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (
    ConstantSeries,
    DegenerateWithinScatter,
    EmptyInput,
    InvalidEmbeddingSet,
    SeriesInvalid,
)
from .reduction import pairwise_sum
from .tensor_io import FeatureMap, atomic_write_text

__all__ = [
    "LabeledEmbeddingSet",
    "FisherResult",
    "Correlation",
    "pool_tokens",
    "fisher_score",
    "pearson",
    "spearman",
    "correlate",
    "read_series_csv",
    "write_series_csv",
]


@dataclass(frozen=True)
class LabeledEmbeddingSet:
    """(N, d) float64 embeddings with one integer label per row."""

    embeddings: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        emb = np.array(self.embeddings, dtype=np.float64, order="C", copy=True)
        lab = np.asarray(self.labels)
        if emb.ndim != 2:
            raise InvalidEmbeddingSet(f"embeddings must be (N, d), got shape {emb.shape}")
        if lab.ndim != 1 or lab.shape[0] != emb.shape[0]:
            raise InvalidEmbeddingSet(
                f"need one label per row: {emb.shape[0]} rows, {lab.shape} labels"
            )
        if emb.shape[0] < 2:
            raise InvalidEmbeddingSet("need at least two samples")
        if not np.isfinite(emb).all():
            raise InvalidEmbeddingSet("embeddings contain NaN or Inf")
        if not np.issubdtype(lab.dtype, np.integer):
            raise InvalidEmbeddingSet(f"labels must be integers, got dtype {lab.dtype}")
        lab = lab.astype(np.int64, copy=True)
        if np.unique(lab).size < 2:
            raise InvalidEmbeddingSet("need at least two distinct classes")
        emb.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(self, "labels", lab)


@dataclass(frozen=True)
class FisherResult:
    trace_between: float
    trace_within: float
    score: float


class Correlation(NamedTuple):
    pearson: float
    spearman: float


def pool_tokens(source) -> np.ndarray:
    """Mean over the token axis: FeatureMap -> (channels,), (N, d) -> (d,)."""
    if isinstance(source, FeatureMap):
        tokens = source.values.reshape(source.channels, -1).T
    else:
        tokens = np.asarray(source, dtype=np.float64)
        if tokens.ndim != 2:
            raise EmptyInput(f"token matrix must be (N, d), got shape {tokens.shape}")
    if tokens.shape[0] == 0:
        raise EmptyInput("cannot pool zero tokens")
    return np.asarray(
        [pairwise_sum(tokens[:, j]) / tokens.shape[0] for j in range(tokens.shape[1])]
    )


def fisher_score(data: LabeledEmbeddingSet) -> FisherResult:
    """Trace-form Fisher score; class order cannot affect the result."""
    emb, labels = data.embeddings, data.labels
    grand_mean = pool_tokens(emb)
    within_parts = []
    between_parts = []
    for cls in np.unique(labels):
        rows = emb[labels == cls]
        mu = pool_tokens(rows)
        centred = rows - mu
        within_parts.append(pairwise_sum(centred * centred))
        offset = mu - grand_mean
        between_parts.append(rows.shape[0] * pairwise_sum(offset * offset))
    trace_within = pairwise_sum(within_parts)
    trace_between = pairwise_sum(between_parts)
    if trace_within == 0.0:
        raise DegenerateWithinScatter(
            "all classes are internally constant; the Fisher ratio is undefined"
        )
    return FisherResult(trace_between, trace_within, trace_between / trace_within)


def _as_series(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyInput(f"{name} series is empty")
    if not np.isfinite(arr).all():
        raise SeriesInvalid(f"{name} series contains NaN or Inf")
    return arr


def _check_pair(xs: np.ndarray, ys: np.ndarray) -> None:
    if xs.size != ys.size:
        raise SeriesInvalid(f"series lengths differ: {xs.size} vs {ys.size}")
    if xs.size < 3:
        raise SeriesInvalid(f"need at least 3 paired values, got {xs.size}")


def _pearson_checked(xs: np.ndarray, ys: np.ndarray) -> float:
    xc = xs - pairwise_sum(xs) / xs.size
    yc = ys - pairwise_sum(ys) / ys.size
    ssx = pairwise_sum(xc * xc)
    ssy = pairwise_sum(yc * yc)
    if ssx == 0.0 or ssy == 0.0:
        raise ConstantSeries("correlation is undefined for a zero-variance series")
    r = pairwise_sum(xc * yc) / np.sqrt(ssx * ssy)
    return float(min(1.0, max(-1.0, r)))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank block."""
    n = values.size
    order = np.argsort(values, kind="mergesort")
    sorted_values = values[order]
    starts_flag = np.empty(n, dtype=bool)
    starts_flag[0] = True
    starts_flag[1:] = sorted_values[1:] != sorted_values[:-1]
    group = np.cumsum(starts_flag) - 1
    starts = np.nonzero(starts_flag)[0]
    ends = np.append(starts[1:], n)
    block_rank = (starts + ends - 1) / 2.0 + 1.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = block_rank[group]
    return ranks


def pearson(xs, ys) -> float:
    xs, ys = _as_series(xs, "x"), _as_series(ys, "y")
    _check_pair(xs, ys)
    return _pearson_checked(xs, ys)


def spearman(xs, ys) -> float:
    xs, ys = _as_series(xs, "x"), _as_series(ys, "y")
    _check_pair(xs, ys)
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise ConstantSeries("correlation is undefined for a zero-variance series")
    return _pearson_checked(_average_ranks(xs), _average_ranks(ys))


def correlate(xs, ys) -> Correlation:
    """Pearson and Spearman for one aligned pair of series."""
    xs, ys = _as_series(xs, "x"), _as_series(ys, "y")
    _check_pair(xs, ys)
    return Correlation(pearson=_pearson_checked(xs, ys), spearman=spearman(xs, ys))


def read_series_csv(path) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Parse a ``t,value`` CSV; timesteps must be strictly increasing ints."""
    p = Path(path)
    try:
        lines = p.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise SeriesInvalid(f"cannot read series {p}: {exc}") from exc
    if not lines or lines[0].strip() != "t,value":
        raise SeriesInvalid(f"{p}: first line must be the header 't,value'")
    ts: list[int] = []
    vs: list[float] = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise SeriesInvalid(f"{p}: line {i} must have exactly two fields")
        try:
            t, v = int(parts[0]), float(parts[1])
        except ValueError as exc:
            raise SeriesInvalid(f"{p}: line {i} is not numeric: {line!r}") from exc
        if not np.isfinite(v):
            raise SeriesInvalid(f"{p}: line {i} has a non-finite value")
        if ts and t <= ts[-1]:
            raise SeriesInvalid(f"{p}: timesteps must be strictly increasing (line {i})")
        ts.append(t)
        vs.append(v)
    if not ts:
        raise SeriesInvalid(f"{p}: series has no data rows")
    return tuple(ts), tuple(vs)


def write_series_csv(timesteps, values, path) -> None:
    rows = ["t,value"] + [f"{int(t)},{float(v)!r}" for t, v in zip(timesteps, values)]
    atomic_write_text(path, "\n".join(rows) + "\n")
