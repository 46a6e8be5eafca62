"""Foundational data types: samples, coresets, reproducible RNG streams.

Randomness contract
-------------------
All algorithmic randomness flows through RngStream, a thin immutable
handle over numpy's counter-based Philox generator keyed by the 128-bit
pair (seed, stream_id). Identical (seed, stream_id) produce identical
draws on every platform, and child streams derived with child_stream are
statistically independent, so replications can run in parallel without
sharing generator state. The generator family is fixed: changing it
would silently invalidate every seed-pinned result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndivisibleBinning

_MASK64 = 0xFFFFFFFFFFFFFFFF


class Sample:
    """An immutable sequence of d-dimensional real points (one per row).

    Args:
      points: array-like of shape (n, d); a 1-d array is treated as n
        points in one dimension. Entries must all be finite.
    """

    __slots__ = ("points",)

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError(f"points must be a 2-d array, got ndim={pts.ndim}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("sample contains non-finite entries")
        pts = pts.view()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Sample(n={self.n}, d={self.d})"


class Coreset:
    """An ordered subset of a parent sample, stored as row indices."""

    __slots__ = ("parent", "indices")

    def __init__(self, parent: Sample, indices):
        idx = np.asarray(indices, dtype=np.int64)
        if idx.ndim != 1:
            raise ValueError("indices must be 1-d")
        if idx.size and (idx.min() < 0 or idx.max() >= parent.n):
            raise ValueError("coreset index out of range")
        if np.unique(idx).size != idx.size:
            raise ValueError("coreset indices must be distinct")
        idx = idx.view()
        idx.flags.writeable = False
        self.parent = parent
        self.indices = idx

    @property
    def points(self) -> np.ndarray:
        return self.parent.points[self.indices]

    def __len__(self) -> int:
        return self.indices.size

    def __repr__(self) -> str:
        return f"Coreset(size={len(self)}, parent_n={self.parent.n})"


def _mix64(stream_id: int, index: int) -> int:
    # splitmix64-style finalizer over the (stream_id, index) pair; good
    # avalanche keeps sibling and nested child ids collision-free in practice
    z = (stream_id + 0x9E3779B97F4A7C15 * ((index & _MASK64) + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class RngStream:
    """Handle for one deterministic random stream.

    Never share the Generator returned by generator() across tasks; give
    each parallel task its own child stream instead.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", self.seed & _MASK64)
        object.__setattr__(self, "stream_id", self.stream_id & _MASK64)

    def generator(self) -> np.random.Generator:
        """Fresh Generator positioned at the start of this stream."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, _mix64(self.stream_id, index))


def child_stream(rng: RngStream, index: int) -> RngStream:
    """Derive the index-th child stream of rng (deterministic, nestable)."""
    return rng.child(index)


@dataclass(frozen=True)
class TestReport:
    """Outcome of one test invocation.

    For rank-calibrated tests, rank is the position of statistic among
    the sorted permuted-or-bootstrapped replicas plus itself (ties broken
    uniformly at random), threshold_index is ceil((1-alpha)(B+1)), and
    boundary_prob is the randomized rejection probability used when
    rank == threshold_index. Threshold-style tests (asymptotic block and
    incomplete) leave the rank machinery unset and record the comparison
    threshold instead.
    """

    statistic: float
    permuted: tuple = ()
    rank: int | None = None
    threshold_index: int | None = None
    reject: bool = False
    boundary_prob: float = 0.0
    elapsed_ns: int = 0
    threshold: float | None = None


def bin_partition(sample: Sample, bins: int) -> list[Sample]:
    """Split a sample into `bins` contiguous equal-sized views, in order.

    The views share storage with the input; concatenating them row-wise
    reproduces the sample exactly.
    """
    if bins < 1:
        raise IndivisibleBinning(f"bins must be >= 1, got {bins}")
    if sample.n % bins != 0:
        raise IndivisibleBinning(f"{bins} bins do not divide n={sample.n}")
    width = sample.n // bins
    return [Sample(sample.points[i * width:(i + 1) * width]) for i in range(bins)]


def load_sample(path, skip_header: bool = False) -> Sample:
    """Read a sample from CSV: one point per row, comma-separated reals.

    Rejects ragged rows and non-finite entries at load time.
    """
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if skip_header and lineno == 1:
                skip_header = False
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ValueError(f"{path}:{lineno}: expected {width} columns, got {len(fields)}")
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    pts = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(pts).all():
        raise ValueError(f"{path}: non-finite entry in sample")
    return Sample(pts)


def save_points(path, points: np.ndarray) -> None:
    """Write points to CSV with round-trip float formatting."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    with open(path, "w", encoding="utf-8") as fh:
        for row in pts:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
