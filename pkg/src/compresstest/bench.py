"""Synthetic generators, seeded replication harness, and Wilson intervals."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import RngStream, Sample, child_stream

try:
    from scipy.special import ndtri as _ndtri
except ImportError:  # pragma: no cover
    _ndtri = None

BENCH_COLUMNS = (
    "scenario", "test", "n", "d", "g", "s", "B", "r", "block_size", "ell",
    "alpha", "reps", "rejections", "rate", "wilson_lo", "wilson_hi",
    "mean_ns", "median_ns",
)


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic data setting: generator family, size, and parameters."""

    kind: str          # "gauss" or "blobs"
    n: int
    d: int = 2
    shift: float = 0.0
    epsilon: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("gauss", "blobs"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.n < 4:
            raise ValueError(f"need n >= 4, got {self.n}")
        if self.shift < 0:
            raise ValueError("shift must be >= 0")
        if self.epsilon < 1:
            raise ValueError("epsilon must be >= 1")
        if not self.label:
            if self.kind == "gauss":
                label = f"gauss:d={self.d},shift={self.shift:g}"
            else:
                label = f"blobs:epsilon={self.epsilon:g}"
            object.__setattr__(self, "label", label)

    def generate(self, rng: RngStream) -> tuple[Sample, Sample]:
        if self.kind == "gauss":
            return gen_gaussian_shift(self.n, self.d, self.shift, rng)
        return gen_blobs(self.n, self.epsilon, rng)


def gen_gaussian_shift(n: int, d: int, shift: float, rng: RngStream) -> tuple[Sample, Sample]:
    """X ~ N(0, I_d)^n and Y ~ N((shift, 0, ..., 0), I_d)^n; shift 0 is the null."""
    gen = rng.generator()
    x = gen.standard_normal((n, d))
    y = gen.standard_normal((n, d))
    y[:, 0] += shift
    return Sample(x), Sample(y)


def gen_blobs(n: int, epsilon: float, rng: RngStream) -> tuple[Sample, Sample]:
    """2-d blob mixtures on the 3x3 grid {0, 10, 20}^2 with unit-diagonal covariances.

    P components have identity covariance; Q components have correlation
    rho = (epsilon - 1) / (epsilon + 1), giving covariance eigenvalues in
    ratio epsilon along the diagonal axes. epsilon = 1 makes P = Q.
    """
    gen = rng.generator()
    centers = np.array([(a, b) for a in (0.0, 10.0, 20.0) for b in (0.0, 10.0, 20.0)])
    rho = (epsilon - 1.0) / (epsilon + 1.0)
    # Cholesky factor of [[1, rho], [rho, 1]]
    chol = np.array([[1.0, 0.0], [rho, math.sqrt(1.0 - rho * rho)]])
    cx = gen.integers(0, 9, size=n)
    x = centers[cx] + gen.standard_normal((n, 2))
    cy = gen.integers(0, 9, size=n)
    y = centers[cy] + gen.standard_normal((n, 2)) @ chol.T
    return Sample(x), Sample(y)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if not (0 <= successes <= trials) or trials < 1:
        raise ValueError(f"need 0 <= successes <= trials >= 1, got {successes}/{trials}")
    if _ndtri is None:  # pragma: no cover
        raise RuntimeError("scipy required for Wilson intervals")
    z = float(_ndtri(0.5 + confidence / 2.0))
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def wilson_halfwidth(p: float, trials: int, confidence: float) -> float:
    """Half-width of the Wilson interval anchored at proportion p."""
    lo, hi = wilson_interval(round(p * trials), trials, confidence)
    return (hi - lo) / 2.0


@dataclass(frozen=True)
class RejectionSummary:
    """Aggregate of one replicated test run."""

    reps: int
    rejections: int
    rate: float
    wilson_lo: float
    wilson_hi: float
    mean_elapsed_ns: int
    median_elapsed_ns: int


def run_replications(test, scenario: ScenarioSpec, reps: int, seed: int,
                     parallelism: int = 1, confidence: float = 0.95) -> RejectionSummary:
    """Replicate a test over freshly generated data with indexed child streams.

    test is a callable (Sample, Sample, RngStream) -> report with .reject
    and .elapsed_ns. Replication i derives its data stream and test stream
    from child i of the root seed, so the summary is identical for any
    parallelism level (timing aside).
    """
    if reps < 1:
        raise ValueError(f"need reps >= 1, got {reps}")
    root = RngStream(seed)

    def one(i: int) -> tuple[bool, int]:
        rep = child_stream(root, i)
        x, y = scenario.generate(child_stream(rep, 0))
        report = test(x, y, child_stream(rep, 1))
        return bool(report.reject), int(report.elapsed_ns)

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(one, range(reps)))
    else:
        results = [one(i) for i in range(reps)]

    rejections = sum(r for r, _ in results)
    times = np.array([t for _, t in results], dtype=np.int64)
    lo, hi = wilson_interval(rejections, reps, confidence)
    return RejectionSummary(
        reps=reps,
        rejections=rejections,
        rate=rejections / reps,
        wilson_lo=lo,
        wilson_hi=hi,
        mean_elapsed_ns=int(times.mean()),
        median_elapsed_ns=int(np.median(times)),
    )


def bench_row(scenario: str, test: str, summary: RejectionSummary, *, n: int,
              d=None, g=None, s=None, B=None, r=None, block_size=None, ell=None,
              alpha: float = 0.05) -> dict:
    """One bench CSV row; unused parameter columns stay empty."""

    def cell(v):
        return "" if v is None else (f"{v:g}" if isinstance(v, float) else str(v))

    return {
        "scenario": scenario,
        "test": test,
        "n": str(n),
        "d": cell(d),
        "g": cell(g),
        "s": cell(s),
        "B": cell(B),
        "r": cell(r),
        "block_size": cell(block_size),
        "ell": cell(ell),
        "alpha": f"{alpha:g}",
        "reps": str(summary.reps),
        "rejections": str(summary.rejections),
        "rate": repr(summary.rate),
        "wilson_lo": repr(summary.wilson_lo),
        "wilson_hi": repr(summary.wilson_hi),
        "mean_ns": str(summary.mean_elapsed_ns),
        "median_ns": str(summary.median_elapsed_ns),
    }


def write_bench_csv(path, rows: list[dict], append: bool = False) -> None:
    """Write bench rows under the fixed schema header."""
    import csv
    import os

    fresh = not (append and os.path.exists(path) and os.path.getsize(path) > 0)
    mode = "a" if not fresh else "w"
    with open(path, mode, encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        if fresh:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_bench_csv(path) -> list[dict]:
    """Parse a bench CSV back into row dicts (schema-checked)."""
    import csv

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != BENCH_COLUMNS:
            raise ValueError(f"{path}: unexpected bench CSV header {reader.fieldnames}")
        return list(reader)
