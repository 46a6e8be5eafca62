"""Test procedures: compression-based tests and the baseline MMD tests.

Every rank-calibrated test follows the same exact-size recipe: compute
the observed squared statistic, draw B replicate values that are
exchangeable with it under the null, rank the observed value among all
B+1 with ties broken uniformly at random, and reject when the rank
exceeds b_alpha = ceil((1-alpha)(B+1)) or, with probability
p_alpha = b_alpha - (1-alpha)(B+1), when it equals b_alpha.

RNG threading per invocation: child 0 drives compression or resampling
draws, child 1 the replicate stream, child 2 tie-breaking, child 3 the
boundary coin.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .core import Coreset, RngStream, Sample, TestReport, bin_partition, child_stream
from .errors import (
    DimensionMismatch,
    EmptyKernelList,
    GroupingError,
    IndivisibleBinning,
    IndivisibleBlocking,
    InvalidDesign,
    NoFeasibleBinning,
    UnequalSizes,
)
from .kernels import FeatureMap, KernelSpec, SumKernel, feature_matrix, gram
from .mmd import (
    PairDesign,
    SufficientStats,
    coreset_sufficient_stats,
    permuted_mmd2_batch,
    permuted_mmd2_from_stats,
)
from .thinning import kt_compress

try:
    from scipy.special import ndtri as _ndtri
except ImportError:  # pragma: no cover
    _ndtri = None


def _normal_quantile(p: float) -> float:
    if _ndtri is not None:
        return float(_ndtri(p))
    # Acklam-style fallback would go here; scipy is a declared dependency
    raise RuntimeError("scipy required for normal quantiles")


@dataclass(frozen=True)
class CttConfig:
    """Knobs for the compress-then-test procedure."""

    alpha: float = 0.05
    g: int = 0
    s: int = 32
    B: int = 39
    delta: float = 0.5
    kernel: KernelSpec = None
    split_kernel: KernelSpec = None

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.s < 2:
            raise ValueError(f"need s >= 2 coresets, got {self.s}")
        if self.B < 1:
            raise ValueError(f"need B >= 1 replicates, got {self.B}")
        if self.split_kernel is None:
            object.__setattr__(self, "split_kernel", self.kernel)


@dataclass(frozen=True)
class LrCttConfig:
    """Low-rank variant: adds the feature map and the compression bin count."""

    feature_map: FeatureMap = None
    s_r: int = 0
    a: float | None = None  # halving parameter that produced s_r, informational
    alpha: float = 0.05
    g: int = 0
    s: int = 32
    B: int = 39
    delta: float = 0.5
    kernel: KernelSpec = None
    split_kernel: KernelSpec = None

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.s < 2 or self.s_r < 2:
            raise ValueError("need s >= 2 and s_r >= 2")
        if self.s_r % self.s != 0:
            raise GroupingError(f"s={self.s} must divide s_r={self.s_r}")
        if self.split_kernel is None:
            object.__setattr__(self, "split_kernel", self.kernel)


@dataclass(frozen=True)
class ActtConfig:
    """Aggregated variant over a collection of (kernel, split kernel, weight)."""

    kernels: tuple  # of (KernelSpec, KernelSpec, weight)
    alpha: float = 0.05
    g: int = 0
    s: int = 32
    delta: float = 0.5
    B1: int = 299
    B2: int = 200
    B3: int = 20

    def __post_init__(self):
        if not self.kernels:
            raise EmptyKernelList("aggregated test needs at least one kernel")
        weights = [w for _, _, w in self.kernels]
        if any(w < 0 for w in weights) or sum(weights) > 1.0 + 1e-12:
            raise ValueError("weights must be nonnegative and sum to at most 1")
        if min(self.B1, self.B2, self.B3) < 1:
            raise ValueError("B1, B2, B3 must all be >= 1")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class AggregatedReport:
    """Decision plus per-kernel diagnostics for the aggregated test."""

    reject: bool
    u: float
    statistics: tuple
    thresholds: tuple
    elapsed_ns: int


def _split_counts(m: int, n: int, s: int) -> tuple[int, int, int]:
    """Bin width and per-sample bin counts for an s-way equal binning."""
    total = m + n
    if total % s != 0:
        raise IndivisibleBinning(f"s={s} does not divide m+n={total}")
    width = total // s
    if m % width != 0 or n % width != 0:
        raise IndivisibleBinning(
            f"bin width {width} must divide both m={m} and n={n}")
    return width, m // width, n // width


def coreset_mmd(x: Sample, y: Sample, cfg: CttConfig, rng: RngStream
                ) -> tuple[float, list[Coreset], SufficientStats]:
    """Compress each sample binwise and estimate MMD from the coresets.

    Partitions x into s_m = s*m/(m+n) bins and y into s_n bins of the
    common width, compresses every bin at level g with the per-bin
    failure budget delta, and returns the root of the squared coreset
    MMD together with the coresets and their sufficient statistics.
    """
    if x.d != y.d:
        raise DimensionMismatch(f"d={x.d} vs d={y.d}")
    _, s_m, s_n = _split_counts(x.n, y.n, cfg.s)
    bins = bin_partition(x, s_m) + bin_partition(y, s_n)
    coresets = [
        kt_compress(b, cfg.g, cfg.kernel, cfg.split_kernel, cfg.delta, child_stream(rng, i))
        for i, b in enumerate(bins)
    ]
    stats = coreset_sufficient_stats(coresets, cfg.kernel, s_m)
    mmd_sqd = permuted_mmd2_from_stats(stats, np.arange(cfg.s))
    return math.sqrt(max(mmd_sqd, 0.0)), coresets, stats


def rank_among(observed: float, permuted, rng: RngStream) -> int:
    """Rank of observed among {permuted + observed}, ties randomized uniformly."""
    vals = np.asarray(permuted, dtype=np.float64)
    below = int((vals < observed).sum())
    ties = int((vals == observed).sum())
    if ties == 0:
        return below + 1
    return below + 1 + int(rng.generator().integers(0, ties + 1))


def _threshold_index(alpha: float, B: int) -> tuple[int, float]:
    b_alpha = math.ceil((1.0 - alpha) * (B + 1))
    p_alpha = b_alpha - (1.0 - alpha) * (B + 1)
    return b_alpha, p_alpha


def _rank_decision(observed: float, permuted: np.ndarray, alpha: float,
                   rng: RngStream) -> tuple[int, int, bool, float]:
    B = len(permuted)
    rank = rank_among(observed, permuted, child_stream(rng, 2))
    b_alpha, p_alpha = _threshold_index(alpha, B)
    if rank > b_alpha:
        reject = True
    elif rank == b_alpha and p_alpha > 0.0:
        reject = bool(child_stream(rng, 3).generator().random() < p_alpha)
    else:
        reject = False
    return rank, b_alpha, reject, p_alpha


def _report(observed, permuted, rank, b_alpha, reject, p_alpha, t0) -> TestReport:
    return TestReport(
        statistic=float(observed),
        permuted=tuple(float(v) for v in permuted),
        rank=rank,
        threshold_index=b_alpha,
        reject=reject,
        boundary_prob=p_alpha,
        elapsed_ns=time.perf_counter_ns() - t0,
    )


def ctt(x: Sample, y: Sample, cfg: CttConfig, rng: RngStream) -> TestReport:
    """Compress-then-test: coreset MMD calibrated by permuting coreset labels.

    The sufficient statistics from the single compression pass are reused
    for every replicate, so the B permutations cost O(s^2 B) arithmetic.
    """
    t0 = time.perf_counter_ns()
    stat, _, stats = coreset_mmd(x, y, cfg, child_stream(rng, 0))
    observed = stat * stat
    gen = child_stream(rng, 1).generator()
    sigmas = np.stack([gen.permutation(cfg.s) for _ in range(cfg.B)])
    permuted = permuted_mmd2_batch(stats, sigmas)
    rank, b_alpha, reject, p_alpha = _rank_decision(observed, permuted, cfg.alpha, rng)
    return _report(observed, permuted, rank, b_alpha, reject, p_alpha, t0)


def lr_ctt_bins(m: int, n: int, r: int, a: float, g: int) -> tuple[int, int]:
    """Compression bin counts for the low-rank test.

    The bin width is the largest 4^(g+t), t >= 1, that is at most 2r/a and
    divides both m and n; width 4^g itself would make compression a no-op,
    so it does not count as feasible.
    """
    if r < 1 or a <= 0:
        raise NoFeasibleBinning(f"need r >= 1 and a > 0, got r={r}, a={a}")
    target = 2.0 * r / a
    width = None
    candidate = 4 ** (g + 1)
    while candidate <= target:
        if m % candidate == 0 and n % candidate == 0:
            width = candidate
        candidate *= 4
    if width is None:
        raise NoFeasibleBinning(
            f"no bin width 4^(g+t) <= 2r/a={target:g} divides m={m} and n={n}")
    return m // width, n // width


def default_halving_param(r: int, g: int) -> float:
    """Default a = r / (4^g * 2^[r > 4^(g+1)])."""
    return r / (4 ** g * (2.0 if r > 4 ** (g + 1) else 1.0))


def lr_ctt(x: Sample, y: Sample, cfg: LrCttConfig, rng: RngStream) -> TestReport:
    """Low-rank compress-then-test over cached per-bin mean feature vectors.

    Compresses s_r fine bins, groups each run of s_r/s consecutive
    compressed bins into one permutation bin, and permutes the s bin
    labels of the cached feature means; each replicate costs O(s r).
    """
    if x.d != y.d:
        raise DimensionMismatch(f"d={x.d} vs d={y.d}")
    t0 = time.perf_counter_ns()
    _, s_mr, s_nr = _split_counts(x.n, y.n, cfg.s_r)
    group = cfg.s_r // cfg.s
    if s_mr % group != 0 or s_nr % group != 0:
        raise GroupingError(
            f"cannot group {s_mr}+{s_nr} compression bins into {cfg.s} permutation bins")
    s_m = s_mr // group
    s_n = s_nr // group

    bins = bin_partition(x, s_mr) + bin_partition(y, s_nr)
    comp_rng = child_stream(rng, 0)
    feats = []
    for i, b in enumerate(bins):
        core = kt_compress(b, cfg.g, cfg.kernel, cfg.split_kernel, cfg.delta,
                           child_stream(comp_rng, i))
        feats.append(feature_matrix(cfg.feature_map, core.points))
    # mean feature vector per permutation bin (equal coreset sizes within)
    mu = np.stack([
        np.vstack(feats[i * group:(i + 1) * group]).mean(axis=0)
        for i in range(cfg.s)
    ])

    def stat_for(order: np.ndarray) -> float:
        diff = mu[order[:s_m]].mean(axis=0) - mu[order[s_m:]].mean(axis=0)
        return float(diff @ diff)

    observed = stat_for(np.arange(cfg.s))
    gen = child_stream(rng, 1).generator()
    permuted = np.array([stat_for(gen.permutation(cfg.s)) for _ in range(cfg.B)])
    rank, b_alpha, reject, p_alpha = _rank_decision(observed, permuted, cfg.alpha, rng)
    return _report(observed, permuted, rank, b_alpha, reject, p_alpha, t0)


def actt(x: Sample, y: Sample, cfg: ActtConfig, rng: RngStream) -> AggregatedReport:
    """Aggregated test: one shared compression, per-kernel thresholds.

    Compresses once per bin under the combination kernels, computes one
    sufficient-statistic matrix per candidate kernel, and calibrates with
    a shared permutation stream: B1 replicates estimate each kernel's null
    quantile (observed value included in the batch) and B2 held-out
    replicates estimate the size of the aggregate, which a B3-step
    bisection pushes as close to alpha as the weights allow. Rejects when
    any observed statistic exceeds its final threshold.
    """
    t0 = time.perf_counter_ns()
    combined_k = SumKernel(tuple((k, 1.0) for k, _, _ in cfg.kernels))
    combined_split = SumKernel(tuple((ks, 1.0) for _, ks, _ in cfg.kernels))
    base = CttConfig(alpha=cfg.alpha, g=cfg.g, s=cfg.s, B=1, delta=cfg.delta,
                     kernel=combined_k, split_kernel=combined_split)
    if x.d != y.d:
        raise DimensionMismatch(f"d={x.d} vs d={y.d}")
    _, s_m, s_n = _split_counts(x.n, y.n, cfg.s)
    bins = bin_partition(x, s_m) + bin_partition(y, s_n)
    comp_rng = child_stream(rng, 0)
    coresets = [
        kt_compress(b, base.g, base.kernel, base.split_kernel, base.delta,
                    child_stream(comp_rng, i))
        for i, b in enumerate(bins)
    ]

    nker = len(cfg.kernels)
    weights = np.array([w for _, _, w in cfg.kernels])
    stats = [coreset_sufficient_stats(coresets, k, s_m) for k, _, _ in cfg.kernels]
    observed = np.array([permuted_mmd2_from_stats(st, np.arange(cfg.s)) for st in stats])

    gen = child_stream(rng, 1).generator()
    sigmas = np.stack([gen.permutation(cfg.s) for _ in range(cfg.B1 + cfg.B2)])
    values = np.stack([permuted_mmd2_batch(st, sigmas) for st in stats])  # (nker, B1+B2)
    batch1 = np.sort(np.concatenate([values[:, :cfg.B1], observed[:, None]], axis=1), axis=1)
    batch2 = values[:, cfg.B1:]

    def thresholds_at(u: float) -> np.ndarray:
        # per-kernel order statistic at level u * w * alpha within batch1
        idx = np.ceil((1.0 - u * weights * cfg.alpha) * (cfg.B1 + 1)).astype(int) - 1
        idx = np.clip(idx, 0, cfg.B1)
        return batch1[np.arange(nker), idx]

    u_lo, u_hi = 0.0, float(1.0 / weights.min())
    for _ in range(cfg.B3):
        u_mid = 0.5 * (u_lo + u_hi)
        thr = thresholds_at(u_mid)
        size = float((batch2 > thr[:, None]).any(axis=0).mean())
        if size <= cfg.alpha:
            u_lo = u_mid
        else:
            u_hi = u_mid
    thr = thresholds_at(u_lo)
    reject = bool((observed > thr).any())
    return AggregatedReport(
        reject=reject,
        u=u_lo,
        statistics=tuple(float(v) for v in observed),
        thresholds=tuple(float(v) for v in thr),
        elapsed_ns=time.perf_counter_ns() - t0,
    )


def permutation_test(statistic, x: Sample, y: Sample, B: int, alpha: float,
                     rng: RngStream) -> TestReport:
    """Exact-size permutation test for an arbitrary two-sample statistic.

    statistic is a callable (Sample, Sample) -> float; each replicate
    re-splits a uniform permutation of the pooled points.
    """
    if B < 1:
        raise ValueError(f"need B >= 1, got {B}")
    if x.d != y.d:
        raise DimensionMismatch(f"d={x.d} vs d={y.d}")
    t0 = time.perf_counter_ns()
    observed = float(statistic(x, y))
    pool = np.vstack([x.points, y.points])
    m = x.n
    gen = child_stream(rng, 1).generator()
    permuted = np.empty(B)
    for b in range(B):
        order = gen.permutation(pool.shape[0])
        permuted[b] = statistic(Sample(pool[order[:m]]), Sample(pool[order[m:]]))
    rank, b_alpha, reject, p_alpha = _rank_decision(observed, permuted, alpha, rng)
    return _report(observed, permuted, rank, b_alpha, reject, p_alpha, t0)


def _rademacher(gen: np.random.Generator, shape) -> np.ndarray:
    return gen.integers(0, 2, size=shape).astype(np.float64) * 2.0 - 1.0


def _tiled_h_apply(x: Sample, y: Sample, k: KernelSpec, eps: np.ndarray,
                   tile_rows: int = 0) -> tuple[np.ndarray, float]:
    """Quadratic forms eps_b' H eps_b and trace(H) without materializing H.

    H[i, j] = h(x_i, x_j, y_i, y_j); eps has shape (n, B). Since
    eps' K_xy eps = eps' K_yx eps, the pipeline builds K_xx + K_yy - 2 K_xy
    in row tiles with preallocated buffers, keeping memory at O(tile * n)
    and evaluating three gram blocks per tile instead of four.
    """
    from .kernels import kernel_from_sqdist

    n = x.n
    if tile_rows <= 0:
        tile_rows = int(max(16, min(n, 16_000_000 // max(n, 1))))
    acc = np.empty((n, eps.shape[1]))
    xp, yp = x.points, y.points
    xsq = np.einsum("ij,ij->i", xp, xp)
    ysq = np.einsum("ij,ij->i", yp, yp)

    first = max(0, min(tile_rows, n))
    h_tile = np.empty((first, n))
    d2 = np.empty((first, n))
    kbuf = np.empty((first, n))

    def add_block(a, asq, lo, hi, b, bsq, weight, out, accumulate):
        np.dot(a[lo:hi], b.T, out=d2[: hi - lo])
        view = d2[: hi - lo]
        view *= -2.0
        view += asq[lo:hi, None]
        view += bsq[None, :]
        np.maximum(view, 0.0, out=view)
        kview = kernel_from_sqdist(k, view, out=kbuf[: hi - lo])
        if accumulate:
            out[: hi - lo] += weight * kview
        else:
            np.multiply(kview, weight, out=out[: hi - lo])

    trace = float(
        n * 2.0 * _diag_value(k)
        - 2.0 * _paired_kernel_values(xp, yp, k).sum()
    )
    for lo in range(0, n, tile_rows):
        hi = min(lo + tile_rows, n)
        add_block(xp, xsq, lo, hi, xp, xsq, 1.0, h_tile, accumulate=False)
        add_block(yp, ysq, lo, hi, yp, ysq, 1.0, h_tile, accumulate=True)
        add_block(xp, xsq, lo, hi, yp, ysq, -2.0, h_tile, accumulate=True)
        np.dot(h_tile[: hi - lo], eps, out=acc[lo:hi])
    quad = np.einsum("nb,nb->b", eps, acc)
    return quad, trace


def _diag_value(k: KernelSpec) -> float:
    from .kernels import diag_value

    return diag_value(k)


def _paired_kernel_values(xp: np.ndarray, yp: np.ndarray, k: KernelSpec) -> np.ndarray:
    """k(x_i, y_i) for each row pair."""
    from .mmd import _kernel_rowwise

    diff = xp - yp
    return _kernel_rowwise(k, np.einsum("ij,ij->i", diff, diff))


def wild_bootstrap_test(kind: str, x: Sample, y: Sample, k: KernelSpec, B_reps: int,
                        alpha: float, rng: RngStream, block_size: int | None = None,
                        design: PairDesign | None = None) -> TestReport:
    """Wild bootstrap calibration by sign-flipping paired observations.

    kind is "complete", "block" (with block_size), or "incomplete" (with a
    pair design). Pairwise h values are computed once per pair in the
    kind's index set; each replicate multiplies h_ij by eps_i * eps_j,
    which matches physically swapping the pairs flagged by eps_i = -1.
    """
    if x.n != y.n:
        raise UnequalSizes(f"m={x.n} vs n={y.n}")
    if x.d != y.d:
        raise DimensionMismatch(f"d={x.d} vs d={y.d}")
    if B_reps < 1:
        raise ValueError(f"need B_reps >= 1, got {B_reps}")
    n = x.n
    t0 = time.perf_counter_ns()
    gen = child_stream(rng, 1).generator()
    eps = _rademacher(gen, (n, B_reps))
    # column 0 is the all-ones vector, i.e. the observed statistic
    cols = np.concatenate([np.ones((n, 1)), eps], axis=1)

    if kind == "complete":
        quad, trace = _tiled_h_apply(x, y, k, cols)
        vals = (quad - trace) / (n * (n - 1))
    elif kind == "block":
        if block_size is None or block_size < 2 or n % block_size != 0:
            raise IndivisibleBlocking(f"block size {block_size} incompatible with n={n}")
        h3, traces = _blockwise_h(x, y, k, block_size)
        nb = n // block_size
        e3 = cols.T.reshape(B_reps + 1, nb, block_size)
        quad = np.einsum("rcb,cbk,rck->rc", e3, h3, e3)
        etas = (quad - traces[None, :]) / (block_size * (block_size - 1))
        vals = etas.mean(axis=1)
    elif kind == "incomplete":
        if design is None:
            raise InvalidDesign("incomplete kind requires a pair design")
        from .mmd import h_design_values

        h = h_design_values(x, y, k, design)
        i0 = design.pairs[:, 0]
        j0 = design.pairs[:, 1]
        vals = (cols[i0] * cols[j0]).T @ h / design.ell
    else:
        raise ValueError(f"unknown wild bootstrap kind {kind!r}")

    observed, permuted = float(vals[0]), vals[1:]
    rank, b_alpha, reject, p_alpha = _rank_decision(observed, permuted, alpha, rng)
    return _report(observed, permuted, rank, b_alpha, reject, p_alpha, t0)


def _blockwise_h(x: Sample, y: Sample, k: KernelSpec, block_size: int
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Per-block h matrices, shape (n/B, B, B), plus their traces."""
    n = x.n
    nb = n // block_size
    h3 = np.empty((nb, block_size, block_size))
    for c in range(nb):
        lo, hi = c * block_size, (c + 1) * block_size
        kxy = gram(k, x.points[lo:hi], y.points[lo:hi])
        h3[c] = gram(k, x.points[lo:hi]) + gram(k, y.points[lo:hi]) - kxy - kxy.T
    traces = h3.trace(axis1=1, axis2=2)
    return h3, traces


def asymptotic_block_test(x: Sample, y: Sample, k: KernelSpec, block_size: int,
                          alpha: float, variant: str, rng: RngStream) -> TestReport:
    """Block test thresholded by the Gaussian limit of the block mean.

    Variant II estimates the variance from the observed block estimates;
    variant I estimates it from one Rademacher-flipped copy of them.
    """
    if x.n != y.n:
        raise UnequalSizes(f"m={x.n} vs n={y.n}")
    n = x.n
    if block_size < 2 or n % block_size != 0:
        raise IndivisibleBlocking(f"block size {block_size} incompatible with n={n}")
    if n // block_size < 2:
        raise IndivisibleBlocking("need at least 2 blocks to estimate the variance")
    if variant not in ("I", "II"):
        raise ValueError(f"variant must be 'I' or 'II', got {variant!r}")
    t0 = time.perf_counter_ns()
    h3, traces = _blockwise_h(x, y, k, block_size)
    nb = n // block_size
    denom = block_size * (block_size - 1)
    eta = (h3.sum(axis=(1, 2)) - traces) / denom
    statistic = float(eta.mean())
    if variant == "II":
        eta_for_var = eta
    else:
        eps = _rademacher(child_stream(rng, 0).generator(), n).reshape(nb, block_size)
        quad = np.einsum("cb,cbk,ck->c", eps, h3, eps)
        eta_for_var = (quad - traces) / denom
    var = float(eta_for_var.var(ddof=1))
    threshold = _normal_quantile(1.0 - alpha) * math.sqrt(max(var, 0.0) / nb)
    return TestReport(
        statistic=statistic,
        reject=bool(statistic > threshold),
        threshold=threshold,
        elapsed_ns=time.perf_counter_ns() - t0,
    )


def asymptotic_incomplete_test(x: Sample, y: Sample, k: KernelSpec,
                               design: PairDesign, alpha: float) -> TestReport:
    """Incomplete test thresholded by the Gaussian limit of the pair mean."""
    if x.n != y.n:
        raise UnequalSizes(f"m={x.n} vs n={y.n}")
    if design.ell < 2:
        raise ValueError("need at least 2 design pairs to estimate the variance")
    from .mmd import h_design_values

    t0 = time.perf_counter_ns()
    h = h_design_values(x, y, k, design)
    statistic = float(h.mean())
    sd = float(h.std(ddof=1))
    threshold = _normal_quantile(1.0 - alpha) * sd / math.sqrt(design.ell)
    return TestReport(
        statistic=statistic,
        reject=bool(statistic > threshold),
        threshold=threshold,
        elapsed_ns=time.perf_counter_ns() - t0,
    )


def rff_test(x: Sample, y: Sample, fmap: FeatureMap, B: int, alpha: float,
             rng: RngStream) -> TestReport:
    """Permutation test on the low-rank feature statistic with cached features."""
    if B < 1:
        raise ValueError(f"need B >= 1, got {B}")
    t0 = time.perf_counter_ns()
    feats = np.vstack([
        feature_matrix(fmap, x.points),
        feature_matrix(fmap, y.points),
    ])
    m, total = x.n, x.n + y.n
    n = total - m
    colsum = feats.sum(axis=0)

    def stat_rows(rows: np.ndarray) -> float:
        sx = feats[rows].sum(axis=0)
        diff = sx / m - (colsum - sx) / n
        return float(diff @ diff)

    observed = stat_rows(np.arange(m))
    gen = child_stream(rng, 1).generator()
    permuted = np.array([
        stat_rows(gen.permutation(total)[:m]) for _ in range(B)
    ])
    rank, b_alpha, reject, p_alpha = _rank_decision(observed, permuted, alpha, rng)
    return _report(observed, permuted, rank, b_alpha, reject, p_alpha, t0)
