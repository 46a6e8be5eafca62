"""MMD estimators, pair designs, and the coreset sufficient-statistic machinery.

Squared-MMD definitions below are the semantic contract; gram evaluation
is tiled where full matrices would not fit, without changing the values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Coreset, RngStream, Sample
from .errors import (
    DesignTooLarge,
    DimensionMismatch,
    EmptyCoreset,
    InvalidDesign,
    InvalidPermutation,
    IndivisibleBlocking,
    SampleTooSmall,
    UnequalSizes,
)
from .kernels import FeatureMap, KernelSpec, feature_matrix, gram, kernel_eval


@dataclass(frozen=True)
class PairDesign:
    """Ordered index pairs (i, j), i != j, into a length-n paired sample."""

    pairs: np.ndarray  # (ell, 2) int64
    n: int

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if p.shape[0] < 1:
            raise InvalidDesign("design needs at least one pair")
        if p.min() < 0 or p.max() >= self.n:
            raise InvalidDesign("design index out of range")
        if (p[:, 0] == p[:, 1]).any():
            raise InvalidDesign("design pairs must have i != j")
        p = p.view()
        p.flags.writeable = False
        object.__setattr__(self, "pairs", p)

    @property
    def ell(self) -> int:
        return self.pairs.shape[0]


@dataclass(frozen=True)
class SufficientStats:
    """s x s matrix of mean cross-kernel values between coresets.

    a[i][j] is the mean of k(z, z') over z in coreset i, z' in coreset j;
    the first s_m coresets come from the X sample, the rest from Y.
    """

    a: np.ndarray
    sizes: np.ndarray
    s_m: int

    @property
    def s(self) -> int:
        return self.a.shape[0]

    @property
    def s_n(self) -> int:
        return self.s - self.s_m


def _check_same_dim(x: Sample, y: Sample) -> None:
    if x.d != y.d:
        raise DimensionMismatch(f"d={x.d} vs d={y.d}")


def h_stat(k: KernelSpec, x, x2, y, y2) -> float:
    """k(x,x') + k(y,y') - k(x,y') - k(x',y)."""
    return (
        kernel_eval(k, x, x2)
        + kernel_eval(k, y, y2)
        - kernel_eval(k, x, y2)
        - kernel_eval(k, x2, y)
    )


def mmd2_biased(x: Sample, y: Sample, k: KernelSpec) -> float:
    """Squared sample MMD with within-sample diagonal terms included."""
    _check_same_dim(x, y)
    kxx = gram(k, x.points).mean()
    kyy = gram(k, y.points).mean()
    kxy = gram(k, x.points, y.points).mean()
    return float(kxx + kyy - 2.0 * kxy)


def mmd2_unbiased(x: Sample, y: Sample, k: KernelSpec) -> float:
    """Unbiased squared-MMD estimate; may be negative."""
    _check_same_dim(x, y)
    m, n = x.n, y.n
    if m < 2 or n < 2:
        raise SampleTooSmall(f"need m, n >= 2, got m={m}, n={n}")
    kxx = gram(k, x.points)
    kyy = gram(k, y.points)
    kxy = gram(k, x.points, y.points)
    xx = (kxx.sum() - np.trace(kxx)) / (m * (m - 1))
    yy = (kyy.sum() - np.trace(kyy)) / (n * (n - 1))
    return float(xx + yy - 2.0 * kxy.mean())


def _h_matrix(x: Sample, y: Sample, k: KernelSpec) -> np.ndarray:
    """H[i, j] = h(x_i, x_j, y_i, y_j) for paired samples of equal size."""
    kxy = gram(k, x.points, y.points)
    return gram(k, x.points) + gram(k, y.points) - kxy - kxy.T


def mmd2_up(x: Sample, y: Sample, k: KernelSpec) -> float:
    """Unbiased paired estimate omitting diagonal cross-terms (m = n)."""
    _check_same_dim(x, y)
    if x.n != y.n:
        raise UnequalSizes(f"m={x.n} vs n={y.n}")
    n = x.n
    if n < 2:
        raise SampleTooSmall("need n >= 2")
    h = _h_matrix(x, y, k)
    return float((h.sum() - np.trace(h)) / (n * (n - 1)))


def mmd2_block(x: Sample, y: Sample, k: KernelSpec, block_size: int) -> tuple[float, np.ndarray]:
    """Mean of per-block paired estimates over contiguous blocks.

    Returns (statistic, eta) where eta holds the n/block_size per-block
    values; their mean is the statistic exactly.
    """
    _check_same_dim(x, y)
    if x.n != y.n:
        raise UnequalSizes(f"m={x.n} vs n={y.n}")
    n = x.n
    if block_size < 2:
        raise IndivisibleBlocking(f"block size must be >= 2, got {block_size}")
    if n % block_size != 0:
        raise IndivisibleBlocking(f"block size {block_size} does not divide n={n}")
    nb = n // block_size
    eta = np.empty(nb)
    for c in range(nb):
        lo, hi = c * block_size, (c + 1) * block_size
        xb = Sample(x.points[lo:hi])
        yb = Sample(y.points[lo:hi])
        eta[c] = mmd2_up(xb, yb, k)
    return float(eta.mean()), eta


def mmd2_incomplete(x: Sample, y: Sample, k: KernelSpec, design: PairDesign) -> float:
    """Mean of h over the design's ordered index pairs."""
    _check_same_dim(x, y)
    if x.n != y.n:
        raise UnequalSizes(f"m={x.n} vs n={y.n}")
    if design.n != x.n:
        raise InvalidDesign(f"design built for n={design.n}, samples have n={x.n}")
    return float(h_design_values(x, y, k, design).mean())


def h_design_values(x: Sample, y: Sample, k: KernelSpec, design: PairDesign) -> np.ndarray:
    """h(x_i, x_j, y_i, y_j) for each (i, j) in the design."""
    i = design.pairs[:, 0]
    j = design.pairs[:, 1]
    xp, yp = x.points, y.points

    def kvec(a, b):
        d2 = np.einsum("ij,ij->i", a - b, a - b)
        return _kernel_rowwise(k, d2)

    kxx = kvec(xp[i], xp[j])
    kyy = kvec(yp[i], yp[j])
    kxy = kvec(xp[i], yp[j])
    kyx = kvec(xp[j], yp[i])
    return kxx + kyy - kxy - kyx


def _kernel_rowwise(k: KernelSpec, sqdists: np.ndarray) -> np.ndarray:
    """Kernel values from precomputed squared distances (translation-invariant)."""
    from .kernels import Gaussian, SumKernel

    if isinstance(k, Gaussian):
        return np.exp(sqdists / (-2.0 * k.bandwidth ** 2))
    if isinstance(k, SumKernel):
        out = np.zeros_like(sqdists)
        for sub, scale in k.terms:
            if scale != 0.0:
                out += scale * _kernel_rowwise(sub, sqdists)
        return out
    raise InvalidDesign(f"unsupported kernel {k!r}")


def design_deterministic(n: int, ell: int) -> PairDesign:
    """Ring design: pairs (i, (i+k) mod n) for k = 1, 2, ... until ell pairs."""
    if ell < 1:
        raise InvalidDesign("need ell >= 1")
    if ell > n * (n - 1):
        raise DesignTooLarge(f"ell={ell} exceeds n(n-1)={n * (n - 1)}")
    pairs = np.empty((ell, 2), dtype=np.int64)
    written = 0
    offset = 1
    base = np.arange(n, dtype=np.int64)
    while written < ell:
        take = min(n, ell - written)
        pairs[written:written + take, 0] = base[:take]
        pairs[written:written + take, 1] = (base[:take] + offset) % n
        written += take
        offset += 1
    return PairDesign(pairs, n)


def design_uniform(n: int, ell: int, rng: RngStream) -> PairDesign:
    """ell ordered pairs sampled uniformly with replacement from {(i,j): i != j}."""
    if ell < 1:
        raise InvalidDesign("need ell >= 1")
    gen = rng.generator()
    i = gen.integers(0, n, size=ell)
    # draw j != i by sampling an offset in [1, n)
    j = (i + gen.integers(1, n, size=ell)) % n
    return PairDesign(np.stack([i, j], axis=1), n)


def mmd2_lowrank(x: Sample, y: Sample, fmap: FeatureMap) -> float:
    """Squared norm of the feature-mean difference; exactly nonnegative."""
    fx = feature_matrix(fmap, x.points).mean(axis=0)
    fy = feature_matrix(fmap, y.points).mean(axis=0)
    diff = fx - fy
    return float(diff @ diff)


def coreset_sufficient_stats(coresets: list[Coreset], k: KernelSpec, s_m: int) -> SufficientStats:
    """Mean cross-kernel values between every pair of coresets."""
    s = len(coresets)
    if s < 2 or not (1 <= s_m < s):
        raise EmptyCoreset(f"need s >= 2 coresets with 1 <= s_m < s, got s={s}, s_m={s_m}")
    sizes = np.array([len(c) for c in coresets], dtype=np.int64)
    if (sizes == 0).any():
        raise EmptyCoreset("every coreset must hold at least one point")
    points = [c.points for c in coresets]
    a = np.empty((s, s))
    if sizes.min() == sizes.max() and sizes[0] * s <= 4096:
        # small enough to evaluate in one shot and reduce blockwise
        z = np.vstack(points)
        c = int(sizes[0])
        g = gram(k, z)
        a = g.reshape(s, c, s, c).mean(axis=(1, 3))
    else:
        for i in range(s):
            for j in range(i, s):
                a[i, j] = a[j, i] = gram(k, points[i], points[j]).mean()
    return SufficientStats(a=a, sizes=sizes, s_m=s_m)


def _check_permutation(sigma: np.ndarray, s: int) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.shape != (s,) or not np.array_equal(np.sort(sigma), np.arange(s)):
        raise InvalidPermutation(f"not a permutation of range({s}): {sigma!r}")
    return sigma


def permuted_mmd2_from_stats(stats: SufficientStats, sigma) -> float:
    """Squared MMD of the coreset concatenations after permuting coreset labels.

    Valid when all coresets have equal size (the compression pipeline
    guarantees this); uses the general 1/s_m^2, 1/s_n^2, 2/(s_m s_n)
    weights so unequal sample splits s_m != s_n are handled exactly.
    """
    sigma = _check_permutation(sigma, stats.s)
    if stats.sizes.min() != stats.sizes.max():
        raise InvalidPermutation("label permutation requires equal-sized coresets")
    return float(permuted_mmd2_batch(stats, sigma[None, :])[0])


def permuted_mmd2_batch(stats: SufficientStats, sigmas: np.ndarray) -> np.ndarray:
    """permuted_mmd2_from_stats for a (B, s) batch of permutations."""
    a = stats.a
    s_m, s_n = stats.s_m, stats.s_n
    gx = sigmas[:, :s_m]
    gy = sigmas[:, s_m:]
    xx = a[gx[:, :, None], gx[:, None, :]].sum(axis=(1, 2))
    yy = a[gy[:, :, None], gy[:, None, :]].sum(axis=(1, 2))
    xy = a[gx[:, :, None], gy[:, None, :]].sum(axis=(1, 2))
    return xx / s_m**2 + yy / s_n**2 - 2.0 * xy / (s_m * s_n)
