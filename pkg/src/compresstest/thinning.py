"""The compression pipeline: kt-split, kt-swap, halving, and recursive compression.

RNG threading: every operation takes an RngStream and consumes it in a
fixed documented order, so results are bit-reproducible and recursion
children can run independently. A compression node uses child streams
0..3 for its four recursive children and child 4 for the halving step;
halving uses child 0 for kt-split pair coins and child 1 for the
symmetrization coin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Coreset, RngStream, Sample, child_stream
from .errors import IncompatibleSize, InvalidDelta, OddInput, WrongArity
from .kernels import KernelSpec, gram


@dataclass
class SplitState:
    """Running sub-Gaussian scale threaded through kt-split rounds."""

    sigma: float = 0.0


@dataclass(frozen=True)
class CompressConfig:
    """Compression knobs shared by the CLI and test procedures."""

    g: int
    delta: float
    kernel: KernelSpec
    split_kernel: KernelSpec

    def __post_init__(self):
        if self.g < 0:
            raise ValueError(f"compression level must be >= 0, got {self.g}")
        if not (0.0 < self.delta < 1.0):
            raise InvalidDelta(f"delta must lie in (0, 1), got {self.delta}")


def get_swap_params(sigma: float, vmax: float, delta: float) -> tuple[float, float]:
    """Swap threshold and updated sub-Gaussian scale for one kt-split round.

    delta is clamped into (0, 1]; vmax == 0 (an identical pair) leaves the
    state untouched and returns a zero threshold.
    """
    if vmax <= 0.0:
        return 0.0, sigma
    delta = min(max(delta, 1e-300), 1.0)
    thresh = max(vmax * sigma * math.sqrt(2.0 * math.log(2.0 / delta)), vmax * vmax)
    sig_sqd = sigma * sigma
    growth = 1.0 + (vmax * vmax - 2.0 * thresh) * sig_sqd / (thresh * thresh)
    new_sig_sqd = sig_sqd + vmax * vmax * max(growth, 0.0)
    return thresh, math.sqrt(new_sig_sqd)


def _kt_split_core(ksplit_gram: np.ndarray, delta: float, uniforms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """kt-split over a precomputed gram matrix; returns two local index arrays."""
    n = ksplit_gram.shape[0]
    half = n // 2
    c1 = np.empty(half, dtype=np.int64)
    c2 = np.empty(half, dtype=np.int64)
    state = SplitState()
    for t in range(half):
        ia, ib = 2 * t, 2 * t + 1
        vmax_sqd = ksplit_gram[ia, ia] + ksplit_gram[ib, ib] - 2.0 * ksplit_gram[ia, ib]
        vmax = math.sqrt(max(vmax_sqd, 0.0))
        thresh, state.sigma = get_swap_params(state.sigma, vmax, delta / n)
        diffs = ksplit_gram[:ia, ia] - ksplit_gram[:ia, ib]
        theta = diffs.sum() - 2.0 * diffs[c1[:t]].sum()
        if thresh > 0.0:
            prob = min(1.0, 0.5 * max(1.0 - theta / thresh, 0.0))
        else:
            # vmax == 0: the pair is indistinguishable under the kernel
            prob = 0.5 if theta == 0.0 else (1.0 if theta < 0.0 else 0.0)
        if uniforms[t] < prob:
            ia, ib = ib, ia
        c1[t] = ia
        c2[t] = ib
    return c1, c2


def kt_split(ksplit: KernelSpec, s: Sample, delta: float, rng: RngStream) -> tuple[Coreset, Coreset]:
    """Divide a point sequence into two candidate coresets of size floor(n/2).

    Points are consumed in consecutive pairs; each pair contributes one
    point to each coreset, swapped with the probability dictated by the
    running discrepancy. An odd trailing point is dropped.
    """
    if s.n < 2:
        raise OddInput(f"need at least 2 points, got {s.n}")
    half = s.n // 2
    k_gram = gram(ksplit, s.points[:2 * half])
    uniforms = rng.generator().random(half)
    c1, c2 = _kt_split_core(k_gram, delta, uniforms)
    return Coreset(s, c1), Coreset(s, c2)


def _swap_objective(k_gram: np.ndarray, rowsums: np.ndarray, idx: np.ndarray) -> float:
    """MMD^2(input, coreset) minus the coreset-independent constant."""
    c = idx.size
    n = k_gram.shape[0]
    return k_gram[np.ix_(idx, idx)].sum() / c**2 - 2.0 * rowsums[idx].sum() / (n * c)


def _kt_swap_core(k_gram: np.ndarray, candidates: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    n = k_gram.shape[0]
    half = candidates[0].size
    baseline = np.arange(0, 2 * half, 2, dtype=np.int64)
    rowsums = k_gram.sum(axis=1)
    options = [baseline, np.asarray(candidates[0]), np.asarray(candidates[1])]
    objectives = [_swap_objective(k_gram, rowsums, c) for c in options]
    coreset = options[int(np.argmin(objectives))].copy()

    diag = np.diag(k_gram)
    in_core = np.zeros(n, dtype=bool)
    in_core[coreset] = True
    # f[w] = sum of k(w, z) over current coreset points z
    f = k_gram[:, coreset].sum(axis=1)
    c = coreset.size
    for slot in range(c):
        u = coreset[slot]
        cand = np.concatenate(([u], np.flatnonzero(~in_core)))
        crit = (2.0 * (f[cand] - k_gram[cand, u]) + diag[cand]) / c**2 \
            - 2.0 * rowsums[cand] / (n * c)
        z = int(cand[int(np.argmin(crit))])
        if z != u:
            coreset[slot] = z
            in_core[u] = False
            in_core[z] = True
            f += k_gram[:, z] - k_gram[:, u]
    return coreset


def kt_swap(k: KernelSpec, s: Sample, candidates: tuple[Coreset, Coreset]) -> Coreset:
    """Select the best of {standard thinning, both candidates} and refine it.

    One sweep replaces each coreset slot by whichever of the current point
    and the non-coreset points most reduces MMD to the input, so the
    returned coreset is never worse than any of the three candidates.
    """
    k_gram = gram(k, s.points)
    local = _kt_swap_core(k_gram, (candidates[0].indices, candidates[1].indices))
    return Coreset(s, local)


def _opt_halve4_core(k_gram: np.ndarray, uniform: float) -> np.ndarray:
    """Optimal four-point halving over a 4 x 4 gram matrix (0-based indices)."""
    k12_plus_k43 = k_gram[0, 1] + k_gram[3, 2]
    k41_plus_k23 = k_gram[3, 0] + k_gram[1, 2]
    k42_plus_k13 = k_gram[3, 1] + k_gram[0, 2]
    if k12_plus_k43 < k41_plus_k23:
        if k12_plus_k43 < k42_plus_k13:
            pick, other = (2, 3), (0, 1)
        else:
            pick, other = (1, 3), (0, 2)
    elif k41_plus_k23 < k42_plus_k13:
        pick, other = (0, 3), (1, 2)
    else:
        pick, other = (1, 3), (0, 2)
    return np.array(pick if uniform < 0.5 else other, dtype=np.int64)


def opt_halve4(k: KernelSpec, s: Sample, rng: RngStream) -> Coreset:
    """Best two-point coreset of a four-point input, or its complement.

    Picks the pairing minimizing MMD between the input and either half
    (strict-inequality branching resolves ties toward the later branch),
    then returns one half of that pairing with probability 1/2 each.
    """
    if s.n != 4:
        raise WrongArity(f"opt_halve4 needs exactly 4 points, got {s.n}")
    uniform = rng.generator().random()
    return Coreset(s, _opt_halve4_core(gram(k, s.points), uniform))


def _halve_idx(points: np.ndarray, idx: np.ndarray, k: KernelSpec, ksplit: KernelSpec,
               delta: float, rng: RngStream) -> np.ndarray:
    """Symmetrized halving of the subsequence points[idx]; returns global indices."""
    sub = points[idx]
    delta = min(delta, 1.0)
    split_gram = gram(ksplit, sub)
    swap_gram = split_gram if ksplit == k else gram(k, sub)
    half = idx.size // 2
    uniforms = child_stream(rng, 0).generator().random(half)
    c1, c2 = _kt_split_core(split_gram, delta, uniforms)
    kept = _kt_swap_core(swap_gram, (c1, c2))
    coin = child_stream(rng, 1).generator().random()
    if coin < 0.5:
        mask = np.zeros(idx.size, dtype=bool)
        mask[kept] = True
        kept = np.flatnonzero(~mask)
    return idx[kept]


def kt_halve(k: KernelSpec, ksplit: KernelSpec, s: Sample, delta: float, rng: RngStream) -> Coreset:
    """kt-split + kt-swap, returning the result or its complement equiprobably."""
    if s.n < 2 or s.n % 2 != 0:
        raise OddInput(f"halving needs an even input size >= 2, got {s.n}")
    idx = _halve_idx(s.points, np.arange(s.n, dtype=np.int64), k, ksplit, delta, rng)
    return Coreset(s, idx)


def _compress_rec(points: np.ndarray, idx: np.ndarray, g: int, k: KernelSpec,
                  ksplit: KernelSpec, delta: float, rng: RngStream) -> np.ndarray:
    n = idx.size
    if n == 4 ** g:
        return idx
    if g == 0 and n == 4:
        uniform = child_stream(rng, 4).generator().random()
        local = _opt_halve4_core(gram(k, points[idx]), uniform)
        return idx[local]
    quarter = n // 4
    parts = []
    for i in range(4):
        sub = idx[i * quarter:(i + 1) * quarter]
        parts.append(_compress_rec(points, sub, g, k, ksplit, delta, child_stream(rng, i)))
    cat = np.concatenate(parts)
    amplified = cat.size ** 2 * delta
    return _halve_idx(points, cat, k, ksplit, amplified, child_stream(rng, 4))


def _check_size(n: int, g: int) -> None:
    if n < 4 ** g:
        raise IncompatibleSize(f"n={n} smaller than 4^g={4 ** g}")
    ratio = n // 4 ** g
    if n != ratio * 4 ** g or (ratio & (ratio - 1)) != 0 or ratio.bit_length() % 2 == 0:
        # ratio must itself be a power of four: 1, 4, 16, ...
        raise IncompatibleSize(f"n={n} is not 4^(g+t) for g={g}")


def compress(s: Sample, g: int, k: KernelSpec, ksplit: KernelSpec,
             delta: float, rng: RngStream) -> Coreset:
    """Recursive compression to a coreset of size 2^g * sqrt(n).

    Splits the input into four consecutive subsequences, compresses each
    recursively, then halves the concatenation; a size-4 input at g = 0 is
    halved by the optimal four-point rule instead. The per-call failure
    budget is amplified by the concatenation size squared before halving
    (and clamped to 1 where the bound becomes vacuous).
    """
    if g < 0:
        raise ValueError(f"compression level must be >= 0, got {g}")
    _check_size(s.n, g)
    idx = _compress_rec(s.points, np.arange(s.n, dtype=np.int64), g, k, ksplit, delta, rng)
    return Coreset(s, idx)


def kt_compress(s: Sample, g: int, k: KernelSpec, ksplit: KernelSpec,
                delta: float, rng: RngStream) -> Coreset:
    """Compression entry point with the per-call failure-probability schedule.

    Divides delta by n * 4^(g+1) * (log4(n) - g) across the recursion's
    halving calls; runtime is dominated by O(4^g n (log4 n - g)) kernel
    evaluations.
    """
    if not (0.0 < delta < 1.0):
        raise InvalidDelta(f"delta must lie in (0, 1), got {delta}")
    if g < 0:
        raise ValueError(f"compression level must be >= 0, got {g}")
    _check_size(s.n, g)
    if s.n == 4 ** g:
        return Coreset(s, np.arange(s.n, dtype=np.int64))
    rounds = round(math.log(s.n, 4)) - g
    budget = delta / (s.n * 4 ** (g + 1) * rounds)
    return compress(s, g, k, ksplit, budget, rng)
