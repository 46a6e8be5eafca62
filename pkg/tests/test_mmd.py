import numpy as np
import pytest

from compresstest import (
    Gaussian,
    RngStream,
    Sample,
    coreset_sufficient_stats,
    design_deterministic,
    design_uniform,
    h_stat,
    kernel_eval,
    mmd2_biased,
    mmd2_block,
    mmd2_incomplete,
    mmd2_lowrank,
    mmd2_unbiased,
    mmd2_up,
    permuted_mmd2_from_stats,
    rff_draw,
)
from compresstest.core import Coreset
from compresstest.errors import (
    DesignTooLarge,
    IndivisibleBlocking,
    InvalidPermutation,
    SampleTooSmall,
    UnequalSizes,
)
from compresstest.kernels import FeatureMap
from compresstest.mmd import PairDesign

K = Gaussian(1.0)


def rnd_sample(gen, n, d=2):
    return Sample(gen.normal(size=(n, d)))


# ---------------------------------------------------------------- h statistic

def test_h_stat_cancellation_when_pairs_coincide():
    x, x2 = [0.1, 0.2], [1.0, -0.5]
    assert h_stat(K, x, x2, x, x2) == pytest.approx(0.0, abs=1e-15)


def test_h_stat_squared_distance_form():
    x, y = [0.0, 0.0], [1.5, 0.5]
    val = h_stat(K, x, x, y, y)
    expected = kernel_eval(K, x, x) + kernel_eval(K, y, y) - 2 * kernel_eval(K, x, y)
    assert val == pytest.approx(expected, abs=1e-15)
    assert val >= 0.0


def test_h_stat_matches_four_evals():
    gen = np.random.default_rng(0)
    for _ in range(10):
        x, x2, y, y2 = gen.normal(size=(4, 3))
        expected = (
            kernel_eval(K, x, x2) + kernel_eval(K, y, y2)
            - kernel_eval(K, x, y2) - kernel_eval(K, x2, y)
        )
        assert h_stat(K, x, x2, y, y2) == pytest.approx(expected, rel=1e-14)


# ---------------------------------------------------------------- mmd2_biased

def test_mmd2_biased_identical_samples():
    gen = np.random.default_rng(1)
    x = rnd_sample(gen, 6)
    assert mmd2_biased(x, Sample(x.points.copy()), K) == pytest.approx(0.0, abs=1e-14)


def test_mmd2_biased_singletons():
    x = Sample([[0.0, 0.0]])
    y = Sample([[1.0, 1.0]])
    expected = 2.0 - 2.0 * kernel_eval(K, [0.0, 0.0], [1.0, 1.0])
    assert mmd2_biased(x, y, K) == pytest.approx(expected, abs=1e-15)


def _mmd2_biased_oracle(x, y, k):
    m, n = x.n, y.n
    acc = 0.0
    for i in range(m):
        for j in range(m):
            acc += kernel_eval(k, x.points[i], x.points[j]) / m**2
    for i in range(n):
        for j in range(n):
            acc += kernel_eval(k, y.points[i], y.points[j]) / n**2
    for i in range(m):
        for j in range(n):
            acc -= 2.0 * kernel_eval(k, x.points[i], y.points[j]) / (m * n)
    return acc


def test_mmd2_biased_vs_bruteforce():
    gen = np.random.default_rng(2)
    x, y = rnd_sample(gen, 5), rnd_sample(gen, 5)
    assert mmd2_biased(x, y, K) == pytest.approx(_mmd2_biased_oracle(x, y, K), abs=1e-12)


def test_mmd2_biased_symmetric_in_arguments():
    gen = np.random.default_rng(3)
    x, y = rnd_sample(gen, 4), rnd_sample(gen, 7)
    assert mmd2_biased(x, y, K) == pytest.approx(mmd2_biased(y, x, K), abs=1e-14)


# -------------------------------------------------------------- mmd2_unbiased

def _mmd2_unbiased_oracle(x, y, k):
    m, n = x.n, y.n
    xx = sum(
        kernel_eval(k, x.points[i], x.points[j])
        for i in range(m) for j in range(m) if i != j
    ) / (m * (m - 1))
    yy = sum(
        kernel_eval(k, y.points[i], y.points[j])
        for i in range(n) for j in range(n) if i != j
    ) / (n * (n - 1))
    xy = sum(
        kernel_eval(k, x.points[i], y.points[j])
        for i in range(m) for j in range(n)
    ) / (m * n)
    return xx + yy - 2 * xy


def test_mmd2_unbiased_two_point_identical():
    x = Sample([[0.0, 0.0], [1.0, 0.0]])
    y = Sample(x.points.copy())
    assert mmd2_unbiased(x, y, K) == pytest.approx(_mmd2_unbiased_oracle(x, y, K), abs=1e-13)


def test_mmd2_unbiased_vs_bruteforce():
    gen = np.random.default_rng(4)
    x, y = rnd_sample(gen, 6), rnd_sample(gen, 4)
    assert mmd2_unbiased(x, y, K) == pytest.approx(_mmd2_unbiased_oracle(x, y, K), abs=1e-12)


def test_mmd2_unbiased_diagonal_identity():
    # unbiased = biased + diagonal corrections, checked numerically
    gen = np.random.default_rng(5)
    x, y = rnd_sample(gen, 5), rnd_sample(gen, 6)
    m, n = x.n, y.n
    kxx_diag = sum(kernel_eval(K, p, p) for p in x.points)
    kyy_diag = sum(kernel_eval(K, p, p) for p in y.points)
    xx_sum = sum(kernel_eval(K, a, b) for a in x.points for b in x.points)
    yy_sum = sum(kernel_eval(K, a, b) for a in y.points for b in y.points)
    expected = (
        mmd2_biased(x, y, K)
        - xx_sum / m**2 - yy_sum / n**2
        + (xx_sum - kxx_diag) / (m * (m - 1))
        + (yy_sum - kyy_diag) / (n * (n - 1))
    )
    assert mmd2_unbiased(x, y, K) == pytest.approx(expected, abs=1e-12)


def test_mmd2_unbiased_needs_two_points():
    x = Sample([[0.0]])
    with pytest.raises(SampleTooSmall):
        mmd2_unbiased(x, x, K)


# -------------------------------------------------------------------- mmd2_up

def _mmd2_up_oracle(x, y, k):
    n = x.n
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += h_stat(k, x.points[i], x.points[j], y.points[i], y.points[j])
    return acc / (n * (n - 1))


def test_mmd2_up_zero_when_paired_equal():
    gen = np.random.default_rng(6)
    x = rnd_sample(gen, 5)
    assert mmd2_up(x, Sample(x.points.copy()), K) == pytest.approx(0.0, abs=1e-14)


def test_mmd2_up_vs_bruteforce():
    gen = np.random.default_rng(7)
    x, y = rnd_sample(gen, 3), rnd_sample(gen, 3)
    assert mmd2_up(x, y, K) == pytest.approx(_mmd2_up_oracle(x, y, K), abs=1e-12)


def test_mmd2_up_sign_flip_identity():
    # physically swapping pair 0 multiplies each h term by eps_0 * eps_j
    gen = np.random.default_rng(8)
    x, y = rnd_sample(gen, 4), rnd_sample(gen, 4)
    n = x.n
    xs, ys = x.points.copy(), y.points.copy()
    xs[0], ys[0] = y.points[0], x.points[0]
    swapped = mmd2_up(Sample(xs), Sample(ys), K)
    eps = np.ones(n)
    eps[0] = -1.0
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += eps[i] * eps[j] * h_stat(
                    K, x.points[i], x.points[j], y.points[i], y.points[j])
    assert swapped == pytest.approx(acc / (n * (n - 1)), abs=1e-12)


def test_mmd2_up_requires_equal_sizes():
    gen = np.random.default_rng(9)
    with pytest.raises(UnequalSizes):
        mmd2_up(rnd_sample(gen, 3), rnd_sample(gen, 4), K)


# ----------------------------------------------------------------- mmd2_block

def test_mmd2_block_single_block_equals_up():
    gen = np.random.default_rng(10)
    x, y = rnd_sample(gen, 6), rnd_sample(gen, 6)
    stat, eta = mmd2_block(x, y, K, 6)
    assert stat == pytest.approx(mmd2_up(x, y, K), abs=1e-14)
    assert eta.shape == (1,)


def test_mmd2_block_vs_bruteforce():
    gen = np.random.default_rng(11)
    x, y = rnd_sample(gen, 4), rnd_sample(gen, 4)
    stat, eta = mmd2_block(x, y, K, 2)
    per_block = [
        _mmd2_up_oracle(Sample(x.points[0:2]), Sample(y.points[0:2]), K),
        _mmd2_up_oracle(Sample(x.points[2:4]), Sample(y.points[2:4]), K),
    ]
    assert np.allclose(eta, per_block, atol=1e-12)
    assert stat == pytest.approx(np.mean(per_block), abs=1e-12)


def test_mmd2_block_identical_points_zero():
    pts = np.tile([0.5, -0.5], (8, 1))
    stat, eta = mmd2_block(Sample(pts), Sample(pts.copy()), K, 2)
    assert stat == 0.0
    assert np.all(eta == 0.0)


def test_mmd2_block_eta_mean_is_statistic():
    gen = np.random.default_rng(12)
    x, y = rnd_sample(gen, 12), rnd_sample(gen, 12)
    stat, eta = mmd2_block(x, y, K, 3)
    assert stat == float(eta.mean())


def test_mmd2_block_errors():
    gen = np.random.default_rng(13)
    x, y = rnd_sample(gen, 6), rnd_sample(gen, 6)
    with pytest.raises(IndivisibleBlocking):
        mmd2_block(x, y, K, 4)


# ------------------------------------------------------------ incomplete mmd2

def test_design_deterministic_ring():
    d = design_deterministic(4, 4)
    assert d.pairs.tolist() == [[0, 1], [1, 2], [2, 3], [3, 0]]


def test_design_deterministic_complete():
    d = design_deterministic(3, 6)
    assert sorted(map(tuple, d.pairs.tolist())) == sorted(
        [(i, j) for i in range(3) for j in range(3) if i != j])


def test_design_too_large():
    with pytest.raises(DesignTooLarge):
        design_deterministic(4, 13)


def test_design_uniform_valid():
    d = design_uniform(10, 50, RngStream(4))
    assert d.ell == 50
    assert (d.pairs[:, 0] != d.pairs[:, 1]).all()
    assert d.pairs.min() >= 0 and d.pairs.max() < 10


def test_mmd2_incomplete_complete_design_equals_up():
    gen = np.random.default_rng(14)
    x, y = rnd_sample(gen, 5), rnd_sample(gen, 5)
    d = design_deterministic(5, 20)
    assert mmd2_incomplete(x, y, K, d) == pytest.approx(mmd2_up(x, y, K), abs=1e-13)


def test_mmd2_incomplete_single_pair():
    gen = np.random.default_rng(15)
    x, y = rnd_sample(gen, 3), rnd_sample(gen, 3)
    d = PairDesign(np.array([[0, 1]]), 3)
    expected = h_stat(K, x.points[0], x.points[1], y.points[0], y.points[1])
    assert mmd2_incomplete(x, y, K, d) == pytest.approx(expected, rel=1e-13)


def test_mmd2_incomplete_vs_bruteforce():
    gen = np.random.default_rng(16)
    x, y = rnd_sample(gen, 6), rnd_sample(gen, 6)
    d = design_uniform(6, 11, RngStream(5))
    expected = np.mean([
        h_stat(K, x.points[i], x.points[j], y.points[i], y.points[j])
        for i, j in d.pairs
    ])
    assert mmd2_incomplete(x, y, K, d) == pytest.approx(expected, abs=1e-12)


# ---------------------------------------------------------------- low-rank mmd

def test_mmd2_lowrank_identical_and_constant():
    gen = np.random.default_rng(17)
    x = rnd_sample(gen, 5)
    fmap = rff_draw(1.0, 8, 2, RngStream(6))
    assert mmd2_lowrank(x, Sample(x.points.copy()), fmap) == 0.0
    const = FeatureMap(np.zeros((3, 2)), np.zeros(3))
    y = rnd_sample(gen, 7)
    # means over 5 vs 7 copies of the same constant row differ by < 1 ulp
    assert mmd2_lowrank(x, y, const) == pytest.approx(0.0, abs=1e-30)


def test_mmd2_lowrank_nonnegative():
    gen = np.random.default_rng(18)
    fmap = rff_draw(0.5, 4, 2, RngStream(7))
    for _ in range(20):
        x, y = rnd_sample(gen, 3), rnd_sample(gen, 4)
        assert mmd2_lowrank(x, y, fmap) >= 0.0


def test_mmd2_lowrank_error_within_feature_error_bound():
    # |mmd2_lowrank - mmd2_biased| <= 4 xi^2 with xi from an exhaustive scan
    gen = np.random.default_rng(19)
    x, y = rnd_sample(gen, 12), rnd_sample(gen, 10)
    bw = 1.2
    fmap = rff_draw(bw, 64, 2, RngStream(8))
    pooled = np.vstack([x.points, y.points])
    k = Gaussian(bw)
    xi2 = 0.0
    from compresstest import featurize

    for i in range(pooled.shape[0]):
        fi = featurize(fmap, pooled[i])
        for j in range(pooled.shape[0]):
            fj = featurize(fmap, pooled[j])
            approx = float(fi @ fj)
            xi2 = max(xi2, abs(approx - kernel_eval(k, pooled[i], pooled[j])))
    err = abs(mmd2_lowrank(x, y, fmap) - mmd2_biased(x, y, k))
    assert err <= 4.0 * xi2 + 1e-12


# ------------------------------------------------------- sufficient statistics

def _singleton_coresets(sample):
    return [Coreset(sample, [i]) for i in range(sample.n)]


def test_sufficient_stats_singletons():
    gen = np.random.default_rng(20)
    s = rnd_sample(gen, 4)
    stats = coreset_sufficient_stats(_singleton_coresets(s), K, 2)
    for i in range(4):
        for j in range(4):
            assert stats.a[i, j] == pytest.approx(
                kernel_eval(K, s.points[i], s.points[j]), rel=1e-13)


def test_sufficient_stats_symmetry():
    gen = np.random.default_rng(21)
    s = rnd_sample(gen, 12)
    coresets = [Coreset(s, list(range(i * 3, (i + 1) * 3))) for i in range(4)]
    stats = coreset_sufficient_stats(coresets, K, 2)
    assert np.allclose(stats.a, stats.a.T, atol=0)


def test_sufficient_stats_vs_bruteforce():
    gen = np.random.default_rng(22)
    s = rnd_sample(gen, 8)
    coresets = [Coreset(s, [2 * i, 2 * i + 1]) for i in range(4)]
    stats = coreset_sufficient_stats(coresets, K, 2)
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for zi in coresets[i].points:
                for zj in coresets[j].points:
                    acc += kernel_eval(K, zi, zj)
            assert stats.a[i, j] == pytest.approx(acc / 4.0, abs=1e-12)


def test_sufficient_stats_pairwise_path_matches_oneshot():
    # force the blockwise path with unequal sizes
    gen = np.random.default_rng(23)
    s = rnd_sample(gen, 7)
    coresets = [Coreset(s, [0, 1]), Coreset(s, [2, 3, 4]), Coreset(s, [5, 6])]
    stats = coreset_sufficient_stats(coresets, K, 1)
    g = np.array([
        [np.mean([kernel_eval(K, a, b) for a in ci.points for b in cj.points])
         for cj in coresets] for ci in coresets
    ])
    assert np.allclose(stats.a, g, atol=1e-12)


# --------------------------------------------------- permuted stats re-use

def _concat_mmd2(coresets, sigma, s_m, k):
    xs = np.vstack([coresets[sigma[i]].points for i in range(s_m)])
    ys = np.vstack([coresets[sigma[i]].points for i in range(s_m, len(coresets))])
    return mmd2_biased(Sample(xs), Sample(ys), k)


def test_permuted_stats_identity_matches_concat():
    gen = np.random.default_rng(24)
    s = rnd_sample(gen, 16)
    coresets = [Coreset(s, list(range(4 * i, 4 * i + 4))) for i in range(4)]
    stats = coreset_sufficient_stats(coresets, K, 2)
    val = permuted_mmd2_from_stats(stats, np.arange(4))
    assert val == pytest.approx(_concat_mmd2(coresets, np.arange(4), 2, K), abs=1e-10)


def test_permuted_stats_block_exchange_invariance():
    gen = np.random.default_rng(25)
    s = rnd_sample(gen, 12)
    coresets = [Coreset(s, list(range(3 * i, 3 * i + 3))) for i in range(4)]
    stats = coreset_sufficient_stats(coresets, K, 2)
    ident = permuted_mmd2_from_stats(stats, [0, 1, 2, 3])
    swapped = permuted_mmd2_from_stats(stats, [2, 3, 0, 1])
    assert swapped == pytest.approx(ident, abs=1e-14)


def test_permuted_stats_random_vs_raw_recompute():
    gen = np.random.default_rng(26)
    s = rnd_sample(gen, 24)
    coresets = [Coreset(s, list(range(4 * i, 4 * i + 4))) for i in range(6)]
    stats = coreset_sufficient_stats(coresets, K, 2)
    for trial in range(100):
        sigma = np.random.default_rng(trial).permutation(6)
        fast = permuted_mmd2_from_stats(stats, sigma)
        slow = _concat_mmd2(coresets, sigma, 2, K)
        assert fast == pytest.approx(slow, abs=1e-10)


def test_permuted_stats_rejects_bad_permutation():
    gen = np.random.default_rng(27)
    s = rnd_sample(gen, 8)
    coresets = [Coreset(s, [2 * i, 2 * i + 1]) for i in range(4)]
    stats = coreset_sufficient_stats(coresets, K, 2)
    with pytest.raises(InvalidPermutation):
        permuted_mmd2_from_stats(stats, [0, 1, 2, 2])
