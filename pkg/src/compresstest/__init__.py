"""Kernel two-sample testing with coreset compression.

Compress-then-test procedures (single-kernel, low-rank, and aggregated),
the kernel-thinning compression pipeline behind them, the standard
baseline MMD tests they are benchmarked against, and a seeded
replication harness.
"""

from .core import (
    Coreset,
    RngStream,
    Sample,
    TestReport,
    bin_partition,
    child_stream,
    load_sample,
)
from .kernels import (
    FeatureMap,
    Gaussian,
    KernelSpec,
    SumKernel,
    featurize,
    feature_matrix,
    gram,
    kernel_eval,
    median_heuristic,
    parse_kernel_spec,
    rff_draw,
    sqrt_kernel,
)
from .mmd import (
    PairDesign,
    SufficientStats,
    coreset_sufficient_stats,
    design_deterministic,
    design_uniform,
    h_stat,
    mmd2_biased,
    mmd2_block,
    mmd2_incomplete,
    mmd2_lowrank,
    mmd2_unbiased,
    mmd2_up,
    permuted_mmd2_batch,
    permuted_mmd2_from_stats,
)
from .thinning import (
    CompressConfig,
    SplitState,
    compress,
    get_swap_params,
    kt_compress,
    kt_halve,
    kt_split,
    kt_swap,
    opt_halve4,
)
from .testing import (
    ActtConfig,
    AggregatedReport,
    CttConfig,
    LrCttConfig,
    actt,
    asymptotic_block_test,
    asymptotic_incomplete_test,
    coreset_mmd,
    ctt,
    default_halving_param,
    lr_ctt,
    lr_ctt_bins,
    permutation_test,
    rank_among,
    rff_test,
    wild_bootstrap_test,
)
from .bench import (
    RejectionSummary,
    ScenarioSpec,
    gen_blobs,
    gen_gaussian_shift,
    run_replications,
    wilson_interval,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
