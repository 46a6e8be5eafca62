"""Command-line front door: single tests, benchmark sweeps, compression, bandwidths.

Output is machine-first: one `# config:` comment echoing the resolved
configuration, then key=value records or CSV files. Exit codes: 0 on
success (a test decision is data, not an exit code), 2 on usage errors,
1 on runtime errors.
"""

from __future__ import annotations

import argparse
import itertools
import sys

import numpy as np

from . import bench as bench_mod
from .core import RngStream, Sample, child_stream, load_sample, save_points
from .errors import CompressTestError
from .kernels import Gaussian, median_heuristic, parse_kernel_spec, rff_draw, sqrt_kernel
from .mmd import design_deterministic, design_uniform
from .testing import (
    ActtConfig,
    CttConfig,
    LrCttConfig,
    actt,
    asymptotic_block_test,
    asymptotic_incomplete_test,
    ctt,
    default_halving_param,
    lr_ctt,
    lr_ctt_bins,
    rff_test,
    wild_bootstrap_test,
)
from .thinning import CompressConfig, kt_compress

TEST_NAMES = (
    "ctt", "lrctt", "actt", "wblock", "wincomplete",
    "ablock1", "ablock2", "aincomplete", "rff", "quadratic",
)

# which sweepable parameters each test actually consumes
_RELEVANT = {
    "ctt": {"g", "s", "B"},
    "lrctt": {"g", "s", "B", "r"},
    "actt": {"g", "s"},
    "wblock": {"block_size", "B"},
    "wincomplete": {"ell", "B"},
    "ablock1": {"block_size"},
    "ablock2": {"block_size"},
    "aincomplete": {"ell"},
    "rff": {"r", "B"},
    "quadratic": {"B"},
}


class UsageError(Exception):
    pass


def _add_common_test_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--g", default="0", help="compression level (comma list in bench)")
    p.add_argument("--s", type=int, default=32, help="coreset / permutation bin count")
    p.add_argument("--B", default="39", help="replicate count (comma list in bench)")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--bandwidth", default="gauss-med",
                   help="kernel spec: gauss:<lambda> | gauss-med | sum:<spec>,...")
    p.add_argument("--split", choices=("target", "sqrt"), default="target",
                   help="compression kernel: the target kernel or its square root")
    p.add_argument("--r", default="256", help="feature rank for rff / lrctt")
    p.add_argument("--a", type=float, default=None,
                   help="lrctt halving parameter (default r / (4^g 2^[r>4^(g+1)]))")
    p.add_argument("--block-size", default="32", dest="block_size")
    p.add_argument("--ell", default="", help="incomplete-design pair count (default 4n)")
    p.add_argument("--design", choices=("ring", "uniform"), default=None,
                   help="incomplete pair design (default: ring for wincomplete, "
                        "uniform for aincomplete)")
    p.add_argument("--B1", type=int, default=299)
    p.add_argument("--B2", type=int, default=200)
    p.add_argument("--B3", type=int, default=20)
    p.add_argument("--lambda-count", type=int, default=5, dest="lambda_count",
                   help="actt bandwidth count: 2^-i * lambda0, i = 0..count-1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="key = value defaults file")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="compresstest")
    sub = p.add_subparsers(dest="verb", required=True)

    t = sub.add_parser("test", help="run one two-sample test on CSV data")
    t.add_argument("--test", required=True, choices=TEST_NAMES)
    t.add_argument("--x", required=True)
    t.add_argument("--y", required=True)
    t.add_argument("--header", action="store_true", help="skip one CSV header row")
    _add_common_test_flags(t)

    b = sub.add_parser("bench", help="replicate tests on synthetic data, emit CSV")
    b.add_argument("--scenario", required=True,
                   help="gauss:d=<d>,shift=<s> | blobs:epsilon=<e>")
    b.add_argument("--test", required=True, help="comma list of test names")
    b.add_argument("--n", required=True, help="comma list of per-sample sizes")
    b.add_argument("--reps", type=int, default=400)
    b.add_argument("--out", required=True)
    b.add_argument("--append", action="store_true")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--confidence", type=float, default=0.95)
    _add_common_test_flags(b)

    c = sub.add_parser("compress", help="compress a CSV dataset to a coreset")
    c.add_argument("--input", required=True)
    c.add_argument("--g", type=int, required=True)
    c.add_argument("--kernel", required=True)
    c.add_argument("--delta", type=float, default=0.5)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--output", required=True)
    c.add_argument("--split", choices=("target", "sqrt"), default="target")
    c.add_argument("--header", action="store_true")
    c.add_argument("--config", default=None)

    m = sub.add_parser("medheur", help="median-heuristic bandwidth of pooled samples")
    m.add_argument("--x", required=True)
    m.add_argument("--y", required=True)
    m.add_argument("--cap", type=int, default=512)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--header", action="store_true")
    m.add_argument("--config", default=None)
    return p


def _load_config_flags(path: str) -> list[str]:
    flags: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise UsageError(f"{path}:{lineno}: empty key")
            flags.append("--" + key.replace("_", "-"))
            flags.append(value)
    return flags


def _splice_config(argv: list[str]) -> list[str]:
    """Insert config-file entries right after the verb; explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    flags = _load_config_flags(argv[i + 1])
    rest = argv[1:i] + argv[i + 2:]
    return [argv[0]] + flags + rest


def _print_config(args: argparse.Namespace) -> None:
    skip = {"config"}
    parts = [f"{k}={v}" for k, v in sorted(vars(args).items())
             if k not in skip and v is not None and v != ""]
    print("# config: " + " ".join(parts))


def _print_record(report) -> None:
    rank = "" if getattr(report, "rank", None) is None else str(report.rank)
    b_alpha = "" if getattr(report, "threshold_index", None) is None \
        else str(report.threshold_index)
    stat = getattr(report, "statistic", None)
    if stat is None:  # aggregated report carries one statistic per kernel
        stat = max(report.statistics)
    print(f"statistic={stat:.17g} rank={rank} b_alpha={b_alpha} "
          f"reject={int(report.reject)} elapsed_ns={report.elapsed_ns}")


def _resolve_kernel(spec_text: str, x: Sample, y: Sample, rng: RngStream):
    spec = parse_kernel_spec(spec_text)
    if spec == "gauss-med":
        return Gaussian(median_heuristic(x, y, rng=rng))
    return spec


def _single_int(text: str | int, flag: str) -> int:
    if isinstance(text, int):
        return text
    vals = [v for v in str(text).split(",") if v]
    if len(vals) != 1:
        raise UsageError(f"--{flag} must be a single value here, got {text!r}")
    return int(vals[0])


def _int_list(text: str | int, default: list[int | None]) -> list[int | None]:
    if isinstance(text, int):
        return [text]
    vals = [v for v in str(text).split(",") if v]
    return [int(v) for v in vals] if vals else default


def _make_design(kind: str, n: int, ell: int | None, setup_rng: RngStream):
    count = ell if ell else 4 * n
    if kind == "ring":
        return design_deterministic(n, count)
    return design_uniform(n, count, child_stream(setup_rng, 2))


def _make_test_runner(name: str, args: argparse.Namespace, *, n: int, d: int,
                      g=None, s=None, B=None, r=None, block_size=None, ell=None):
    """Closure (x, y, rng) -> report for one fully resolved test configuration.

    Child stream 0 feeds bandwidth selection and design/feature draws,
    child 1 the test procedure itself.
    """
    alpha = args.alpha
    delta = args.delta

    def runner(x: Sample, y: Sample, rng: RngStream):
        setup_rng = child_stream(rng, 0)
        test_rng = child_stream(rng, 1)
        kernel = _resolve_kernel(args.bandwidth, x, y, child_stream(setup_rng, 0))
        split_kernel = sqrt_kernel(kernel) if args.split == "sqrt" else kernel
        if name == "ctt":
            cfg = CttConfig(alpha=alpha, g=g, s=s, B=B, delta=delta,
                            kernel=kernel, split_kernel=split_kernel)
            return ctt(x, y, cfg, test_rng)
        if name == "lrctt":
            a = args.a if args.a is not None else default_halving_param(r, g)
            s_mr, s_nr = lr_ctt_bins(x.n, y.n, r, a, g)
            fmap = rff_draw(kernel.bandwidth, r, d, child_stream(setup_rng, 1))
            cfg = LrCttConfig(feature_map=fmap, s_r=s_mr + s_nr, a=a, alpha=alpha,
                              g=g, s=s, B=B, delta=delta, kernel=kernel,
                              split_kernel=split_kernel)
            return lr_ctt(x, y, cfg, test_rng)
        if name == "actt":
            lam0 = kernel.bandwidth
            count = args.lambda_count
            kernels = tuple(
                (Gaussian(lam0 * 2.0 ** (-i)), Gaussian(lam0 * 2.0 ** (-i)), 1.0 / count)
                for i in range(count)
            )
            cfg = ActtConfig(kernels=kernels, alpha=alpha, g=g, s=s, delta=delta,
                             B1=args.B1, B2=args.B2, B3=args.B3)
            return actt(x, y, cfg, test_rng)
        if name == "wblock":
            return wild_bootstrap_test("block", x, y, kernel, B, alpha, test_rng,
                                       block_size=block_size)
        if name == "wincomplete":
            design = _make_design(args.design or "ring", x.n, ell, setup_rng)
            return wild_bootstrap_test("incomplete", x, y, kernel, B, alpha, test_rng,
                                       design=design)
        if name == "quadratic":
            return wild_bootstrap_test("complete", x, y, kernel, B, alpha, test_rng)
        if name == "ablock1":
            return asymptotic_block_test(x, y, kernel, block_size, alpha, "I", test_rng)
        if name == "ablock2":
            return asymptotic_block_test(x, y, kernel, block_size, alpha, "II", test_rng)
        if name == "aincomplete":
            design = _make_design(args.design or "uniform", x.n, ell, setup_rng)
            return asymptotic_incomplete_test(x, y, kernel, design, alpha)
        if name == "rff":
            fmap = rff_draw(kernel.bandwidth, r, d, child_stream(setup_rng, 1))
            return rff_test(x, y, fmap, B, alpha, test_rng)
        raise UsageError(f"--test {name} is not recognized")

    return runner


def _cmd_test(args: argparse.Namespace) -> int:
    x = load_sample(args.x, skip_header=args.header)
    y = load_sample(args.y, skip_header=args.header)
    _print_config(args)
    root = RngStream(args.seed)
    runner = _make_test_runner(
        args.test, args, n=x.n, d=x.d,
        g=_single_int(args.g, "g"), s=args.s, B=_single_int(args.B, "B"),
        r=_single_int(args.r, "r"),
        block_size=_single_int(args.block_size, "block-size"),
        ell=_single_int(args.ell, "ell") if args.ell else None,
    )
    report = runner(x, y, root)
    if getattr(report, "threshold", None) is not None:
        print(f"# threshold: {report.threshold:.17g}")
    if hasattr(report, "statistics"):
        print(f"# actt: u={report.u:.6g} "
              + " ".join(f"m{i}={v:.10g}/thr={t:.10g}"
                         for i, (v, t) in enumerate(zip(report.statistics, report.thresholds))))
    _print_record(report)
    return 0


def _parse_scenario(text: str, n: int) -> bench_mod.ScenarioSpec:
    kind, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            if "=" not in item:
                raise UsageError(f"--scenario parameter {item!r} must be key=value")
            key, value = item.split("=", 1)
            params[key.strip()] = float(value)
    if kind == "gauss":
        return bench_mod.ScenarioSpec(kind="gauss", n=n, d=int(params.get("d", 2)),
                                      shift=params.get("shift", 0.0))
    if kind == "blobs":
        return bench_mod.ScenarioSpec(kind="blobs", n=n, epsilon=params.get("epsilon", 1.0))
    raise UsageError(f"--scenario kind {kind!r} must be gauss or blobs")


def _cmd_bench(args: argparse.Namespace) -> int:
    _print_config(args)
    tests = [t for t in args.test.split(",") if t]
    for t in tests:
        if t not in TEST_NAMES:
            raise UsageError(f"--test {t!r} is not one of {', '.join(TEST_NAMES)}")
    sweeps = {
        "g": _int_list(args.g, [0]),
        "B": _int_list(args.B, [39]),
        "r": _int_list(args.r, [256]),
        "block_size": _int_list(args.block_size, [32]),
        "ell": _int_list(args.ell, [None]),
    }
    rows = []
    for test_name, n in itertools.product(tests, _int_list(args.n, [])):
        scenario = _parse_scenario(args.scenario, n)
        relevant = _RELEVANT[test_name]
        axes = {k: (v if k in relevant else [None]) for k, v in sweeps.items()}
        for g, B, r, block_size, ell in itertools.product(
                axes["g"], axes["B"], axes["r"], axes["block_size"], axes["ell"]):
            runner = _make_test_runner(test_name, args, n=n, d=scenario.d,
                                       g=g, s=args.s, B=B, r=r,
                                       block_size=block_size, ell=ell)
            summary = bench_mod.run_replications(
                runner, scenario, args.reps, args.seed,
                parallelism=args.jobs, confidence=args.confidence)
            rows.append(bench_mod.bench_row(
                scenario.label, test_name, summary, n=n,
                d=scenario.d if scenario.kind == "gauss" else 2,
                g=g, s=args.s if "s" in relevant else None, B=B, r=r,
                block_size=block_size,
                ell=(ell if ell else (4 * n if "ell" in relevant else None)),
                alpha=args.alpha))
            print(f"# bench: test={test_name} n={n} rate={summary.rate:.4f} "
                  f"median_ns={summary.median_elapsed_ns}")
    bench_mod.write_bench_csv(args.out, rows, append=args.append)
    print(f"# wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_compress(args: argparse.Namespace) -> int:
    sample = load_sample(args.input, skip_header=args.header)
    _print_config(args)
    root = RngStream(args.seed)
    spec = parse_kernel_spec(args.kernel)
    if spec == "gauss-med":
        spec = Gaussian(median_heuristic(sample, sample, rng=child_stream(root, 0)))
    split_kernel = sqrt_kernel(spec) if args.split == "sqrt" else spec
    cfg = CompressConfig(g=args.g, delta=args.delta, kernel=spec, split_kernel=split_kernel)
    coreset = kt_compress(sample, cfg.g, cfg.kernel, cfg.split_kernel, cfg.delta,
                          child_stream(root, 1))
    save_points(args.output, coreset.points)
    print(f"# wrote coreset of {len(coreset)} rows to {args.output}")
    return 0


def _cmd_medheur(args: argparse.Namespace) -> int:
    x = load_sample(args.x, skip_header=args.header)
    y = load_sample(args.y, skip_header=args.header)
    _print_config(args)
    bw = median_heuristic(x, y, cap=args.cap, rng=RngStream(args.seed))
    print(f"bandwidth={bw:.17g}")
    return 0


def parse_and_dispatch(argv: list[str]) -> int:
    """Parse argv (without the program name) and run the selected verb."""
    parser = build_parser()
    try:
        argv = _splice_config(list(argv))
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.verb == "test":
            return _cmd_test(args)
        if args.verb == "bench":
            return _cmd_bench(args)
        if args.verb == "compress":
            return _cmd_compress(args)
        if args.verb == "medheur":
            return _cmd_medheur(args)
        raise UsageError(f"unknown verb {args.verb!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (CompressTestError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
