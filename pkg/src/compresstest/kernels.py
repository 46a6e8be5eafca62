"""Kernels, bandwidth selection, and random Fourier feature maps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RngStream, Sample
from .errors import DegenerateSample, DimensionMismatch, Unsupported


@dataclass(frozen=True)
class Gaussian:
    """exp(-||x-y||^2 / (2 bandwidth^2))."""

    bandwidth: float

    def __post_init__(self):
        if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise ValueError(f"bandwidth must be positive and finite, got {self.bandwidth}")


@dataclass(frozen=True)
class SumKernel:
    """Nonnegative combination sum_i scale_i * k_i(x, y)."""

    terms: tuple  # of (KernelSpec, scale) pairs

    def __post_init__(self):
        terms = tuple((k, float(s)) for k, s in self.terms)
        if not terms:
            raise ValueError("SumKernel needs at least one term")
        for _, s in terms:
            if not (s >= 0 and math.isfinite(s)):
                raise ValueError(f"term scale must be finite and >= 0, got {s}")
        object.__setattr__(self, "terms", terms)


KernelSpec = Gaussian | SumKernel


def _sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, shape (len(a), len(b))."""
    d2 = a @ b.T
    d2 *= -2.0
    d2 += np.einsum("ij,ij->i", a, a)[:, None]
    d2 += np.einsum("ij,ij->i", b, b)[None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def gram(spec: KernelSpec, a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Kernel matrix between the rows of a and b (b defaults to a)."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    symmetric = b is None
    b = a if symmetric else np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"d={a.shape[1]} vs d={b.shape[1]}")
    d2 = _sqdist(a, b)
    if symmetric:
        np.fill_diagonal(d2, 0.0)
    return kernel_from_sqdist(spec, d2, out=d2 if isinstance(spec, Gaussian) else None)


def kernel_from_sqdist(spec: KernelSpec, d2: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Apply the kernel profile to precomputed squared distances.

    For translation-invariant kernels k(x, y) depends on ||x-y||^2 only;
    this evaluates that profile elementwise. out may alias d2 for the
    Gaussian fast path.
    """
    if isinstance(spec, Gaussian):
        if out is None:
            out = np.empty_like(d2)
        np.multiply(d2, -0.5 / spec.bandwidth**2, out=out)
        np.exp(out, out=out)
        return out
    if isinstance(spec, SumKernel):
        if out is None or out is d2:
            acc = np.zeros_like(d2)
        else:
            acc = out
            acc[...] = 0.0
        tmp = np.empty_like(d2)
        for sub, scale in spec.terms:
            if scale != 0.0:
                kernel_from_sqdist(sub, d2, out=tmp)
                tmp *= scale
                acc += tmp
        return acc
    raise Unsupported(f"unknown kernel spec {spec!r}")


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a single pair of points."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise DimensionMismatch(f"point dims {x.shape[0]} vs {y.shape[0]}")
    diff = x - y
    d2 = float(diff @ diff)
    return _eval_sqdist(spec, d2)


def _eval_sqdist(spec: KernelSpec, d2: float) -> float:
    if isinstance(spec, Gaussian):
        return math.exp(d2 / (-2.0 * spec.bandwidth ** 2))
    if isinstance(spec, SumKernel):
        return sum(scale * _eval_sqdist(sub, d2) for sub, scale in spec.terms)
    raise Unsupported(f"unknown kernel spec {spec!r}")


def diag_value(spec: KernelSpec) -> float:
    """k(x, x), constant for the translation-invariant kernels used here."""
    if isinstance(spec, Gaussian):
        return 1.0
    if isinstance(spec, SumKernel):
        return sum(scale * diag_value(sub) for sub, scale in spec.terms)
    raise Unsupported(f"unknown kernel spec {spec!r}")


def sqrt_kernel(spec: KernelSpec) -> Gaussian:
    """Square-root companion of a Gaussian: bandwidth / sqrt(2), unnormalized.

    The normalizing constant is dropped because the thinning decisions
    downstream are invariant to kernel scale.
    """
    if not isinstance(spec, Gaussian):
        raise Unsupported("square-root kernel is only defined for the Gaussian variant")
    return Gaussian(spec.bandwidth / math.sqrt(2.0))


def median_heuristic(x: Sample, y: Sample, cap: int = 512, rng: RngStream | None = None) -> float:
    """Median pairwise distance over a pooled subsample of x and y.

    Draws min(cap, m) points from x and min(cap, n) from y uniformly
    without replacement (no draw happens when a sample already fits under
    the cap), pools them, and returns the lower median of all pairwise
    Euclidean distances. Raises DegenerateSample when that median is zero.
    """
    if cap < 2:
        raise ValueError(f"cap must be >= 2, got {cap}")
    if x.n + y.n < 2:
        raise DegenerateSample("need at least two pooled points")
    if x.d != y.d:
        raise DimensionMismatch(f"d={x.d} vs d={y.d}")

    def subsample(s: Sample, index: int) -> np.ndarray:
        if s.n <= cap:
            return s.points
        if rng is None:
            raise ValueError("rng required when subsampling is needed")
        gen = rng.child(index).generator()
        keep = gen.choice(s.n, size=cap, replace=False)
        return s.points[keep]

    pooled = np.vstack([subsample(x, 0), subsample(y, 1)])
    d2 = _sqdist(pooled, pooled)
    # each unordered pair appears twice; sinking the diagonal below every
    # pair maps the lower pair-median to index n + 2 * ((P - 1) // 2)
    count = pooled.shape[0]
    np.fill_diagonal(d2, -1.0)
    pairs = count * (count - 1) // 2
    where = count + 2 * ((pairs - 1) // 2)
    flat = d2.reshape(-1)
    flat.partition(where)  # d2 is scratch, partition in place
    med = float(np.sqrt(max(flat[where], 0.0)))
    if med <= 0.0:
        raise DegenerateSample("median pairwise distance is zero")
    return med


@dataclass(frozen=True)
class FeatureMap:
    """Random Fourier features x -> sqrt(2/r) * cos(Omega @ x + b)."""

    frequencies: np.ndarray  # (r, d)
    offsets: np.ndarray      # (r,), values in [0, 2*pi)

    def __post_init__(self):
        freq = np.asarray(self.frequencies, dtype=np.float64)
        off = np.asarray(self.offsets, dtype=np.float64)
        if freq.ndim != 2 or off.ndim != 1 or off.shape[0] != freq.shape[0]:
            raise ValueError("frequencies must be (r, d) and offsets (r,)")
        freq = freq.view()
        off = off.view()
        freq.flags.writeable = False
        off.flags.writeable = False
        object.__setattr__(self, "frequencies", freq)
        object.__setattr__(self, "offsets", off)

    @property
    def rank(self) -> int:
        return self.frequencies.shape[0]

    @property
    def d(self) -> int:
        return self.frequencies.shape[1]

    @property
    def scale(self) -> float:
        return math.sqrt(2.0 / self.rank)


def rff_draw(bandwidth: float, r: int, d: int, rng: RngStream) -> FeatureMap:
    """Draw an r-feature map approximating the Gaussian kernel at this bandwidth.

    Frequencies are i.i.d. Normal(0, I_d / bandwidth^2), offsets i.i.d.
    Uniform[0, 2*pi); the inner product of two feature vectors is an
    unbiased estimate of the kernel value.
    """
    if r < 1:
        raise ValueError(f"rank must be >= 1, got {r}")
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    gen = rng.generator()
    freq = gen.standard_normal((r, d)) / bandwidth
    off = gen.uniform(0.0, 2.0 * math.pi, size=r)
    return FeatureMap(freq, off)


def feature_matrix(fmap: FeatureMap, pts: np.ndarray) -> np.ndarray:
    """Feature vectors for every row of pts, shape (n, r)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    if pts.shape[1] != fmap.d:
        raise DimensionMismatch(f"points have d={pts.shape[1]}, map expects {fmap.d}")
    return fmap.scale * np.cos(pts @ fmap.frequencies.T + fmap.offsets)


def featurize(fmap: FeatureMap, x) -> np.ndarray:
    """Feature vector of a single point, length rank."""
    return feature_matrix(fmap, np.asarray(x, dtype=np.float64).reshape(1, -1))[0]


def parse_kernel_spec(text: str) -> KernelSpec | str:
    """Parse a CLI kernel string: gauss:<lambda> | gauss-med | sum:<spec>,<spec>,...

    Returns the sentinel string "gauss-med" when the bandwidth is to be
    resolved later via the median heuristic.
    """
    text = text.strip()
    if text == "gauss-med":
        return "gauss-med"
    if text.startswith("gauss:"):
        return Gaussian(float(text[len("gauss:"):]))
    if text.startswith("sum:"):
        parts = [p for p in text[len("sum:"):].split(",") if p]
        terms = []
        for part in parts:
            sub = parse_kernel_spec(part)
            if isinstance(sub, str):
                raise ValueError("gauss-med is not allowed inside sum:")
            terms.append((sub, 1.0))
        return SumKernel(tuple(terms))
    raise ValueError(f"unrecognized kernel spec {text!r}")
