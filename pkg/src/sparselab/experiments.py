"""Monte Carlo experiments on smallest singular values and the
geometry behind them.

Each experiment draws per-trial matrices from counter-based streams
(seed, trial), so any trial can be reproduced alone and the assembled
results do not depend on execution order; the optional thread pool
exploits the fact that the underlying LAPACK calls release the GIL.

The quantities measured:

  * sqrt(N) * s_N for square matrices: the scale on which smallest
    singular values of square random matrices live;
  * s_n / (sqrt(N) - sqrt(n-1)) for tall N x n matrices, which should
    hover near a dimension-free constant;
  * the small-ball curve eps -> P(sqrt(N) * s_N < eps), expected to be
    at most linear in eps up to an exponentially small additive term;
  * the distance from one column to the span of the others, whose law
    for Gaussian entries is exactly half-normal, and the inner product
    of a unit normal with an independent column, whose law approaches
    standard normal at a sqrt(N) rate for any unit-variance entries;
  * restricted minima over sparse supports and the operator-norm
    correction that extends them to compressible vectors;
  * a per-vector witness: ||Ax|| >= |x_k| * dist(A_k, span of the
    other columns) for every coordinate k.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, TypeVar

import numpy as np

from .ensembles import Distribution, EnsembleSpec, sample_entries, sample_matrix, trial_rng
from .errors import BudgetExceededError
from .geometry import (
    SparsityParams,
    VectorClass,
    classify,
    sample_incompressible,
)
from .linalg import (
    distance_to_colspan,
    singular_values,
    unit_normal,
)
from .errors import RankDeficiencyError
from .ric import iter_supports, support_count
from .stats import (
    half_normal_cdf,
    ks_statistic,
    lower_median,
    slope_through_origin,
    wilson_interval,
)

__all__ = [
    "map_trials",
    "SvScalingResult",
    "square_sv_experiment",
    "rectangular_sv_experiment",
    "TailCurveResult",
    "tail_curve",
    "SparseMinimum",
    "sparse_minimum",
    "CompressibleBound",
    "compressible_lower_bound",
    "HyperplaneResult",
    "hyperplane_distance_experiment",
    "BerryEsseenResult",
    "berry_esseen_discrepancy",
    "ChainWitness",
    "geometric_chain_check",
    "WitnessReport",
    "incompressible_minimum_witness",
]

T = TypeVar("T")


def map_trials(fn: Callable[[int], T], trials: int, workers: int = 1) -> list[T]:
    """Evaluate fn(0..trials-1), optionally on a thread pool.

    Results come back indexed by trial regardless of completion order,
    so worker count can never change the output."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if workers <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


# ---------------------------------------------------------------------------
# square and rectangular scaling


@dataclass
class SvScalingResult:
    rows: int
    cols: int
    statistic: str
    values: np.ndarray        # scaled smallest singular values, by trial
    largest: np.ndarray       # unscaled largest singular values, by trial
    seed: int

    @property
    def median(self) -> float:
        return lower_median(self.values)


def square_sv_experiment(
    spec: EnsembleSpec, trials: int, seed: int = 0, workers: int = 1
) -> SvScalingResult:
    """Distribution of sqrt(N) * s_N for square N x N draws."""
    if spec.rows != spec.cols:
        raise ValueError(f"square experiment needs rows == cols, got {spec.rows}x{spec.cols}")
    n = spec.rows
    root = math.sqrt(n)

    def one(t: int) -> tuple[float, float]:
        sv = singular_values(sample_matrix(spec, seed, t))
        return root * float(sv[-1]), float(sv[0])

    pairs = map_trials(one, trials, workers)
    vals = np.array([p[0] for p in pairs])
    tops = np.array([p[1] for p in pairs])
    return SvScalingResult(
        rows=n, cols=n, statistic="sqrtN_times_smin", values=vals, largest=tops, seed=seed
    )


def rectangular_sv_experiment(
    spec: EnsembleSpec, trials: int, seed: int = 0, workers: int = 1
) -> SvScalingResult:
    """Distribution of s_n / (sqrt(N) - sqrt(n-1)) for tall N x n draws.

    The denominator is the expected location of s_n up to a constant
    factor, so the scaled statistic should concentrate near a value
    that depends on neither dimension."""
    if spec.rows < spec.cols:
        raise ValueError(f"rectangular experiment needs rows >= cols, got {spec.rows}x{spec.cols}")
    gap = math.sqrt(spec.rows) - math.sqrt(spec.cols - 1)

    def one(t: int) -> tuple[float, float]:
        sv = singular_values(sample_matrix(spec, seed, t))
        return float(sv[-1]) / gap, float(sv[0])

    pairs = map_trials(one, trials, workers)
    vals = np.array([p[0] for p in pairs])
    tops = np.array([p[1] for p in pairs])
    return SvScalingResult(
        rows=spec.rows,
        cols=spec.cols,
        statistic="smin_over_gap",
        values=vals,
        largest=tops,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# small-ball curve


@dataclass
class TailCurveResult:
    rows: int
    eps: np.ndarray
    prob: np.ndarray
    wilson_low: np.ndarray
    wilson_high: np.ndarray
    c_hat: float              # no-intercept slope fitted on eps <= fit_cutoff
    fit_cutoff: float
    samples: np.ndarray       # sqrt(N) * s_N, by trial
    seed: int


def tail_curve(
    spec: EnsembleSpec,
    trials: int,
    eps_grid: np.ndarray,
    seed: int = 0,
    workers: int = 1,
    fit_cutoff: float = 0.5,
) -> TailCurveResult:
    """Empirical eps -> P(sqrt(N) * s_N < eps) on a fixed grid.

    The curve is a CDF evaluated on a grid, so it is nondecreasing by
    construction and exactly zero at eps = 0.  The reported c_hat is
    the through-origin slope over the small-eps region, where the
    linear term of the tail bound dominates."""
    eps_grid = np.asarray(eps_grid, dtype=np.float64)
    if eps_grid.ndim != 1 or eps_grid.size < 2:
        raise ValueError("eps_grid must be a 1-d grid with at least two points")
    if np.any(np.diff(eps_grid) <= 0.0):
        raise ValueError("eps_grid must be strictly increasing")
    base = square_sv_experiment(spec, trials, seed, workers)
    samples = base.values
    counts = np.array([int(np.count_nonzero(samples < e)) for e in eps_grid])
    prob = counts / float(trials)
    bands = np.array([wilson_interval(int(c), trials) for c in counts])
    fit_mask = (eps_grid > 0.0) & (eps_grid <= fit_cutoff)
    c_hat = slope_through_origin(eps_grid, prob, fit_mask)
    return TailCurveResult(
        rows=spec.rows,
        eps=eps_grid,
        prob=prob,
        wilson_low=bands[:, 0],
        wilson_high=bands[:, 1],
        c_hat=c_hat,
        fit_cutoff=fit_cutoff,
        samples=samples,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# restricted minima


@dataclass
class SparseMinimum:
    """min over |T| = s of the smallest singular value of A_T."""

    s: int
    value: float
    support: tuple[int, ...]
    supports_checked: int
    total_supports: int
    exact: bool


def _min_restricted_scan(gram: np.ndarray, supports_arr: np.ndarray) -> tuple[float, int]:
    blocks = gram[supports_arr[:, :, None], supports_arr[:, None, :]]
    lmin = np.linalg.eigvalsh(blocks)[:, 0]
    j = int(np.argmin(lmin))
    return float(max(lmin[j], 0.0)), j


def sparse_minimum(
    a: np.ndarray,
    s: int,
    budget: int = 1_000_000,
    support_trials: Optional[int] = None,
    seed: int = 0,
) -> SparseMinimum:
    """Smallest restricted singular value over all supports of size s.

    Exhaustive when C(cols, s) fits the budget; with support_trials
    given it falls back to uniformly sampled supports, which yields an
    upper bound on the true minimum (a min over fewer supports).
    Otherwise the over-budget enumeration raises."""
    a = np.asarray(a, dtype=np.float64)
    rows, cols = a.shape
    if not 1 <= s <= min(rows, cols):
        raise ValueError(f"s must lie in [1, min(rows, cols)] = [1, {min(rows, cols)}], got {s}")
    total = support_count(cols, s)
    gram = a.T @ a
    chunk = 4096
    best = math.inf
    best_support: tuple[int, ...] = ()
    checked = 0
    if total <= budget:
        import itertools as _it

        it = iter_supports(cols, s)
        while True:
            block = list(_it.islice(it, chunk))
            if not block:
                break
            val, j = _min_restricted_scan(gram, np.array(block, dtype=np.intp))
            if val < best:
                best = val
                best_support = tuple(int(v) for v in block[j])
            checked += len(block)
        exact = True
    elif support_trials is not None:
        if support_trials < 1:
            raise ValueError("support_trials must be positive")
        rng = trial_rng(seed)
        remaining = support_trials
        while remaining > 0:
            m = min(remaining, chunk)
            block = [tuple(np.sort(rng.choice(cols, size=s, replace=False))) for _ in range(m)]
            val, j = _min_restricted_scan(gram, np.array(block, dtype=np.intp))
            if val < best:
                best = val
                best_support = tuple(int(v) for v in block[j])
            checked += m
            remaining -= m
        exact = False
    else:
        raise BudgetExceededError(
            f"C({cols},{s}) = {total} supports exceeds budget {budget}; "
            "pass support_trials for a sampled scan"
        )
    # eigenvalues of Gram blocks are squared singular values
    return SparseMinimum(
        s=s,
        value=math.sqrt(best),
        support=best_support,
        supports_checked=checked,
        total_supports=total,
        exact=exact,
    )


@dataclass
class CompressibleBound:
    """Certified lower bound on ||Ax|| over compressible unit vectors.

    Any x within distance c' of an s-sparse unit vector y satisfies
    ||Ax|| >= ||Ay|| - ||A|| * c' >= sparse_min - operator_norm * c',
    so positivity of the bound certifies invertibility on the whole
    compressible class from finitely many supports."""

    s: int
    radius: float
    sparse_min: float
    operator_norm: float
    value: float
    exact: bool
    support: tuple[int, ...]


def compressible_lower_bound(
    a: np.ndarray,
    params: SparsityParams,
    s: Optional[int] = None,
    budget: int = 1_000_000,
    support_trials: Optional[int] = None,
    seed: int = 0,
) -> CompressibleBound:
    a = np.asarray(a, dtype=np.float64)
    if s is None:
        s = params.sparsity_for(a.shape[1])
    sm = sparse_minimum(a, s, budget=budget, support_trials=support_trials, seed=seed)
    op = float(singular_values(a)[0])
    value = sm.value - params.compressibility_radius * op
    return CompressibleBound(
        s=s,
        radius=params.compressibility_radius,
        sparse_min=sm.value,
        operator_norm=op,
        value=value,
        exact=sm.exact,
        support=sm.support,
    )


# ---------------------------------------------------------------------------
# hyperplane distances


@dataclass
class HyperplaneResult:
    rows: int
    values: np.ndarray        # dist(first column, span of the rest), kept trials
    raw: np.ndarray           # by trial, NaN where the draw was degenerate
    skipped: int              # rank-deficient draws, counted not replaced
    ks_half_normal: float
    seed: int

    @property
    def median(self) -> float:
        return lower_median(self.values)


def hyperplane_distance_experiment(
    spec: EnsembleSpec, trials: int, seed: int = 0, workers: int = 1
) -> HyperplaneResult:
    """Distance from the first column to the span of the others for
    square draws.

    For Gaussian entries this distance is exactly |N(0,1)| by
    rotation invariance, so the KS statistic against the half-normal
    CDF doubles as a correctness check of the whole pipeline.  Draws
    whose last N-1 columns fail to span a hyperplane are skipped and
    counted; for continuous ensembles that event has probability 0."""
    if spec.rows != spec.cols or spec.rows < 2:
        raise ValueError(f"need a square spec with N >= 2, got {spec.rows}x{spec.cols}")

    def one(t: int) -> float:
        a = sample_matrix(spec, seed, t)
        b = a[:, 1:]
        sv = singular_values(b)
        if sv[-1] <= 1e-10 * sv[0]:
            return math.nan  # degenerate span, skip-and-count
        return distance_to_colspan(a[:, 0], b)

    raw = np.array(map_trials(one, trials, workers))
    kept = raw[~np.isnan(raw)]
    if kept.size == 0:
        raise RuntimeError("all trials degenerate; nothing to report")
    ks = ks_statistic(kept, half_normal_cdf)
    return HyperplaneResult(
        rows=spec.rows,
        values=kept,
        raw=raw,
        skipped=int(np.count_nonzero(np.isnan(raw))),
        ks_half_normal=ks,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# normal-projection discrepancy


@dataclass
class BerryEsseenResult:
    rows: int
    samples: np.ndarray             # <a, X> per kept trial
    raw: np.ndarray                 # by trial, NaN where the draw was degenerate
    discrepancy: float              # sup_t |P(|S| < t) - P(|Z| < t)|
    ks_band95: float                # 1.36 / sqrt(kept trials)
    skipped: int
    incompressible_fraction: float  # of the unit normals, default params
    seed: int


def berry_esseen_discrepancy(
    spec: EnsembleSpec,
    trials: int,
    seed: int = 0,
    workers: int = 1,
    params: Optional[SparsityParams] = None,
) -> BerryEsseenResult:
    """Law of S = <a, X> where a is the unit normal of the span of an
    independent (N-1)-column draw and X is a fresh column.

    S is a unit-variance weighted sum of iid entries, so its law should
    approach standard normal as N grows, at rate sqrt(N) in the sup
    metric.  For Gaussian entries S is exactly standard normal at every
    N, which makes the Gaussian run a noise-floor control rather than a
    rate measurement.  The unit normals are also classified against the
    sparse-decomposition default: the rate story needs them spread out,
    and the reported incompressible fraction confirms they are."""
    if spec.rows != spec.cols or spec.rows < 2:
        raise ValueError(f"need a square spec with N >= 2, got {spec.rows}x{spec.cols}")
    n = spec.rows
    if params is None:
        params = SparsityParams()

    def one(t: int) -> tuple[float, float]:
        rng = trial_rng(seed, t)
        b = sample_entries(spec.distribution, rng, (n, n - 1))
        try:
            a = unit_normal(b)
        except RankDeficiencyError:
            return math.nan, math.nan
        x = sample_entries(spec.distribution, rng, n)
        inc = 1.0 if classify(a, params) is VectorClass.INCOMPRESSIBLE else 0.0
        return float(a @ x), inc

    pairs = map_trials(one, trials, workers)
    raw = np.array([p[0] for p in pairs])
    inc = np.array([p[1] for p in pairs])
    kept = raw[~np.isnan(raw)]
    if kept.size == 0:
        raise RuntimeError("all trials degenerate; nothing to report")
    disc = ks_statistic(np.abs(kept), half_normal_cdf)
    return BerryEsseenResult(
        rows=n,
        samples=kept,
        raw=raw,
        discrepancy=disc,
        ks_band95=1.36 / math.sqrt(kept.size),
        skipped=int(np.count_nonzero(np.isnan(raw))),
        incompressible_fraction=float(np.mean(inc[~np.isnan(raw)])),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# the geometric chain and its witness


@dataclass
class ChainWitness:
    k: int
    ax_norm: float
    dist_ax: float       # dist(Ax, span of columns other than k)
    xk_times_dist: float  # |x_k| * dist(A_k, same span)
    ok: bool
    rel_gap: float


def geometric_chain_check(a: np.ndarray, x: np.ndarray, k: int, rtol: float = 1e-6) -> ChainWitness:
    """Verify, for one (A, x, k):  ||Ax|| >= dist(Ax, H_k) and
    dist(Ax, H_k) == |x_k| * dist(A_k, H_k), H_k being the span of the
    columns of A other than k.

    The equality holds because Ax = x_k A_k + (a vector inside H_k);
    shifting by elements of H_k cannot change distance to H_k."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    rows, cols = a.shape
    if x.shape[0] != cols:
        raise ValueError(f"x must have {cols} coordinates, got {x.shape[0]}")
    if not 0 <= k < cols:
        raise ValueError(f"k must lie in [0, {cols}), got {k}")
    if cols < 2:
        raise ValueError("need at least two columns")
    others = a[:, [j for j in range(cols) if j != k]]
    ax = a @ x
    ax_norm = float(np.linalg.norm(ax))
    d1 = distance_to_colspan(ax, others)
    d2 = abs(float(x[k])) * distance_to_colspan(a[:, k], others)
    scale = max(d1, d2, 1e-12 * max(ax_norm, 1.0))
    rel_gap = abs(d1 - d2) / scale
    ok = (d1 <= ax_norm * (1.0 + 1e-9) + 1e-12) and rel_gap <= rtol
    return ChainWitness(k=k, ax_norm=ax_norm, dist_ax=d1, xk_times_dist=d2, ok=ok, rel_gap=rel_gap)


@dataclass
class WitnessReport:
    """Coordinate-wise lower bounds on ||Ax|| over sampled
    incompressible unit vectors.

    For each sample the witness is max_k |x_k| * dist(A_k, H_k), which
    can never exceed ||Ax||; violations counts numerical failures of
    that inequality (expected: zero).  min_scaled_norm is the smallest
    sqrt(N) * ||Ax|| observed."""

    rows: int
    samples: int
    values: np.ndarray        # sqrt(N) * ||Ax|| per sample
    witnesses: np.ndarray     # sqrt(N) * witness per sample
    violations: int
    min_scaled_norm: float
    column_distances: np.ndarray


def incompressible_minimum_witness(
    a: np.ndarray,
    params: SparsityParams,
    samples: int,
    seed: int = 0,
) -> WitnessReport:
    a = np.asarray(a, dtype=np.float64)
    rows, cols = a.shape
    if rows != cols:
        raise ValueError(f"witness experiment expects a square matrix, got {a.shape}")
    if samples < 1:
        raise ValueError("samples must be positive")
    n = rows
    root = math.sqrt(n)
    dcol = np.empty(n)
    for k in range(n):
        others = np.delete(a, k, axis=1)
        dcol[k] = distance_to_colspan(a[:, k], others)
    rng = trial_rng(seed)
    vals = np.empty(samples)
    wits = np.empty(samples)
    violations = 0
    for i in range(samples):
        x = sample_incompressible(rng, n, params)
        ax_norm = float(np.linalg.norm(a @ x))
        w = float(np.max(np.abs(x) * dcol))
        vals[i] = root * ax_norm
        wits[i] = root * w
        if ax_norm < w - 1e-8 * max(1.0, w):
            violations += 1
    return WitnessReport(
        rows=n,
        samples=samples,
        values=vals,
        witnesses=wits,
        violations=violations,
        min_scaled_norm=float(np.min(vals)),
        column_distances=dcol,
    )
