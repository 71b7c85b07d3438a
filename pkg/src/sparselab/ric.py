"""Restricted isometry constants by support enumeration.

For a matrix A and support T, the restricted Gram block is
G_T = (A_T)' A_T, and the restricted isometry constant of order s is

    delta_s = max over |T| = s of max(lmax(G_T) - 1, 1 - lmin(G_T)),

the smallest delta with (1-delta)||x||^2 <= ||Ax||^2 <= (1+delta)||x||^2
on s-sparse x.  Note both inequalities are in squared norms: for
diag(1, 1/2) the order-1 constant is 3/4, not 1/2.

Exhaustive enumeration walks supports lexicographically, evaluating
eigenvalue extremes on batched Gram blocks; a budget guard refuses
enumerations that would exceed a configured support count, and a
randomized scan over uniformly drawn supports provides a certified
lower bound when exhaustion is out of reach.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .ensembles import Distribution, EnsembleSpec, Normalization, sample_matrix, trial_rng
from .errors import BudgetExceededError
from .stats import wilson_interval

__all__ = [
    "CT_THRESHOLD",
    "RicReport",
    "CertStatus",
    "CtCertificate",
    "Prop1Result",
    "matrix_checksum",
    "support_count",
    "iter_supports",
    "exact_ric",
    "randomized_ric",
    "ct_certificate",
    "ric_proposition_experiment",
]

# Order-2s constant at or below this value certifies exact s-sparse
# recovery by l1 minimization.
CT_THRESHOLD = math.sqrt(2.0) - 1.0

_CHUNK = 4096


def matrix_checksum(a: np.ndarray) -> str:
    """Content hash of a float64 matrix, shape included."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    h = hashlib.sha256()
    h.update(f"{a.shape[0]}x{a.shape[1]}:".encode())
    h.update(a.tobytes())
    return h.hexdigest()


def support_count(cols: int, s: int) -> int:
    return math.comb(cols, s)


def iter_supports(cols: int, s: int) -> Iterator[tuple[int, ...]]:
    """All supports of size s in lexicographic order."""
    return itertools.combinations(range(cols), s)


@dataclass
class RicReport:
    """Result of a restricted isometry scan.

    lower_bound is False only when every support was visited; a
    randomized scan reports the largest deviation it saw, which bounds
    delta_s from below."""

    s: int
    delta: float
    worst_support: tuple[int, ...]
    method: str
    supports_checked: int
    total_supports: int
    matrix_checksum: str
    lower_bound: bool

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "delta_s": self.delta,
            "worst_support": list(self.worst_support),
            "method": self.method,
            "supports_checked": self.supports_checked,
            "total_supports": self.total_supports,
            "matrix_checksum": self.matrix_checksum,
            "lower_bound": self.lower_bound,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _scan_supports(gram: np.ndarray, supports: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Extreme eigenvalues of the Gram blocks of each support row.

    supports is an (m, s) integer array; returns (lmin, lmax) of shape
    (m,).  Blocks are gathered by fancy indexing and diagonalized in
    one batched eigvalsh call."""
    blocks = gram[supports[:, :, None], supports[:, None, :]]
    w = np.linalg.eigvalsh(blocks)
    return w[:, 0], w[:, -1]


def _deviation_scan(
    gram: np.ndarray, support_iter, count_hint: int
) -> tuple[float, tuple[int, ...], int]:
    """Max isometry deviation over the supplied supports.

    Ties keep the first support in iteration order, so lexicographic
    input gives a deterministic worst support."""
    best = -math.inf
    best_support: tuple[int, ...] = ()
    checked = 0
    while True:
        chunk = list(itertools.islice(support_iter, _CHUNK))
        if not chunk:
            break
        arr = np.array(chunk, dtype=np.intp)
        lmin, lmax = _scan_supports(gram, arr)
        dev = np.maximum(lmax - 1.0, 1.0 - lmin)
        j = int(np.argmax(dev))
        if float(dev[j]) > best:
            best = float(dev[j])
            best_support = tuple(int(v) for v in chunk[j])
        checked += len(chunk)
    return best, best_support, checked


def exact_ric(a: np.ndarray, s: int, budget: int = 1_000_000) -> RicReport:
    """delta_s by exhaustive support enumeration.

    Raises BudgetExceededError when C(cols, s) exceeds the budget
    instead of silently downgrading to a partial scan."""
    a = np.asarray(a, dtype=np.float64)
    cols = a.shape[1]
    if not 1 <= s <= cols:
        raise ValueError(f"s must lie in [1, {cols}], got {s}")
    total = support_count(cols, s)
    if total > budget:
        raise BudgetExceededError(
            f"C({cols},{s}) = {total} supports exceeds budget {budget}"
        )
    gram = a.T @ a
    delta, worst, checked = _deviation_scan(gram, iter_supports(cols, s), total)
    return RicReport(
        s=s,
        delta=delta,
        worst_support=worst,
        method="exhaustive",
        supports_checked=checked,
        total_supports=total,
        matrix_checksum=matrix_checksum(a),
        lower_bound=False,
    )


def randomized_ric(a: np.ndarray, s: int, trials: int, seed: int = 0) -> RicReport:
    """Lower bound on delta_s from uniformly sampled supports.

    When the number of distinct supports is small relative to trials,
    the sampler visits all of them with overwhelming probability and
    the bound is (almost surely) tight; the report still marks itself
    as a lower bound because no coverage proof is attached."""
    a = np.asarray(a, dtype=np.float64)
    cols = a.shape[1]
    if not 1 <= s <= cols:
        raise ValueError(f"s must lie in [1, {cols}], got {s}")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = trial_rng(seed)
    gram = a.T @ a

    def draw():
        remaining = trials
        while remaining > 0:
            m = min(remaining, _CHUNK)
            for _ in range(m):
                yield tuple(np.sort(rng.choice(cols, size=s, replace=False)))
            remaining -= m

    delta, worst, checked = _deviation_scan(gram, draw(), trials)
    return RicReport(
        s=s,
        delta=delta,
        worst_support=worst,
        method=f"randomized({trials})",
        supports_checked=checked,
        total_supports=support_count(cols, s),
        matrix_checksum=matrix_checksum(a),
        lower_bound=True,
    )


class CertStatus:
    CERTIFIED = "certified"
    REFUTED = "refuted"
    UNKNOWN = "unknown"


@dataclass
class CtCertificate:
    """Outcome of comparing delta_{2s} against sqrt(2) - 1.

    certified: the exact constant is at or below the threshold, so
    every s-sparse vector is the unique l1 minimizer of its own
    measurements.  refuted: the constant (or a lower bound on it)
    exceeds the threshold, so this sufficient condition fails; recovery
    itself may still succeed.  unknown: enumeration was over budget and
    the randomized lower bound did not reach the threshold."""

    s: int
    order: int
    threshold: float
    status: str
    report: RicReport

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "order": self.order,
            "threshold": self.threshold,
            "status": self.status,
            "report": self.report.as_dict(),
        }


def ct_certificate(
    a: np.ndarray,
    s: int,
    budget: int = 1_000_000,
    randomized_trials: int = 2000,
    seed: int = 0,
) -> CtCertificate:
    """Certify (or refute) the order-2s isometry condition for exact
    s-sparse l1 recovery."""
    a = np.asarray(a, dtype=np.float64)
    cols = a.shape[1]
    if not 1 <= 2 * s <= cols:
        raise ValueError(f"need 1 <= 2s <= cols, got s={s}, cols={cols}")
    order = 2 * s
    if support_count(cols, order) <= budget:
        report = exact_ric(a, order, budget=budget)
        status = CertStatus.CERTIFIED if report.delta <= CT_THRESHOLD else CertStatus.REFUTED
    else:
        report = randomized_ric(a, order, trials=randomized_trials, seed=seed)
        status = CertStatus.REFUTED if report.delta > CT_THRESHOLD else CertStatus.UNKNOWN
    return CtCertificate(
        s=s, order=order, threshold=CT_THRESHOLD, status=status, report=report
    )


@dataclass
class Prop1Result:
    """Fraction of random matrices meeting a target isometry constant.

    deltas holds delta_s per trial for row-normalized Gaussian
    matrices of shape n x N; success means delta_s <= delta."""

    n: int
    N: int
    s: int
    delta: float
    deltas: np.ndarray
    successes: int
    trials: int
    fraction: float
    wilson_low: float
    wilson_high: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "s": self.s,
            "delta": self.delta,
            "successes": self.successes,
            "trials": self.trials,
            "fraction": self.fraction,
            "wilson_low": self.wilson_low,
            "wilson_high": self.wilson_high,
        }


def ric_proposition_experiment(
    n: int,
    N: int,
    s: int,
    delta: float,
    trials: int,
    seed: int = 0,
    budget: int = 1_000_000,
) -> Prop1Result:
    """Estimate P(delta_s(A) <= delta) for A Gaussian n x N scaled by
    1/sqrt(n).

    The row count n is the experimental knob: as it grows toward the
    s * log(N/s) regime the success probability should climb toward
    one.  Enumeration is exact; the budget guard applies per trial."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    spec = EnsembleSpec(Distribution.GAUSSIAN, n, N, Normalization.INV_SQRT_ROWS)
    deltas = np.empty(trials)
    for t in range(trials):
        a = sample_matrix(spec, seed, t)
        deltas[t] = exact_ric(a, s, budget=budget).delta
    successes = int(np.count_nonzero(deltas <= delta))
    lo, hi = wilson_interval(successes, trials)
    return Prop1Result(
        n=n,
        N=N,
        s=s,
        delta=delta,
        deltas=deltas,
        successes=successes,
        trials=trials,
        fraction=successes / trials,
        wilson_low=lo,
        wilson_high=hi,
    )
