"""Sparse-vector geometry on the unit sphere.

Three groups of tools live here:

  * head/tail splits, distance to the set of s-sparse unit vectors, and
    the compressible / incompressible dichotomy that distance induces;
  * samplers for the sphere, sparse vectors, and both halves of the
    dichotomy;
  * epsilon-nets of the sphere and of the sparse sphere, with coverage
    certificates and the counting bounds they are measured against.

Distance to the sparse sphere has a closed form: the nearest s-sparse
unit vector to a unit vector x is head_s(x) renormalized, giving

    dist(x, sparse sphere)^2 = 2 * (1 - ||head_s(x)||_2).

A brute-force version over all supports is kept for cross-checks.
"""

from __future__ import annotations

import enum
import io
import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ensembles import trial_rng
from .errors import BudgetExceededError

__all__ = [
    "SparsityParams",
    "VectorClass",
    "SpreadProfile",
    "head_tail_split",
    "dist_to_sparse_sphere",
    "brute_force_dist_to_sparse_sphere",
    "classify",
    "spread_coordinate_count",
    "spread_profile",
    "sample_unit_sphere",
    "sample_sparse_unit",
    "sample_compressible",
    "sample_incompressible",
    "EpsNet",
    "CoverageCertificate",
    "sphere_net",
    "sparse_sphere_net",
    "coverage_certificate",
    "CoveringBounds",
    "covering_bounds",
    "net_to_csv",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SparsityParams:
    """Constants of the sparse decomposition.

    sparsity_fraction        c0, sets s = floor(c0 * N)
    compressibility_radius   c', the distance cutoff between the
                             compressible and incompressible classes
    spread_level             nu, magnitude threshold nu/sqrt(N)
    spread_fraction          rho, required fraction of coordinates at
                             or above that threshold

    The default radius 0.2 keeps the compressible operator bound
    positive for Gaussian matrices at the default sparsity; 0.3 is
    already too generous there (the c' * ||A|| term swallows the whole
    sparse minimum).
    """

    sparsity_fraction: float = 0.1
    compressibility_radius: float = 0.2
    spread_level: float = 1.0
    spread_fraction: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 < self.sparsity_fraction < 1.0:
            raise ValueError(f"sparsity_fraction must be in (0,1), got {self.sparsity_fraction}")
        if not 0.0 < self.compressibility_radius <= _SQRT2:
            # sqrt(2) is allowed: it makes every unit vector compressible
            # and the operator bound vacuous, but the contract still holds
            raise ValueError(
                f"compressibility_radius must be in (0, sqrt(2)], got {self.compressibility_radius}"
            )
        if self.spread_level <= 0.0:
            raise ValueError(f"spread_level must be positive, got {self.spread_level}")
        if not 0.0 < self.spread_fraction < 1.0:
            raise ValueError(f"spread_fraction must be in (0,1), got {self.spread_fraction}")

    def sparsity_for(self, n: int) -> int:
        """s = floor(c0 * N); requires c0 * N >= 1 so that s >= 1."""
        s = int(math.floor(self.sparsity_fraction * n))
        if s < 1:
            raise ValueError(
                f"floor({self.sparsity_fraction} * {n}) < 1; increase N or the sparsity fraction"
            )
        return s


class VectorClass(str, enum.Enum):
    COMPRESSIBLE = "compressible"
    INCOMPRESSIBLE = "incompressible"


def _check_unit(x: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    nrm = float(np.linalg.norm(x))
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"expected a unit vector, got norm {nrm!r}")
    return x


def head_tail_split(x, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Split x into (head, tail): head keeps the s largest-magnitude
    coordinates, tail the rest, head + tail == x exactly.

    Ties in magnitude break toward the smaller index, so the split is a
    deterministic function of the input."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    n = x.shape[0]
    if not 0 <= s <= n:
        raise ValueError(f"s must lie in [0, {n}], got {s}")
    # lexsort: primary key -|x| (descending magnitude), secondary key index
    order = np.lexsort((np.arange(n), -np.abs(x)))
    head = np.zeros_like(x)
    keep = order[:s]
    head[keep] = x[keep]
    return head, x - head


def dist_to_sparse_sphere(x, s: int) -> float:
    """Distance from a unit vector to the set of s-sparse unit vectors.

    Closed form sqrt(2 * (1 - ||head_s(x)||)); the minimizer is the
    renormalized head.  Always in [0, sqrt(2)]."""
    x = _check_unit(x)
    if s < 1:
        raise ValueError(f"s must be at least 1, got {s}")
    head, tail = head_tail_split(x, min(s, x.shape[0]))
    if not np.any(tail):
        # x is itself s-sparse; the sqrt would otherwise turn unit-norm
        # rounding of order eps into an answer of order sqrt(eps)
        return 0.0
    h = float(np.linalg.norm(head))
    return math.sqrt(max(2.0 * (1.0 - h), 0.0))


def brute_force_dist_to_sparse_sphere(x, s: int) -> float:
    """Same quantity by explicit minimization over every support.

    For each support T the nearest unit vector supported on T is
    x_T / ||x_T|| (or an arbitrary unit vector when x_T = 0).  Only
    usable for small N; this exists to cross-check the closed form."""
    x = _check_unit(x)
    n = x.shape[0]
    if s < 1:
        raise ValueError(f"s must be at least 1, got {s}")
    s = min(s, n)
    if math.comb(n, s) > 200_000:
        raise BudgetExceededError(f"C({n},{s}) supports is too many to enumerate")
    best = math.inf
    for t in itertools.combinations(range(n), s):
        y = np.zeros(n)
        xt = x[list(t)]
        nt = float(np.linalg.norm(xt))
        if nt > 0.0:
            y[list(t)] = xt / nt
        else:
            y[t[0]] = 1.0
        best = min(best, float(np.linalg.norm(x - y)))
    return best


def classify(x, params: SparsityParams, s: Optional[int] = None) -> VectorClass:
    """Compressible iff within compressibility_radius of the s-sparse
    sphere; s defaults to floor(c0 * N)."""
    x = _check_unit(x)
    if s is None:
        s = params.sparsity_for(x.shape[0])
    d = dist_to_sparse_sphere(x, s)
    if d <= params.compressibility_radius:
        return VectorClass.COMPRESSIBLE
    return VectorClass.INCOMPRESSIBLE


def spread_coordinate_count(x, nu: float) -> int:
    """Number of coordinates with |x_k| >= nu / sqrt(N)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if nu <= 0.0:
        raise ValueError(f"nu must be positive, got {nu}")
    return int(np.count_nonzero(np.abs(x) >= nu / math.sqrt(x.shape[0])))


@dataclass(frozen=True)
class SpreadProfile:
    nu: float
    rho: float
    tail_mass: float  # lower bound on ||tail||^2 for incompressible x


def spread_profile(params: SparsityParams, n: int) -> SpreadProfile:
    """Spread level and fraction guaranteed for every incompressible
    unit vector at dimension n.

    Incompressibility gives ||head|| < 1 - c'^2/2 =: beta, hence
    ||tail||^2 > 1 - beta^2 =: m.  Tail coordinates are each at most
    1/sqrt(s) in magnitude, and the coordinates below nu/sqrt(N)
    carry at most nu^2 of mass in total, so with nu = sqrt(m/2) at
    least s*m/2 coordinates sit at or above nu/sqrt(N):

        count >= s*m/2  =  rho * N   with   rho = s*m/(2N).
    """
    s = params.sparsity_for(n)
    c = params.compressibility_radius
    beta = 1.0 - c * c / 2.0
    mass = 1.0 - beta * beta  # = c^2 (1 - c^2/4), in (0, 1)
    nu = math.sqrt(mass / 2.0)
    rho = s * mass / (2.0 * n)
    return SpreadProfile(nu=nu, rho=rho, tail_mass=mass)


# ---------------------------------------------------------------------------
# samplers


def sample_unit_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform point on the unit sphere of R^n."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    while True:
        g = rng.standard_normal(n)
        nrm = float(np.linalg.norm(g))
        if nrm > 1e-12:
            return g / nrm


def sample_sparse_unit(rng: np.random.Generator, n: int, s: int) -> np.ndarray:
    """Unit vector with a uniformly random support of size s and
    spherically uniform coefficients on it."""
    if not 1 <= s <= n:
        raise ValueError(f"s must lie in [1, {n}], got {s}")
    support = np.sort(rng.choice(n, size=s, replace=False))
    x = np.zeros(n)
    x[support] = sample_unit_sphere(rng, s)
    return x


def sample_compressible(
    rng: np.random.Generator, n: int, params: SparsityParams, s: Optional[int] = None
) -> np.ndarray:
    """Compressible unit vector: a sparse unit vector plus a small
    dense perturbation, renormalized.

    The perturbation norm is capped at 0.49 * c'; after projecting back
    to the sphere the distance to the sparse sphere is at most twice
    that, hence strictly below c'.  Rejection from the uniform sphere
    is hopeless here: at moderate N a uniform point is essentially
    never compressible."""
    if s is None:
        s = params.sparsity_for(n)
    x0 = sample_sparse_unit(rng, n, s)
    w = rng.standard_normal(n)
    w *= (0.49 * params.compressibility_radius * rng.uniform()) / float(np.linalg.norm(w))
    x = x0 + w
    x /= float(np.linalg.norm(x))
    if classify(x, params, s) is not VectorClass.COMPRESSIBLE:
        raise RuntimeError("constructed vector failed the compressibility check")
    return x


def sample_incompressible(
    rng: np.random.Generator,
    n: int,
    params: SparsityParams,
    s: Optional[int] = None,
    max_tries: int = 1000,
) -> np.ndarray:
    """Incompressible unit vector by rejection from the uniform sphere.

    At the default parameters nearly every uniform point qualifies, so
    the expected number of tries is close to one."""
    if s is None:
        s = params.sparsity_for(n)
    for _ in range(max_tries):
        x = sample_unit_sphere(rng, n)
        if classify(x, params, s) is VectorClass.INCOMPRESSIBLE:
            return x
    raise RuntimeError(f"no incompressible sample in {max_tries} tries")


# ---------------------------------------------------------------------------
# nets


@dataclass
class EpsNet:
    """A finite subset of a sphere (or sparse sphere) built greedily.

    points keeps one unit vector per row.  separation is the enforced
    minimum pairwise distance (strictly greater than this value); it is
    half the covering radius by default, which over-populates the net
    slightly but guarantees the greedy construction cannot jam below
    the covering density it is meant to certify."""

    points: np.ndarray
    radius: float
    separation: float
    target: str
    candidates: int
    seed: int

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def min_pairwise_distance(self) -> float:
        k = self.size
        if k < 2:
            return math.inf
        g = self.points @ self.points.T
        sq = np.maximum(2.0 - 2.0 * g, 0.0)
        np.fill_diagonal(sq, np.inf)
        return float(math.sqrt(np.min(sq)))


def _greedy_keep(
    candidates: np.ndarray, sep: float, kept: list[np.ndarray], extra: Optional[np.ndarray]
) -> None:
    """Append to kept every candidate farther than sep from all points
    already in kept and from every row of extra."""
    sep2 = sep * sep
    for x in candidates:
        if extra is not None and extra.shape[0]:
            d2 = np.sum((extra - x) ** 2, axis=1)
            if float(np.min(d2)) <= sep2:
                continue
        ok = True
        for y in kept:
            d = x - y
            if float(d @ d) <= sep2:
                ok = False
                break
        if ok:
            kept.append(x)


def sphere_net(
    n: int,
    eps: float,
    seed: int = 0,
    candidates: int = 2000,
    separation_factor: float = 0.5,
) -> EpsNet:
    """Greedy net of the unit sphere of R^n at radius eps.

    Draws uniform candidates and keeps those farther than
    separation_factor * eps from every kept point.  The kept set is
    maximal over the candidate cloud, so it covers the cloud at the
    separation radius; with the default factor 1/2 that leaves a full
    eps/2 margin toward covering the sphere itself."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if not 0.0 < eps <= 2.0:
        raise ValueError(f"eps must lie in (0, 2], got {eps}")
    if candidates < 1:
        raise ValueError("need at least one candidate")
    if not 0.0 < separation_factor <= 1.0:
        raise ValueError(f"separation_factor must lie in (0, 1], got {separation_factor}")
    rng = trial_rng(seed)
    cloud = np.empty((candidates, n))
    for i in range(candidates):
        cloud[i] = sample_unit_sphere(rng, n)
    kept: list[np.ndarray] = []
    _greedy_keep(cloud, separation_factor * eps, kept, None)
    return EpsNet(
        points=np.array(kept),
        radius=eps,
        separation=separation_factor * eps,
        target=f"sphere(dim={n})",
        candidates=candidates,
        seed=seed,
    )


def sparse_sphere_net(
    n: int,
    s: int,
    eps: float,
    seed: int = 0,
    candidates_per_support: int = 800,
    separation_factor: float = 0.5,
    support_budget: int = 1_000_000,
) -> EpsNet:
    """Greedy net of the s-sparse unit vectors in R^n.

    Walks supports in lexicographic order; each support gets its own
    stream keyed by (seed, support index), so the construction does not
    depend on traversal order.  Candidates are screened against the
    points of earlier supports too (only those lying within sep of the
    current coordinate subspace can possibly collide, which keeps the
    cross-support check cheap), so the separation guarantee holds
    across the whole net, not just within a support block."""
    if not 1 <= s <= n // 2:
        raise ValueError(f"s must lie in [1, n/2] = [1, {n // 2}], got {s}")
    if not 0.0 < eps <= 2.0:
        raise ValueError(f"eps must lie in (0, 2], got {eps}")
    if not 0.0 < separation_factor <= 1.0:
        raise ValueError(f"separation_factor must lie in (0, 1], got {separation_factor}")
    n_supports = math.comb(n, s)
    if n_supports > support_budget:
        raise BudgetExceededError(
            f"C({n},{s}) = {n_supports} supports exceeds budget {support_budget}"
        )
    sep = separation_factor * eps
    all_points: list[np.ndarray] = []
    for j, t in enumerate(itertools.combinations(range(n), s)):
        rng = trial_rng(seed, j)
        idx = np.array(t)
        # points from earlier supports can collide only if nearly all of
        # their mass already sits on the current support's coordinates
        if all_points:
            done = np.array(all_points)
            out = np.delete(done, idx, axis=1)
            near = done[np.sum(out * out, axis=1) < sep * sep]
        else:
            near = np.empty((0, n))
        local: list[np.ndarray] = []
        for _ in range(candidates_per_support):
            c = np.zeros(n)
            c[idx] = sample_unit_sphere(rng, s)
            sep2 = sep * sep
            if near.shape[0]:
                d2 = np.sum((near - c) ** 2, axis=1)
                if float(np.min(d2)) <= sep2:
                    continue
            ok = True
            for y in local:
                d = c - y
                if float(d @ d) <= sep2:
                    ok = False
                    break
            if ok:
                local.append(c)
        all_points.extend(local)
    return EpsNet(
        points=np.array(all_points),
        radius=eps,
        separation=sep,
        target=f"sparse-sphere(dim={n}, s={s})",
        candidates=n_supports * candidates_per_support,
        seed=seed,
    )


@dataclass
class CoverageCertificate:
    probes: int
    radius: float
    max_distance: float
    mean_distance: float
    ok: bool


def coverage_certificate(net: EpsNet, probes: np.ndarray) -> CoverageCertificate:
    """Check that every probe point lies within the net's radius of
    some net point.  Probes are expected to lie on the net's target
    set; the certificate is a Monte Carlo statement about that set."""
    probes = np.asarray(probes, dtype=np.float64)
    if probes.ndim != 2 or probes.shape[1] != net.dim:
        raise ValueError(f"probes must be (k, {net.dim}), got {probes.shape}")
    pts = net.points
    pts_sq = np.sum(pts * pts, axis=1)
    worst = 0.0
    total = 0.0
    chunk = 2048
    for lo in range(0, probes.shape[0], chunk):
        p = probes[lo : lo + chunk]
        d2 = (
            np.sum(p * p, axis=1)[:, None]
            - 2.0 * (p @ pts.T)
            + pts_sq[None, :]
        )
        # the Gram expansion locates the nearest point but carries
        # cancellation noise of order eps; recompute the winner directly
        near = np.argmin(d2, axis=1)
        dmin = np.linalg.norm(p - pts[near], axis=1)
        worst = max(worst, float(np.max(dmin)))
        total += float(np.sum(dmin))
    return CoverageCertificate(
        probes=int(probes.shape[0]),
        radius=net.radius,
        max_distance=worst,
        mean_distance=total / probes.shape[0],
        ok=worst <= net.radius,
    )


@dataclass(frozen=True)
class CoveringBounds:
    """Log-scale covering number bounds at radius eps.

    log_sphere        full sphere of R^n:        n * log(3/eps)
    log_sparse        s-sparse unit vectors:     log C(n,s) + s * log(3/eps)
    log_binom         log C(n,s)
    log_binom_cap     the cap  log C(n,s) <= s * log(e*n/s)

    The point of keeping logs is that the full-sphere count is
    astronomically larger than the sparse count as soon as s << n;
    linear values are exposed where they fit in a float."""

    dim: int
    s: Optional[int]
    eps: float
    log_sphere: float
    log_sparse: Optional[float]
    log_binom: Optional[float]
    log_binom_cap: Optional[float]

    @staticmethod
    def _lin(logv: Optional[float]) -> Optional[float]:
        if logv is None:
            return None
        if logv > 700.0:
            return math.inf
        return math.exp(logv)

    @property
    def sphere(self) -> float:
        return self._lin(self.log_sphere)

    @property
    def sparse(self) -> Optional[float]:
        return self._lin(self.log_sparse)


def covering_bounds(n: int, eps: float, s: Optional[int] = None) -> CoveringBounds:
    """Volumetric covering bounds for the sphere and, when s is given,
    the s-sparse sphere."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if not 0.0 < eps <= 2.0:
        raise ValueError(f"eps must lie in (0, 2], got {eps}")
    log_ratio = math.log(3.0 / eps)
    log_sphere = n * log_ratio
    log_sparse = log_binom = log_cap = None
    if s is not None:
        if not 1 <= s <= n:
            raise ValueError(f"s must lie in [1, {n}], got {s}")
        log_binom = math.lgamma(n + 1) - math.lgamma(s + 1) - math.lgamma(n - s + 1)
        log_sparse = log_binom + s * log_ratio
        log_cap = s * (1.0 + math.log(n / s))
    return CoveringBounds(
        dim=n,
        s=s,
        eps=eps,
        log_sphere=log_sphere,
        log_sparse=log_sparse,
        log_binom=log_binom,
        log_binom_cap=log_cap,
    )


def net_to_csv(net: EpsNet) -> str:
    """CSV text of the net, one unit vector per row, 17 significant
    digits so a round trip through text is exact."""
    buf = io.StringIO()
    buf.write(",".join(f"x{j}" for j in range(net.dim)) + "\n")
    for row in net.points:
        buf.write(",".join(format(v, ".17g") for v in row) + "\n")
    return buf.getvalue()
