"""Experiment dispatch and deterministic output emission.

Every run produces the same three artifacts: a raw per-trial table, a
summary JSON, and a short text summary.  All of them are pure
functions of the configuration: values are printed at 17 significant
digits (exact for float64), records are ordered by trial then by
statistic name as produced, and nothing host- or time-dependent is
ever written.  Re-running a config must reproduce every byte.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import DecompositionModel, ExperimentConfig
from .ensembles import EnsembleSpec, sample_matrix, trial_rng
from .experiments import (
    berry_esseen_discrepancy,
    hyperplane_distance_experiment,
    rectangular_sv_experiment,
    sparse_minimum,
    square_sv_experiment,
    tail_curve,
)
from .geometry import (
    SparsityParams,
    coverage_certificate,
    covering_bounds,
    dist_to_sparse_sphere,
    net_to_csv,
    sample_sparse_unit,
    sample_unit_sphere,
    sparse_sphere_net,
    sphere_net,
    spread_coordinate_count,
    spread_profile,
)
from .linalg import largest_singular_value
from .recovery import recovery_experiment
from .ric import exact_ric, randomized_ric, ric_proposition_experiment
from .stats import lower_median, summarize

__all__ = [
    "TrialRecord",
    "RunResult",
    "records_to_csv",
    "records_to_json",
    "run_experiment",
    "resolve_out_dir",
    "write_outputs",
    "OUT_DIR_ENV",
]

OUT_DIR_ENV = "SPARSELAB_OUT"

CSV_HEADER = "experiment,N,n,trial,statistic,value,seed"


@dataclass(frozen=True)
class TrialRecord:
    experiment: str
    N: int
    n: int
    trial: int
    statistic: str
    value: float
    seed: int

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "N": self.N,
            "n": self.n,
            "trial": self.trial,
            "statistic": self.statistic,
            "value": self.value,
            "seed": self.seed,
        }


@dataclass
class RunResult:
    config: ExperimentConfig
    records: list[TrialRecord]
    summary: dict
    text: str
    extra_files: dict = field(default_factory=dict)  # filename -> content

    def summary_json(self) -> str:
        doc = {
            "experiment": self.config.experiment,
            "config": self.config.model_dump(mode="json"),
            "summary": self.summary,
        }
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def records_to_csv(records: list[TrialRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.experiment},{r.N},{r.n},{r.trial},{r.statistic},"
            f"{format(r.value, '.17g')},{r.seed}"
        )
    return "\n".join(lines) + "\n"


def records_to_json(records: list[TrialRecord]) -> str:
    return json.dumps([r.as_dict() for r in records], indent=2) + "\n"


def _spec(cfg: ExperimentConfig, rows: int, cols: int) -> EnsembleSpec:
    return EnsembleSpec(
        cfg.ensemble.distribution, rows, cols, cfg.ensemble.normalization
    )


def _params(model: DecompositionModel) -> SparsityParams:
    return SparsityParams(
        sparsity_fraction=model.sparsity_fraction,
        compressibility_radius=model.compressibility_radius,
        spread_level=model.spread_level,
        spread_fraction=model.spread_fraction,
    )


def _fmt(v: float) -> str:
    return format(float(v), ".6g")


# ---------------------------------------------------------------------------
# individual experiment runners


def _run_square_sv(cfg: ExperimentConfig) -> RunResult:
    spec = _spec(cfg, cfg.N, cfg.N)
    res = square_sv_experiment(spec, cfg.trials, cfg.seed, cfg.workers)
    records = []
    for t in range(cfg.trials):
        records.append(
            TrialRecord(cfg.experiment, cfg.N, cfg.N, t, "sqrtN_smin", float(res.values[t]), cfg.seed)
        )
        records.append(
            TrialRecord(cfg.experiment, cfg.N, cfg.N, t, "smax", float(res.largest[t]), cfg.seed)
        )
    root = math.sqrt(cfg.N)
    cond = res.largest * root / res.values
    summary = {
        "statistic": "sqrtN_smin",
        "scaled_smin": summarize(res.values).as_dict(),
        "median_smax": lower_median(res.largest),
        "median_condition_ratio": lower_median(cond),
    }
    text = "\n".join(
        [
            f"square-sv: N={cfg.N} ensemble={spec.distribution.value} trials={cfg.trials} seed={cfg.seed}",
            f"  median sqrt(N)*s_min = {_fmt(summary['scaled_smin']['median'])}",
            f"  IQR [{_fmt(summary['scaled_smin']['q1'])}, {_fmt(summary['scaled_smin']['q3'])}]",
            f"  median s_max = {_fmt(summary['median_smax'])}"
            f"  median condition ratio = {_fmt(summary['median_condition_ratio'])}",
        ]
    )
    return RunResult(cfg, records, summary, text)


def _run_rect_sv(cfg: ExperimentConfig) -> RunResult:
    spec = _spec(cfg, cfg.N, cfg.n)
    res = rectangular_sv_experiment(spec, cfg.trials, cfg.seed, cfg.workers)
    records = []
    for t in range(cfg.trials):
        records.append(
            TrialRecord(cfg.experiment, cfg.N, cfg.n, t, "smin_over_gap", float(res.values[t]), cfg.seed)
        )
        records.append(
            TrialRecord(cfg.experiment, cfg.N, cfg.n, t, "smax", float(res.largest[t]), cfg.seed)
        )
    summary = {
        "statistic": "smin_over_gap",
        "scaled_smin": summarize(res.values).as_dict(),
        "gap": math.sqrt(cfg.N) - math.sqrt(cfg.n - 1),
    }
    text = "\n".join(
        [
            f"rect-sv: N={cfg.N} n={cfg.n} ensemble={spec.distribution.value} trials={cfg.trials} seed={cfg.seed}",
            f"  median s_min / (sqrt(N)-sqrt(n-1)) = {_fmt(summary['scaled_smin']['median'])}",
            f"  IQR [{_fmt(summary['scaled_smin']['q1'])}, {_fmt(summary['scaled_smin']['q3'])}]",
        ]
    )
    return RunResult(cfg, records, summary, text)


def _run_tail_curve(cfg: ExperimentConfig) -> RunResult:
    spec = _spec(cfg, cfg.N, cfg.N)
    grid = cfg.eps_grid.values()
    res = tail_curve(spec, cfg.trials, grid, cfg.seed, cfg.workers)
    records = [
        TrialRecord(cfg.experiment, cfg.N, cfg.N, t, "sqrtN_smin", float(res.samples[t]), cfg.seed)
        for t in range(cfg.trials)
    ]
    summary = {
        "eps": res.eps,
        "prob": res.prob,
        "wilson_low": res.wilson_low,
        "wilson_high": res.wilson_high,
        "c_hat": res.c_hat,
        "fit_cutoff": res.fit_cutoff,
        "scaled_smin": summarize(res.samples).as_dict(),
    }
    mid = res.prob[np.searchsorted(res.eps, 0.5)] if res.eps[-1] >= 0.5 else res.prob[-1]
    text = "\n".join(
        [
            f"tail-curve: N={cfg.N} ensemble={spec.distribution.value} trials={cfg.trials} seed={cfg.seed}",
            f"  grid [{_fmt(res.eps[0])}, {_fmt(res.eps[-1])}] with {res.eps.size} points",
            f"  P(sqrt(N)*s_min < 0.5) ~ {_fmt(mid)}",
            f"  through-origin slope on eps <= {_fmt(res.fit_cutoff)}: {_fmt(res.c_hat)}",
        ]
    )
    return RunResult(cfg, records, summary, text)


def _run_ric_exact(cfg: ExperimentConfig) -> RunResult:
    spec = _spec(cfg, cfg.n, cfg.N)
    a = sample_matrix(spec, cfg.seed, 0)
    reports = [exact_ric(a, k, budget=cfg.budget) for k in range(1, cfg.s + 1)]
    rand_trials = cfg.support_trials if cfg.support_trials is not None else 10_000
    rand = randomized_ric(a, cfg.s, trials=rand_trials, seed=cfg.seed)
    records = [
        TrialRecord(cfg.experiment, cfg.N, cfg.n, 0, f"delta_{r.s}", r.delta, cfg.seed)
        for r in reports
    ]
    records.append(
        TrialRecord(cfg.experiment, cfg.N, cfg.n, 0, f"delta_{cfg.s}_randomized", rand.delta, cfg.seed)
    )
    summary = {
        "reports": [r.as_dict() for r in reports],
        "randomized": rand.as_dict(),
        "agreement_gap": reports[-1].delta - rand.delta,
    }
    text = "\n".join(
        [
            f"ric-exact: matrix {cfg.n}x{cfg.N} ensemble={spec.distribution.value} seed={cfg.seed}",
            "  "
            + "  ".join(f"delta_{r.s}={_fmt(r.delta)}" for r in reports),
            f"  randomized lower bound at s={cfg.s}: {_fmt(rand.delta)} "
            f"(gap {_fmt(summary['agreement_gap'])})",
        ]
    )
    extra = {f"{cfg.experiment}_report.json": reports[-1].to_json() + "\n"}
    return RunResult(cfg, records, summary, text, extra)


def _run_ric_prop1(cfg: ExperimentConfig) -> RunResult:
    res = ric_proposition_experiment(
        cfg.n, cfg.N, cfg.s, cfg.delta, cfg.trials, cfg.seed, budget=cfg.budget
    )
    records = [
        TrialRecord(cfg.experiment, cfg.N, cfg.n, t, "delta_s", float(res.deltas[t]), cfg.seed)
        for t in range(cfg.trials)
    ]
    summary = res.as_dict()
    summary["delta_stats"] = summarize(res.deltas).as_dict()
    text = "\n".join(
        [
            f"ric-prop1: n={cfg.n} N={cfg.N} s={cfg.s} target delta={_fmt(cfg.delta)} "
            f"trials={cfg.trials} seed={cfg.seed}",
            f"  P(delta_s <= delta) ~ {_fmt(res.fraction)} "
            f"(wilson [{_fmt(res.wilson_low)}, {_fmt(res.wilson_high)}])",
            f"  median delta_s = {_fmt(summary['delta_stats']['median'])}",
        ]
    )
    return RunResult(cfg, records, summary, text)


def _run_sparse_min(cfg: ExperimentConfig) -> RunResult:
    spec = _spec(cfg, cfg.N, cfg.N)
    a = sample_matrix(spec, cfg.seed, 0)
    params = _params(cfg.params)
    s = cfg.s if cfg.s is not None else params.sparsity_for(cfg.N)
    sm = sparse_minimum(a, s, budget=cfg.budget, support_trials=cfg.support_trials, seed=cfg.seed)
    op = largest_singular_value(a)
    bound = sm.value - params.compressibility_radius * op
    records = [
        TrialRecord(cfg.experiment, cfg.N, cfg.N, 0, "restricted_smin", sm.value, cfg.seed),
        TrialRecord(cfg.experiment, cfg.N, cfg.N, 0, "operator_norm", op, cfg.seed),
        TrialRecord(cfg.experiment, cfg.N, cfg.N, 0, "compressible_bound", bound, cfg.seed),
    ]
    summary = {
        "s": s,
        "restricted_smin": sm.value,
        "worst_support": list(sm.support),
        "exact": sm.exact,
        "supports_checked": sm.supports_checked,
        "total_supports": sm.total_supports,
        "operator_norm": op,
        "compressibility_radius": params.compressibility_radius,
        "compressible_bound": bound,
    }
    text = "\n".join(
        [
            f"sparse-min: matrix {cfg.N}x{cfg.N} ensemble={spec.distribution.value} s={s} seed={cfg.seed}",
            f"  min restricted s_min = {_fmt(sm.value)} "
            f"({'exact' if sm.exact else 'sampled'}, {sm.supports_checked} supports)",
            f"  operator norm = {_fmt(op)}",
            f"  compressible lower bound = {_fmt(bound)}",
        ]
    )
    return RunResult(cfg, records, summary, text)


def _run_hyperplane(cfg: ExperimentConfig) -> RunResult:
    spec = _spec(cfg, cfg.N, cfg.N)
    res = hyperplane_distance_experiment(spec, cfg.trials, cfg.seed, cfg.workers)
    records = [
        TrialRecord(cfg.experiment, cfg.N, cfg.N, t, "colspan_distance", float(v), cfg.seed)
        for t, v in enumerate(res.raw)
        if not math.isnan(v)
    ]
    summary = {
        "distances": summarize(res.values).as_dict(),
        "ks_half_normal": res.ks_half_normal,
        "skipped": res.skipped,
    }
    text = "\n".join(
        [
            f"hyperplane-dist: N={cfg.N} ensemble={spec.distribution.value} trials={cfg.trials} seed={cfg.seed}",
            f"  median distance = {_fmt(summary['distances']['median'])} (half-normal median 0.67449)",
            f"  KS distance to half-normal = {_fmt(res.ks_half_normal)}",
            f"  degenerate draws skipped: {res.skipped}",
        ]
    )
    return RunResult(cfg, records, summary, text)


def _run_berry_esseen(cfg: ExperimentConfig) -> RunResult:
    spec = _spec(cfg, cfg.N, cfg.N)
    res = berry_esseen_discrepancy(
        spec, cfg.trials, cfg.seed, cfg.workers, params=_params(cfg.params)
    )
    records = [
        TrialRecord(cfg.experiment, cfg.N, cfg.N, t, "normal_projection", float(v), cfg.seed)
        for t, v in enumerate(res.raw)
        if not math.isnan(v)
    ]
    summary = {
        "discrepancy": res.discrepancy,
        "ks_band95": res.ks_band95,
        "skipped": res.skipped,
        "incompressible_fraction": res.incompressible_fraction,
        "projections": summarize(res.samples).as_dict(),
    }
    text = "\n".join(
        [
            f"berry-esseen: N={cfg.N} ensemble={spec.distribution.value} trials={cfg.trials} seed={cfg.seed}",
            f"  sup-distance to standard normal = {_fmt(res.discrepancy)}"
            f" (95% KS band {_fmt(res.ks_band95)})",
            f"  unit normals incompressible: {_fmt(res.incompressible_fraction)}",
            f"  degenerate draws skipped: {res.skipped}",
        ]
    )
    return RunResult(cfg, records, summary, text)


def _run_net_bounds(cfg: ExperimentConfig) -> RunResult:
    probe_rng = trial_rng(cfg.seed, (1 << 63) + 1)  # disjoint from net streams
    if cfg.s is not None:
        net = sparse_sphere_net(
            cfg.N,
            cfg.s,
            cfg.eps,
            seed=cfg.seed,
            candidates_per_support=cfg.net_candidates,
            support_budget=cfg.budget,
        )
        probes = np.array(
            [sample_sparse_unit(probe_rng, cfg.N, cfg.s) for _ in range(cfg.probes)]
        )
        bounds = covering_bounds(cfg.N, cfg.eps, cfg.s)
    else:
        net = sphere_net(cfg.N, cfg.eps, seed=cfg.seed, candidates=cfg.net_candidates)
        probes = np.array([sample_unit_sphere(probe_rng, cfg.N) for _ in range(cfg.probes)])
        bounds = covering_bounds(cfg.N, cfg.eps)
    cert = coverage_certificate(net, probes)
    sep = net.min_pairwise_distance()
    records = [
        TrialRecord(cfg.experiment, cfg.N, cfg.s or cfg.N, 0, "net_size", float(net.size), cfg.seed),
        TrialRecord(cfg.experiment, cfg.N, cfg.s or cfg.N, 0, "coverage_max_distance", cert.max_distance, cfg.seed),
        TrialRecord(cfg.experiment, cfg.N, cfg.s or cfg.N, 0, "min_pairwise_distance",
                    sep if math.isfinite(sep) else -1.0, cfg.seed),
    ]
    summary = {
        "target": net.target,
        "eps": cfg.eps,
        "size": net.size,
        "separation": net.separation,
        "min_pairwise_distance": sep if math.isfinite(sep) else None,
        "coverage": {
            "probes": cert.probes,
            "max_distance": cert.max_distance,
            "mean_distance": cert.mean_distance,
            "ok": cert.ok,
        },
        "bounds": {
            "log_sphere": bounds.log_sphere,
            "log_sparse": bounds.log_sparse,
            "log_binom": bounds.log_binom,
            "log_binom_cap": bounds.log_binom_cap,
        },
    }
    text_lines = [
        f"net-bounds: {net.target} eps={_fmt(cfg.eps)} seed={cfg.seed}",
        f"  net size {net.size}, enforced separation {_fmt(net.separation)}",
        f"  coverage over {cert.probes} probes: max gap {_fmt(cert.max_distance)} "
        f"({'covered' if cert.ok else 'NOT covered'})",
        f"  log bound (sphere) = {_fmt(bounds.log_sphere)}",
    ]
    if bounds.log_sparse is not None:
        text_lines.append(f"  log bound (sparse) = {_fmt(bounds.log_sparse)}")
    extra = {f"{cfg.experiment}_net.csv": net_to_csv(net)}
    return RunResult(cfg, records, summary, "\n".join(text_lines), extra)


def _run_l1_recovery(cfg: ExperimentConfig) -> RunResult:
    res = recovery_experiment(
        cfg.n,
        cfg.N,
        cfg.s,
        cfg.trials,
        cfg.seed,
        distribution=cfg.ensemble.distribution,
    )
    records = [
        TrialRecord(cfg.experiment, cfg.N, cfg.n, r.trial, "rel_error", r.rel_error, cfg.seed)
        for r in res.records
    ]
    lines = ["trial,s,success,rel_error,solver_iterations"]
    for r in res.records:
        lines.append(
            f"{r.trial},{r.s},{int(r.success)},{format(r.rel_error, '.17g')},{r.iterations}"
        )
    summary = {
        "n": cfg.n,
        "cols": cfg.N,
        "s": cfg.s,
        "successes": res.successes,
        "trials": res.trials,
        "fraction": res.fraction,
        "wilson_low": res.wilson_low,
        "wilson_high": res.wilson_high,
    }
    text = "\n".join(
        [
            f"l1-recovery: n={cfg.n} N={cfg.N} s={cfg.s} trials={cfg.trials} seed={cfg.seed}",
            f"  exact recoveries: {res.successes}/{res.trials} "
            f"(wilson [{_fmt(res.wilson_low)}, {_fmt(res.wilson_high)}])",
        ]
    )
    extra = {f"{cfg.experiment}_recovery.csv": "\n".join(lines) + "\n"}
    return RunResult(cfg, records, summary, text, extra)


def _run_decomposition(cfg: ExperimentConfig) -> RunResult:
    params = _params(cfg.params)
    s = cfg.s if cfg.s is not None else params.sparsity_for(cfg.N)
    profile = spread_profile(params, cfg.N)
    records = []
    dists = np.empty(cfg.trials)
    counts = np.empty(cfg.trials)
    compressible = 0
    for t in range(cfg.trials):
        x = sample_unit_sphere(trial_rng(cfg.seed, t), cfg.N)
        d = dist_to_sparse_sphere(x, s)
        c = spread_coordinate_count(x, profile.nu)
        dists[t] = d
        counts[t] = c
        if d <= params.compressibility_radius:
            compressible += 1
        records.append(
            TrialRecord(cfg.experiment, cfg.N, s, t, "sparse_distance", float(d), cfg.seed)
        )
        records.append(
            TrialRecord(cfg.experiment, cfg.N, s, t, "spread_count", float(c), cfg.seed)
        )
    summary = {
        "s": s,
        "compressibility_radius": params.compressibility_radius,
        "fraction_compressible": compressible / cfg.trials,
        "profile": {"nu": profile.nu, "rho": profile.rho, "tail_mass": profile.tail_mass},
        "sparse_distance": summarize(dists).as_dict(),
        "spread_count": summarize(counts).as_dict(),
    }
    text = "\n".join(
        [
            f"decomposition: N={cfg.N} s={s} radius={_fmt(params.compressibility_radius)} "
            f"trials={cfg.trials} seed={cfg.seed}",
            f"  uniform sphere points compressible: {_fmt(summary['fraction_compressible'])}",
            f"  median distance to sparse sphere = {_fmt(summary['sparse_distance']['median'])}",
            f"  derived spread profile: nu={_fmt(profile.nu)} rho={_fmt(profile.rho)}",
        ]
    )
    return RunResult(cfg, records, summary, text)


_RUNNERS = {
    "square-sv": _run_square_sv,
    "rect-sv": _run_rect_sv,
    "tail-curve": _run_tail_curve,
    "ric-exact": _run_ric_exact,
    "ric-prop1": _run_ric_prop1,
    "sparse-min": _run_sparse_min,
    "hyperplane-dist": _run_hyperplane,
    "berry-esseen": _run_berry_esseen,
    "net-bounds": _run_net_bounds,
    "l1-recovery": _run_l1_recovery,
    "decomposition": _run_decomposition,
}


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run one configured experiment and build its outputs in memory."""
    return _RUNNERS[cfg.experiment](cfg)


def resolve_out_dir(cfg: ExperimentConfig, override=None) -> Path:
    """Output directory precedence: explicit override, then the config,
    then the environment, then the working directory."""
    if override is not None:
        return Path(override)
    if cfg.out is not None:
        return Path(cfg.out)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env)
    return Path(".")


def write_outputs(result: RunResult, out_dir=None) -> list[Path]:
    """Write the run artifacts and return their paths.

    The raw table is emitted as CSV, JSON or both according to the
    config; the summary JSON and the text summary are always written,
    as are experiment-specific extras (net points, recovery table)."""
    cfg = result.config
    base = resolve_out_dir(cfg, out_dir)
    base.mkdir(parents=True, exist_ok=True)
    name = cfg.experiment
    written: list[Path] = []

    def emit(fname: str, content: str) -> None:
        p = base / fname
        p.write_text(content)
        written.append(p)

    if cfg.format in ("csv", "both"):
        emit(f"{name}_samples.csv", records_to_csv(result.records))
    if cfg.format in ("json", "both"):
        emit(f"{name}_samples.json", records_to_json(result.records))
    emit(f"{name}_summary.json", result.summary_json())
    emit(f"{name}_summary.txt", result.text + "\n")
    for fname, content in sorted(result.extra_files.items()):
        emit(fname, content)
    return written
