"""Configurable Monte Carlo validation runs.

A run is described by one JSON document (see :class:`ExperimentConfig`).
Replicas are simulated on a thread pool, but per-replica statistics are
reduced in replica-index order, so summaries do not depend on the number
of workers. Each run writes ``summary.csv`` (one row per checked quantity)
and ``manifest.json`` into its output directory.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import closed_forms as cf
from .diagram_metrics import (
    Diagram,
    bottleneck,
    brute_force_bottleneck,
    brute_force_wasserstein,
    distance,
    pers_p_measure,
    wasserstein_p,
)
from .discretization import brownian_extremum_gap
from .errors import ConfigError, InvalidParameterError, PathZetaError
from .estimation import (
    ReplicaSample,
    bootstrap_test,
    choose_scale,
    count_matrix,
    estimate_alpha,
    estimate_alpha_corrected,
    scales,
)
from .persistence_core import (
    count_bars_geq,
    count_bars_geq_many,
    count_bars_updown,
    count_rectangle,
    count_upcrossings,
    mellin_count_integral,
    pers_p,
    superlevel_barcode,
)
from .process_sim import (
    SeedSpec,
    simulate_alpha_stable,
    simulate_brownian,
    simulate_drift,
    simulate_ou,
    simulate_reflected,
)
from .special_functions import EvalPolicy

OUTPUT_ENV = "PATHZETA_OUTPUT_DIR"
DEFAULT_OUTPUT = "pathzeta-output"

KINDS = (
    "validate-bm",
    "validate-reflected",
    "validate-drift",
    "validate-ou",
    "estimate-alpha",
    "wasserstein-suite",
    "oracle-suite",
)

_DEFAULTS: dict[str, dict[str, Any]] = {
    "validate-bm": {"n": 2**15, "t": 1.0, "M": 400, "eps_grid": [0.05, 0.1, 0.2]},
    "validate-reflected": {"n": 2**15, "t": 1.0, "M": 1000, "local_grid": [[0.5, 0.1]]},
    "validate-drift": {"n": 2**18, "t": 200.0, "M": 1000, "local_grid": [[1.0, 0.5]],
                       "process": {"mu": 1.0, "sigma": 1.0}},
    "validate-ou": {"n": 2**18, "t": 1.0, "M": 1000, "eps_grid": [0.01],
                    "process": {"theta": 1.0, "sigma": 1.0, "x0": 0.0}},
    "estimate-alpha": {"n": 2**16, "t": 1.0, "M": 200, "process": {"alpha": 2.0}},
    "wasserstein-suite": {"M": 500},
    "oracle-suite": {"M": 1000},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One validation experiment.

    ``eps_grid`` drives global counts N^eps (or 2 eps N^{0,eps} for OU);
    ``local_grid`` holds (x, eps) pairs for N^{x,x+eps}; ``range_grid`` and
    ``survival_grid`` ((k, eps) pairs) add range-law and bar-length rows.
    """

    kind: str
    seed: int = 0
    n: int = 2**15
    t: float = 1.0
    M: int = 400
    eps_grid: tuple[float, ...] = ()
    local_grid: tuple[tuple[float, float], ...] = ()
    range_grid: tuple[float, ...] = ()
    survival_grid: tuple[tuple[int, float], ...] = ()
    process: dict = field(default_factory=dict)
    output: str | None = None
    workers: int = 1
    z_threshold: float = 3.0
    correct_sampling: bool = True
    tolerances: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        kind = doc.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"field 'kind': expected one of {', '.join(KINDS)}, got {kind!r}")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
        merged = {**_DEFAULTS[kind], **doc}
        merged["process"] = {**_DEFAULTS[kind].get("process", {}), **doc.get("process", {})}
        try:
            cfg = cls(
                kind=kind,
                seed=_int(merged, "seed", 0),
                n=_int(merged, "n", 2**15),
                t=_float(merged, "t", 1.0),
                M=_int(merged, "M", 400),
                eps_grid=tuple(float(e) for e in merged.get("eps_grid", ())),
                local_grid=tuple((float(x), float(e)) for x, e in merged.get("local_grid", ())),
                range_grid=tuple(float(e) for e in merged.get("range_grid", ())),
                survival_grid=tuple((int(k), float(e)) for k, e in merged.get("survival_grid", ())),
                process={k: float(v) if v is not None else None for k, v in merged["process"].items()},
                output=merged.get("output"),
                workers=_int(merged, "workers", 1),
                z_threshold=_float(merged, "z_threshold", 3.0),
                correct_sampling=bool(merged.get("correct_sampling", True)),
                tolerances=dict(merged.get("tolerances", {})),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed grid or process field: {exc}") from None
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
        return cls.from_dict(doc)

    def validate(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ConfigError("field 'seed': must be a 64-bit unsigned integer")
        if self.M < 1:
            raise ConfigError("field 'M': must be >= 1")
        if self.workers < 1:
            raise ConfigError("field 'workers': must be >= 1")
        if self.n < 1:
            raise ConfigError("field 'n': must be >= 1")
        if not (math.isfinite(self.t) and self.t > 0):
            raise ConfigError("field 't': must be positive")
        if not self.z_threshold > 0:
            raise ConfigError("field 'z_threshold': must be positive")
        for e in self.eps_grid + tuple(e for _, e in self.local_grid) + self.range_grid:
            if not e > 0:
                raise ConfigError("grids: every eps must be positive")
        if self.kind in ("validate-bm", "validate-reflected"):
            if not (self.eps_grid or self.local_grid or self.range_grid or self.survival_grid):
                raise ConfigError("grids: at least one of eps_grid, local_grid, range_grid, survival_grid must be nonempty")
            if any(x < 0 for x, _ in self.local_grid):
                raise ConfigError("field 'local_grid': levels x must be >= 0")
        if self.kind == "validate-reflected" and (self.range_grid or self.survival_grid):
            raise ConfigError("validate-reflected supports eps_grid and local_grid only")
        if self.kind == "validate-bm" and any(k not in (2, 3, 4) for k, _ in self.survival_grid):
            raise ConfigError("field 'survival_grid': k must be 2, 3 or 4")
        if self.kind == "validate-drift":
            if not self.local_grid:
                raise ConfigError("field 'local_grid': must be nonempty")
            if self.process.get("sigma", 1.0) != 1.0:
                raise ConfigError("field 'process.sigma': the ray formula is validated for sigma = 1 only")
            if not self.process.get("mu", 0) > 0:
                raise ConfigError("field 'process.mu': must be positive")
            if any(x <= 0 for x, _ in self.local_grid):
                raise ConfigError("field 'local_grid': levels x must be > 0")
        if self.kind == "validate-ou":
            if not self.eps_grid:
                raise ConfigError("field 'eps_grid': must be nonempty")
            for k in ("theta", "sigma"):
                if not self.process.get(k, 0) > 0:
                    raise ConfigError(f"field 'process.{k}': must be positive")
            if self.process.get("x0", 0.0) != 0.0:
                raise ConfigError("field 'process.x0': the local-time series assumes a start at 0")
        if self.kind == "estimate-alpha":
            a = self.process.get("alpha")
            if a is None or not 0 < a <= 2:
                raise ConfigError("field 'process.alpha': must lie in (0, 2]")
            if self.M < 2:
                raise ConfigError("field 'M': the estimator needs M >= 2")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["eps_grid"] = list(self.eps_grid)
        d["local_grid"] = [list(p) for p in self.local_grid]
        d["range_grid"] = list(self.range_grid)
        d["survival_grid"] = [list(p) for p in self.survival_grid]
        return d


def _int(doc: dict, key: str, default: int) -> int:
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"field '{key}': expected an integer, got {v!r}")
    return int(v)


def _float(doc: dict, key: str, default: float) -> float:
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"field '{key}': expected a number, got {v!r}")
    return float(v)


# --- summaries ------------------------------------------------------------


@dataclass(frozen=True)
class McSummary:
    quantity: str
    x: float
    eps: float
    M: int
    mean: float
    variance: float
    se: float
    target: float
    z: float
    allowance: float
    passed: bool

    @classmethod
    def from_samples(cls, quantity: str, samples: np.ndarray, target: float, z_threshold: float,
                     x: float = math.nan, eps: float = math.nan, allowance: float = 0.0) -> "McSummary":
        samples = np.asarray(samples, dtype=np.float64)
        M = samples.size
        mean = math.fsum(samples.tolist()) / M
        var = math.fsum(((samples - mean) ** 2).tolist()) / (M - 1) if M > 1 else 0.0
        se = math.sqrt(var / M)
        diff = mean - target
        z = diff / se if se > 0 else (0.0 if diff == 0 else math.copysign(math.inf, diff))
        passed = abs(diff) <= z_threshold * se + allowance
        return cls(quantity, x, eps, M, mean, var, se, target, z, allowance, bool(passed))

    @classmethod
    def exact(cls, quantity: str, value: float, target: float, M: int, tol: float = 0.0,
              x: float = math.nan, eps: float = math.nan) -> "McSummary":
        """Deterministic check: |value - target| <= tol. No standard error, so z is NaN."""
        diff = value - target
        return cls(quantity, x, eps, M, float(value), 0.0, 0.0, float(target),
                   math.nan, tol, bool(abs(diff) <= tol))


SUMMARY_HEADER = "quantity,x,eps,M,mean,variance,se,target,z,allowance,passed"


def _fmt(v: float) -> str:
    return "" if isinstance(v, float) and math.isnan(v) else f"{v:.17g}"


def summaries_to_csv(rows: list[McSummary]) -> str:
    out = [SUMMARY_HEADER]
    for r in rows:
        out.append(",".join([
            r.quantity, _fmt(r.x), _fmt(r.eps), str(r.M), _fmt(r.mean), _fmt(r.variance), _fmt(r.se),
            _fmt(r.target), _fmt(r.z), _fmt(r.allowance), "true" if r.passed else "false",
        ]))
    return "\n".join(out) + "\n"


def _policy(cfg: "ExperimentConfig") -> EvalPolicy:
    tol = cfg.tolerances
    try:
        return EvalPolicy(tol=float(tol.get("series_tol", 1e-12)),
                          max_terms=int(tol.get("series_max_terms", 1_000_000)))
    except InvalidParameterError as exc:
        raise ConfigError(f"field 'tolerances': {exc}") from None


def _target(fn: Callable[..., float], *args: float, policy: EvalPolicy | None = None) -> float:
    """Evaluate a closed form, naming the grid point if it fails."""
    try:
        return fn(*args) if policy is None else fn(*args, policy=policy)
    except PathZetaError as exc:
        raise type(exc)(f"{fn.__name__}{args}: {exc}") from exc


# --- replica machinery ----------------------------------------------------


def map_replicas(fn: Callable[[int], np.ndarray], M: int, workers: int = 1) -> np.ndarray:
    """Stack fn(0), ..., fn(M-1) in index order, optionally on a thread pool."""
    if workers <= 1:
        return np.array([fn(r) for r in range(M)])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(fn, range(M))))


@dataclass(frozen=True)
class RunResult:
    rows: list[McSummary]
    passed: bool
    extra: dict = field(default_factory=dict)


def _brownian_like(cfg: ExperimentConfig, reflected: bool) -> RunResult:
    n, t = cfg.n, cfg.t
    sim = simulate_reflected if reflected else simulate_brownian
    shift = 2.0 * brownian_extremum_gap(t / n) if cfg.correct_sampling else 0.0
    eps = np.array(cfg.eps_grid)
    for e in list(cfg.eps_grid) + [e for _, e in cfg.local_grid] + list(cfg.range_grid) + [e for _, e in cfg.survival_grid]:
        if e <= shift:
            raise ConfigError(f"grids: eps={e} is below the sampling shift {shift:.3g}; increase n")

    need_barcode = bool(cfg.eps_grid or cfg.range_grid or cfg.survival_grid)

    def replica(r: int) -> np.ndarray:
        path = sim(t, n, SeedSpec(cfg.seed, r))
        bc = superlevel_barcode(path) if need_barcode else None
        out = []
        if eps.size:
            out.extend(count_bars_geq_many(bc, eps - shift).tolist())
        for x, e in cfg.local_grid:
            out.append(count_upcrossings(path, x + shift / 2.0, e - shift))
        for e in cfg.range_grid:
            out.append(1.0 if bc.range >= e - shift else 0.0)
        for k, e in cfg.survival_grid:
            out.append(1.0 if count_bars_geq(bc, e - shift) >= k else 0.0)
        return np.array(out, dtype=np.float64)

    pol = _policy(cfg)
    nveps = cf.expected_nveps_reflected if reflected else cf.expected_nveps_bm
    nxx = cf.expected_nxxeps_reflected if reflected else cf.expected_nxxeps_bm
    # targets first, so a failing closed form stops the run before simulating
    specs = [("N_eps", math.nan, e, _target(nveps, e, t, policy=pol)) for e in cfg.eps_grid]
    specs += [("N_x_eps", x, e, _target(nxx, x, e, t, policy=pol)) for x, e in cfg.local_grid]
    specs += [("P_range_geq", math.nan, e, _target(cf.prob_range_geq, e, t, policy=pol)) for e in cfg.range_grid]
    specs += [(f"P_bar{k}_geq", math.nan, e, _target(cf.bar_length_survival_bm, k, e, t, policy=pol))
              for k, e in cfg.survival_grid]
    data = map_replicas(replica, cfg.M, cfg.workers)
    rows = [McSummary.from_samples(name, data[:, i], target, cfg.z_threshold, x=x, eps=e)
            for i, (name, x, e, target) in enumerate(specs)]
    return RunResult(rows, all(r.passed for r in rows))


def _drift(cfg: ExperimentConfig) -> RunResult:
    mu = cfg.process["mu"]
    shift = 2.0 * brownian_extremum_gap(cfg.t / cfg.n) if cfg.correct_sampling else 0.0

    def replica(r: int) -> np.ndarray:
        path = simulate_drift(mu, 1.0, cfg.t, cfg.n, SeedSpec(cfg.seed, r))
        # the ray formula counts finite bars only
        return np.array([count_upcrossings(path, x + shift / 2.0, e - shift, include_infinite=False)
                         for x, e in cfg.local_grid], dtype=np.float64)

    data = map_replicas(replica, cfg.M, cfg.workers)
    rows = [
        McSummary.from_samples("N_x_eps_finite", data[:, i], _target(cf.expected_nxxeps_drift_ray, mu, e), cfg.z_threshold, x=x, eps=e)
        for i, (x, e) in enumerate(cfg.local_grid)
    ]
    return RunResult(rows, all(r.passed for r in rows))


def _ou(cfg: ExperimentConfig) -> RunResult:
    theta, sigma = cfg.process["theta"], cfg.process["sigma"]
    shift = 2.0 * brownian_extremum_gap(cfg.t / cfg.n, sigma) if cfg.correct_sampling else 0.0
    target = _target(cf.expected_local_time_ou_zero, theta, sigma, cfg.t, policy=_policy(cfg))
    bias_factor = float(cfg.tolerances.get("eps_bias_factor", 2.0))

    def replica(r: int) -> np.ndarray:
        path = simulate_ou(theta, sigma, 0.0, cfg.t, cfg.n, SeedSpec(cfg.seed, r))
        return np.array([2.0 * e * count_upcrossings(path, shift / 2.0, e - shift) for e in cfg.eps_grid])

    data = map_replicas(replica, cfg.M, cfg.workers)
    rows = [
        McSummary.from_samples("local_time_0", data[:, i], target, cfg.z_threshold, x=0.0, eps=e,
                               allowance=bias_factor * e)
        for i, e in enumerate(cfg.eps_grid)
    ]
    return RunResult(rows, all(r.passed for r in rows))


def _estimate(cfg: ExperimentConfig) -> RunResult:
    alpha = cfg.process["alpha"]
    if cfg.eps_grid:
        eps, c = cfg.eps_grid[0], float(cfg.process.get("c") or 2.0)
    else:
        eps, c = choose_scale(cfg.n, alpha, kappa=float(cfg.process.get("kappa") or 20.0),
                              c=float(cfg.process.get("c") or 2.0))
    floor = scales(eps, c)[0] / 4.0

    def replica(r: int) -> ReplicaSample:
        seed = SeedSpec(cfg.seed, r)
        path = simulate_brownian(cfg.t, cfg.n, seed) if alpha == 2.0 else simulate_alpha_stable(alpha, cfg.t, cfg.n, seed)
        return ReplicaSample.from_path(path, floor)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            samples = list(pool.map(replica, range(cfg.M)))
    else:
        samples = [replica(r) for r in range(cfg.M)]
    if cfg.correct_sampling:
        est = estimate_alpha_corrected(samples, eps, c)
    else:
        est = estimate_alpha(count_matrix(samples, scales(eps, c)), c, eps)
    alpha0 = cfg.process.get("alpha0")
    tol = float(cfg.tolerances.get("alpha_rel", 0.1)) * alpha
    rows = [McSummary.exact("alpha_hat", est.alpha_hat, alpha, cfg.M, tol, eps=eps)]
    doc: dict[str, Any] = {
        "alpha_hat": est.alpha_hat, "ci_low": None, "ci_high": None, "eps": eps, "c": c,
        "M": cfg.M, "reject": None, "seed": cfg.seed,
    }
    if alpha0 is not None:
        rep = bootstrap_test(est, alpha0, level=float(cfg.tolerances.get("level", 0.95)),
                             resamples=int(cfg.tolerances.get("resamples", 1000)), seed=cfg.seed)
        doc.update(ci_low=rep.ci_low, ci_high=rep.ci_high, reject=rep.reject)
    return RunResult(rows, all(r.passed for r in rows), {"estimate": doc})


def _random_diagram(rng: np.random.Generator, max_points: int) -> Diagram:
    k = int(rng.integers(0, max_points + 1))
    d = rng.uniform(-1.0, 1.0, k)
    return Diagram(np.column_stack([d + rng.uniform(1e-3, 2.0, k), d]))


def _wasserstein_suite(cfg: ExperimentConfig) -> RunResult:
    rng = SeedSpec(cfg.seed, 0).generator()
    pairs = cfg.M
    instances = int(cfg.tolerances.get("instances", 1000))
    mismatches = 0
    for _ in range(pairs):
        a, b = _random_diagram(rng, 6), _random_diagram(rng, 6)
        p = float(rng.choice([1.0, 2.0, 3.0]))
        if wasserstein_p(a, b, p)[0] != brute_force_wasserstein(a, b, p):
            mismatches += 1
        if bottleneck(a, b) != brute_force_bottleneck(a, b):
            mismatches += 1
    interp = 0
    for _ in range(instances):
        a, b = _random_diagram(rng, 8), _random_diagram(rng, 8)
        p = float(rng.uniform(1.0, 3.0))
        q = math.inf if rng.random() < 0.3 else p + float(rng.uniform(0.1, 3.0))
        th = float(rng.uniform(0.05, 0.95))
        p_th = 1.0 / (th / p + (1.0 - th) / q)
        lhs = distance(a, b, p_th)
        rhs = 2.0 ** (1.0 - th) * distance(a, b, p) ** th * (pers_p_measure(a, q) + pers_p_measure(b, q)) ** (1.0 - th)
        if lhs > rhs * (1 + 1e-12) + 1e-15:
            interp += 1
    stab = 0
    for r in range(instances):
        k = int(rng.integers(4, 65))
        v = rng.uniform(-1.0, 1.0, k)
        delta = float(rng.uniform(0.0, 0.3))
        w = v + rng.uniform(-delta, delta, k)
        da = Diagram.from_barcode(superlevel_barcode(v))
        db = Diagram.from_barcode(superlevel_barcode(w))
        if bottleneck(da, db) > delta:
            stab += 1
    rows = [
        McSummary.exact("transport_bruteforce_mismatches", mismatches, 0, pairs),
        McSummary.exact("interpolation_violations", interp, 0, instances),
        McSummary.exact("stability_violations", stab, 0, instances),
    ]
    return RunResult(rows, all(r.passed for r in rows))


def _oracle_suite(cfg: ExperimentConfig) -> RunResult:
    rng = SeedSpec(cfg.seed, 0).generator()
    per_path = int(cfg.tolerances.get("per_path", 20))
    g_bad = l_bad = m_bad = 0
    worst = 0.0
    for _ in range(cfg.M):
        k = int(rng.integers(4, 65))
        v = rng.uniform(0.0, 1.0, k)
        bc = superlevel_barcode(v)
        for e in rng.uniform(1e-3, 1.2, per_path):
            if count_bars_geq(bc, e) != count_bars_updown(v, e):
                g_bad += 1
        xs = rng.uniform(-0.1, 1.1, per_path)
        es = rng.uniform(1e-3, 1.0, per_path)
        for x, e in zip(xs, es):
            if count_rectangle(bc, x, e) != count_upcrossings(v, x, e):
                l_bad += 1
        for p in (0.5, 1.0, 2.0, 3.7):
            direct = pers_p(bc, p)
            rel = abs(mellin_count_integral(bc, p) - direct) / direct if direct > 0 else 0.0
            worst = max(worst, rel)
            if rel > 1e-9:
                m_bad += 1
    rows = [
        McSummary.exact("global_oracle_mismatches", g_bad, 0, cfg.M),
        McSummary.exact("local_oracle_mismatches", l_bad, 0, cfg.M),
        McSummary.exact("mellin_duality_failures", m_bad, 0, cfg.M),
    ]
    return RunResult(rows, all(r.passed for r in rows), {"mellin_worst_relative_error": worst})


_RUNNERS: dict[str, Callable[[ExperimentConfig], RunResult]] = {
    "validate-bm": lambda c: _brownian_like(c, reflected=False),
    "validate-reflected": lambda c: _brownian_like(c, reflected=True),
    "validate-drift": _drift,
    "validate-ou": _ou,
    "estimate-alpha": _estimate,
    "wasserstein-suite": _wasserstein_suite,
    "oracle-suite": _oracle_suite,
}


def execute(cfg: ExperimentConfig) -> RunResult:
    """Run an experiment without touching the filesystem."""
    return _RUNNERS[cfg.kind](cfg)


def resolve_output(cfg: ExperimentConfig, override: str | None = None) -> Path:
    return Path(override or cfg.output or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


def run(cfg: ExperimentConfig, output: str | os.PathLike | None = None) -> tuple[int, Path, RunResult]:
    """Execute and write artifacts; the status is 0 iff every check passed."""
    out = resolve_output(cfg, output)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    error = None
    try:
        result = execute(cfg)
    except PathZetaError as exc:
        if isinstance(exc, ConfigError):
            raise
        error = f"{type(exc).__name__}: {exc}"
        result = RunResult([], False)
    wall = time.perf_counter() - start
    (out / "summary.csv").write_text(summaries_to_csv(result.rows))
    if "estimate" in result.extra:
        (out / "estimate.json").write_text(json.dumps(result.extra["estimate"], indent=2) + "\n")
    manifest = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "wall_time_s": round(wall, 3),
        "passed": result.passed,
        "error": error,
        "checks": [
            {"quantity": r.quantity, "x": None if math.isnan(r.x) else r.x,
             "eps": None if math.isnan(r.eps) else r.eps, "passed": r.passed,
             "z": None if math.isnan(r.z) else (r.z if math.isfinite(r.z) else str(r.z))}
            for r in result.rows
        ],
        "extra": result.extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return (0 if result.passed else 1), out, result
