"""Config-driven sweeps: learning rates, cost scaling, lambda sensitivity.

Every sweep writes one CSV (documented headers, deterministic bytes for a
fixed config) plus human-readable summary lines with pass/fail verdicts
against the configured tolerances. Cells of a sweep are keyed by
(grid index, repetition); per-cell randomness spawns from the master seed by
that key, so results do not depend on execution order.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import krr, nystrom
from .diagnostics import (
    check_concentration,
    check_norm_equivalence,
    check_projection_bound,
    check_smoothness_perturbation,
)
from .kernels import KernelSpec
from .nystrom import SizeRuleParams, lambda_admissible, subsample_plain, subsample_size
from .spectral import (
    IndexFunction,
    analytic_profile,
    c_gamma_for_designed,
    lambda0,
)
from .synthetic import NoiseSpec, l2_rho_error, make_target, sample_dataset


@dataclass(frozen=True)
class LambdaPolicy:
    kind: str  # "lambda0" | "fixed" | "grid"
    value: float | None = None
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("lambda0", "fixed", "grid"):
            raise ValueError(f"unknown lambda policy: {self.kind!r}")
        if self.kind == "fixed" and (self.value is None or self.value <= 0):
            raise ValueError("fixed lambda policy needs a positive 'value'")
        if self.kind == "grid" and len(self.values) == 0:
            raise ValueError("grid lambda policy needs nonempty 'values'")


@dataclass
class ExperimentConfig:
    kernel: KernelSpec
    phi: IndexFunction
    target_profile: str
    coeff_seed: int
    noise: NoiseSpec
    n_grid: list
    repetitions: int
    seed: int
    size_rule: SizeRuleParams
    lambda_policy: LambdaPolicy
    outputs: str = "out"
    krr_baseline: bool = False
    gamma: float | None = None
    lambda_factor: float = 3.0
    exponent_tolerance: float = 0.15
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.n_grid) == 0:
            raise ValueError("n_grid must be nonempty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def _require(cfg: dict, key: str, context: str):
    if key not in cfg:
        raise ValueError(f"config error: missing '{key}' in {context}")
    return cfg[key]


def config_from_dict(raw: dict) -> ExperimentConfig:
    kernel = KernelSpec.from_config(_require(raw, "kernel", "top level"))
    tgt = _require(raw, "target", "top level")
    phi = IndexFunction(_require(tgt, "family", "target"), float(_require(tgt, "r", "target")))
    noise_cfg = _require(raw, "noise", "top level")
    noise = NoiseSpec(
        _require(noise_cfg, "variant", "noise"), float(_require(noise_cfg, "scale", "noise"))
    )
    rule_cfg = raw.get("size_rule", {})
    size_rule = SizeRuleParams(
        c=float(rule_cfg.get("c", 1.0)),
        delta=float(rule_cfg.get("delta", 0.1)),
        gamma=rule_cfg.get("gamma"),
        c_gamma=rule_cfg.get("c_gamma"),
    )
    pol_cfg = raw.get("lambda_policy", {"kind": "lambda0"})
    policy = LambdaPolicy(
        kind=_require(pol_cfg, "kind", "lambda_policy"),
        value=pol_cfg.get("value"),
        values=tuple(pol_cfg.get("values", ())),
    )
    return ExperimentConfig(
        kernel=kernel,
        phi=phi,
        target_profile=tgt.get("profile", "sphere"),
        coeff_seed=int(tgt.get("coeff_seed", 0)),
        noise=noise,
        n_grid=[int(v) for v in _require(raw, "n_grid", "top level")],
        repetitions=int(raw.get("repetitions", 1)),
        seed=int(raw.get("seed", 0)),
        size_rule=size_rule,
        lambda_policy=policy,
        outputs=raw.get("outputs", "out"),
        krr_baseline=bool(raw.get("krr_baseline", False)),
        gamma=raw.get("gamma"),
        lambda_factor=float(raw.get("lambda_factor", 3.0)),
        exponent_tolerance=float(raw.get("exponent_tolerance", 0.15)),
        diagnostics=raw.get("diagnostics", {}),
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"config error: {path} is not valid JSON ({exc})") from exc
    return config_from_dict(raw)


@dataclass
class RateFitResult:
    exponent: float
    intercept: float
    r_squared: float
    points: list  # (log n, log median error)

    def __post_init__(self):
        if len(self.points) < 3:
            raise ValueError("a rate fit needs at least 3 grid points")


def fit_loglog(ns, values) -> RateFitResult:
    ns = np.asarray(ns, dtype=np.float64)
    vals = np.asarray(values, dtype=np.float64)
    x, y = np.log(ns), np.log(vals)
    design = np.vstack([np.ones_like(x), x]).T
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coeffs
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2)) / float(total) if total > 0 else 1.0
    return RateFitResult(
        exponent=float(coeffs[1]),
        intercept=float(coeffs[0]),
        r_squared=r2,
        points=list(zip(x.tolist(), y.tolist())),
    )


def fit_loglog_with_loglog_covariate(ns, values) -> tuple[float, float]:
    """Slope on log n after absorbing a log log n term; returns (slope, r2)."""
    ns = np.asarray(ns, dtype=np.float64)
    x, y = np.log(ns), np.log(np.asarray(values, dtype=np.float64))
    design = np.vstack([np.ones_like(x), x, np.log(x)]).T
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coeffs
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2)) / float(total) if total > 0 else 1.0
    return float(coeffs[1]), r2


def _cell_seeds(master: int, n_cells: int):
    return np.random.SeedSequence(master).spawn(n_cells)


def _resolve_lambda(config: ExperimentConfig, n: int) -> float:
    policy = config.lambda_policy
    if policy.kind == "fixed":
        return policy.value
    if policy.kind == "lambda0":
        profile = analytic_profile(config.kernel.decay, config.kernel.truncation)
        return lambda0(profile, n)
    raise ValueError("grid lambda policy is only meaningful for the lambda sweep")


def _make_target(config: ExperimentConfig):
    return make_target(
        config.kernel.decay,
        config.kernel.truncation,
        config.phi,
        config.coeff_seed,
        profile=config.target_profile,
    )


def _require_designed(config: ExperimentConfig, what: str):
    if not config.kernel.is_designed:
        raise ValueError(f"{what} needs a designed_spectral kernel for exact errors")


# The result CSVs are byte-identical across re-runs with the same config and
# seed; wall-clock goes to a companion timing file instead of the result rows.
RATE_CSV_FIELDS = ["n", "rep", "seed", "m", "lambda", "error", "krr_error", "flops", "warnings"]
TIMING_CSV_FIELDS = ["n", "rep", "wall_ms"]


def write_rows(path, fields, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        writer.writerows(rows)


def run_rate_sweep(config: ExperimentConfig):
    """Error vs sample size at the configured lambda policy and size rule.

    Returns (fit, rows, timing, summary_lines, passed); ``fit`` is None when
    the grid has fewer than 3 points. The verdict compares the fitted
    exponent against the theoretical ``-r/(s+1)`` within the configured
    tolerance.
    """
    _require_designed(config, "rate sweep")
    target = _make_target(config)
    seeds = _cell_seeds(config.seed, len(config.n_grid) * config.repetitions)
    rows, timing = [], []
    medians = []
    delta = config.size_rule.delta
    top_eig = float(config.kernel.eigenvalues()[0])
    for i_n, n in enumerate(config.n_grid):
        lam = _resolve_lambda(config, n)
        m = subsample_size(n, lam, config.size_rule, kernel=config.kernel)
        cell_warn = ""
        if not lambda_admissible(lam, n, delta, top_eig):
            cell_warn = "lambda outside admissible window"
        errs = []
        for rep in range(config.repetitions):
            cell = i_n * config.repetitions + rep
            ds_seed, sub_seed = seeds[cell].spawn(2)
            data = sample_dataset(
                config.kernel.decay,
                config.kernel.truncation,
                target,
                config.noise,
                n,
                ds_seed,
            )
            t0 = time.perf_counter()
            idx = subsample_plain(n, m, sub_seed)
            model = nystrom.fit_nystrom(config.kernel, data, lam, idx)
            wall_ms = 1000.0 * (time.perf_counter() - t0)
            err = l2_rho_error(model, config.kernel, data)
            krr_err = ""
            if config.krr_baseline:
                base = krr.fit_krr(config.kernel, data, lam)
                krr_err = repr(l2_rho_error(base, config.kernel, data))
            errs.append(err)
            rows.append(
                [
                    n,
                    rep,
                    f"{config.seed}:{cell}",
                    m,
                    repr(lam),
                    repr(err),
                    krr_err,
                    model.opcount.flops,
                    cell_warn,
                ]
            )
            timing.append([n, rep, f"{wall_ms:.1f}"])
        medians.append(float(np.median(errs)))

    fit = fit_loglog(config.n_grid, medians) if len(config.n_grid) >= 3 else None
    passed = True
    if fit is None:
        summary = ["rate sweep: fewer than 3 grid points, no exponent fit"]
    else:
        summary = [
            f"rate sweep: fitted exponent {fit.exponent:.4f} (r^2 {fit.r_squared:.4f})"
        ]
        if config.phi.family == "holder":
            expected = -config.phi.r / (config.kernel.decay.s + 1.0)
            ok_exp = abs(fit.exponent - expected) <= config.exponent_tolerance
            ok_fit = fit.r_squared >= 0.9
            passed = ok_exp and ok_fit
            summary.append(
                f"expected exponent {expected:.4f}, tolerance {config.exponent_tolerance}: "
                f"{'PASS' if ok_exp else 'FAIL'}"
            )
            summary.append(f"r^2 >= 0.9: {'PASS' if ok_fit else 'FAIL'}")
        if len(config.n_grid) < 5:
            summary.append("note: fewer than 5 grid points, exponent fit is indicative only")
    return fit, rows, timing, summary, passed


COST_CSV_FIELDS = ["n", "rep", "seed", "m", "lambda", "c_gamma", "error", "flops", "warnings"]


def run_cost_sweep(config: ExperimentConfig):
    """Flops vs sample size with the power-type envelope in the size rule.

    The subsample size uses ``c_gamma^2 lambda0^(gamma-1)`` with ``c_gamma``
    computed from the kernel's decay; the fitted flop exponent (log n slope
    with a log log n covariate) is compared against the predicted
    ``(3 + s - 2 gamma) / (1 + s)``.
    """
    _require_designed(config, "cost sweep")
    if config.gamma is None:
        raise ValueError("cost sweep needs 'gamma' in the config")
    s = config.kernel.decay.s
    gamma = float(config.gamma)
    bound = c_gamma_for_designed(config.kernel.decay, config.kernel.truncation, gamma)
    rule = SizeRuleParams(
        c=config.size_rule.c,
        delta=config.size_rule.delta,
        gamma=gamma,
        c_gamma=bound.c_gamma,
    )
    subquadratic = 2.0 * gamma + s > 1.0
    target = _make_target(config)
    seeds = _cell_seeds(config.seed, len(config.n_grid) * config.repetitions)
    rows, timing, flops_per_n = [], [], []
    for i_n, n in enumerate(config.n_grid):
        lam = _resolve_lambda(config, n)
        m = subsample_size(n, lam, rule, kernel=config.kernel)
        warn = "" if subquadratic else "no subquadratic guarantee (2 gamma + s <= 1)"
        cell_flops = []
        for rep in range(config.repetitions):
            cell = i_n * config.repetitions + rep
            ds_seed, sub_seed = seeds[cell].spawn(2)
            data = sample_dataset(
                config.kernel.decay, config.kernel.truncation, target, config.noise, n, ds_seed
            )
            t0 = time.perf_counter()
            idx = subsample_plain(n, m, sub_seed)
            model = nystrom.fit_nystrom(config.kernel, data, lam, idx)
            wall_ms = 1000.0 * (time.perf_counter() - t0)
            err = l2_rho_error(model, config.kernel, data)
            cell_flops.append(model.opcount.flops)
            rows.append(
                [
                    n,
                    rep,
                    f"{config.seed}:{cell}",
                    m,
                    repr(lam),
                    repr(bound.c_gamma),
                    repr(err),
                    model.opcount.flops,
                    warn,
                ]
            )
            timing.append([n, rep, f"{wall_ms:.1f}"])
        flops_per_n.append(float(np.median(cell_flops)))

    slope, r2 = fit_loglog_with_loglog_covariate(config.n_grid, flops_per_n)
    predicted = (3.0 + s - 2.0 * gamma) / (1.0 + s)
    summary = [
        f"cost sweep: fitted flop exponent {slope:.4f} (r^2 {r2:.4f}), "
        f"predicted {predicted:.4f}",
    ]
    if not subquadratic:
        summary.append("warning: 2 gamma + s <= 1, no subquadratic guarantee")
    passed = abs(slope - predicted) <= 0.2 and slope < 1.8 if subquadratic else True
    summary.append(f"exponent within 0.2 of prediction and < 1.8: {'PASS' if passed else 'FAIL'}")
    return slope, predicted, rows, timing, summary, passed


LAMBDA_CSV_FIELDS = ["lambda", "n", "seed", "m", "median_error", "median_flops", "is_lambda0", "warnings"]


def run_lambda_sensitivity(config: ExperimentConfig):
    """Median error across a lambda grid around lambda0 at fixed n.

    Uses the last entry of n_grid; the verdict checks that the error at
    lambda0 stays within ``lambda_factor`` of the grid minimum.
    """
    _require_designed(config, "lambda sweep")
    n = config.n_grid[-1]
    profile = analytic_profile(config.kernel.decay, config.kernel.truncation)
    lam0 = lambda0(profile, n)
    if config.lambda_policy.kind == "grid" and config.lambda_policy.values:
        lam_grid = sorted(config.lambda_policy.values)
    else:
        lam_grid = np.logspace(
            math.log10(lam0 / 100.0), math.log10(lam0 * 100.0), 15
        ).tolist()
    if lam0 not in lam_grid:
        lam_grid = sorted(set(lam_grid) | {lam0})
    target = _make_target(config)
    seeds = _cell_seeds(config.seed, len(lam_grid) * config.repetitions)
    rows, medians = [], {}
    for i_l, lam in enumerate(lam_grid):
        m = subsample_size(n, min(lam, 0.999), config.size_rule, kernel=config.kernel)
        errs, flops = [], []
        for rep in range(config.repetitions):
            child = seeds[i_l * config.repetitions + rep]
            ds_seed, sub_seed = child.spawn(2)
            data = sample_dataset(
                config.kernel.decay, config.kernel.truncation, target, config.noise, n, ds_seed
            )
            idx = subsample_plain(n, m, sub_seed)
            model = nystrom.fit_nystrom(config.kernel, data, lam, idx)
            errs.append(l2_rho_error(model, config.kernel, data))
            flops.append(model.opcount.flops)
        med = float(np.median(errs))
        medians[lam] = med
        rows.append(
            [
                repr(lam),
                n,
                f"{config.seed}:{i_l}",
                m,
                repr(med),
                int(np.median(flops)),
                int(lam == lam0),
                "",
            ]
        )
    best = min(medians.values())
    at_lam0 = medians[lam0]
    passed = at_lam0 <= config.lambda_factor * best
    summary = [
        f"lambda sweep at n={n}: error(lambda0)={at_lam0:.5f}, grid min={best:.5f}, "
        f"factor {at_lam0 / best:.3f} (tolerance {config.lambda_factor}): "
        f"{'PASS' if passed else 'FAIL'}"
    ]
    return rows, summary, passed


def run_diagnostics(config: ExperimentConfig):
    """The four operator-bound checks at the configured settings."""
    _require_designed(config, "diagnostics")
    d = config.diagnostics
    truncation = int(d.get("T", 256))
    n = int(d.get("n", 2048))
    trials = int(d.get("trials", 200))
    delta = float(d.get("delta", 0.1))
    decay = config.kernel.decay
    profile = analytic_profile(decay, truncation)
    lam = float(d.get("lambda", lambda0(profile, n)))
    m = subsample_size(n, lam, SizeRuleParams(c=1.0, delta=delta), profile=profile)
    seed = config.seed
    target = _make_target(config)
    reports = [
        check_projection_bound(decay, truncation, n, m, lam, delta, trials, seed),
        check_norm_equivalence(decay, truncation, n, lam, delta, trials, seed),
        check_concentration(decay, truncation, n, lam, trials, seed, which="operator"),
        check_smoothness_perturbation(
            decay,
            truncation,
            n,
            m,
            lam,
            config.phi if config.phi.family == "holder" else IndexFunction.holder(0.5),
            trials,
            seed,
        ),
    ]
    summary = [
        f"{r.bound_name}: violation_rate={r.violation_rate:.3f} "
        f"max_ratio={r.observed_max_ratio:.3f}"
        for r in reports
    ]
    passed = all(
        r.violation_rate <= r.delta + 0.05
        for r in reports
        if r.bound_name in ("projection", "norm_equivalence")
    )
    return reports, summary, passed


def write_summary(path, lines) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


__all__ = [
    "ExperimentConfig",
    "LambdaPolicy",
    "RateFitResult",
    "RATE_CSV_FIELDS",
    "COST_CSV_FIELDS",
    "LAMBDA_CSV_FIELDS",
    "config_from_dict",
    "load_config",
    "fit_loglog",
    "fit_loglog_with_loglog_covariate",
    "run_rate_sweep",
    "run_cost_sweep",
    "run_lambda_sensitivity",
    "run_diagnostics",
    "write_summary",
    "write_rows",
]
