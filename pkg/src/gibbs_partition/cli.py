"""Experiment runner: model loading, method dispatch, seeding, result tables.

Repetition r of a run derives all of its randomness from (seed, stage, r),
so tables are byte-identical across reruns and worker counts.  CSV rows
deliberately exclude wall-clock time (it lives in the JSON sidecar) to keep
the determinism contract checkable by byte comparison.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

from . import estimators, models, samplers, schedule as sched_mod
from .streams import stage_stream

THREADS_ENV = "GIBBS_PARTITION_THREADS"

CSV_FIELDS = [
    "rep",
    "method",
    "model",
    "beta",
    "epsilon",
    "sampler",
    "estimate",
    "log_estimate",
    "true_log_ratio",
    "replicates",
    "draws_total",
    "schedule_length",
    "seed",
]

COMPARE_FIELDS = [
    "method",
    "model",
    "beta",
    "epsilon",
    "reps",
    "coverage",
    "mean_draws",
    "mean_abs_log_error",
    "sample_bound",
    "seed",
]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    model: str
    beta: float
    epsilon: float = 0.1
    method: str = "paired"
    sampler: str = "exact"
    mcmc_steps: int = 100
    tv_budget: float = 0.0
    seed: int = 0
    reps: int = 1
    boost: int = 1
    draws: int = 10_000
    overrides: dict = field(default_factory=dict)
    schedule_in: str | None = None
    schedule_out: str | None = None
    trace: str | None = None

    def validate(self):
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if not (0 < self.epsilon <= 1):
            raise ConfigError("epsilon must lie in (0, 1]")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.method not in ("paired", "product", "single", "exact"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.sampler not in ("exact", "mcmc"):
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        if self.boost < 1 or self.boost % 2 == 0:
            raise ConfigError("boost must be a positive odd integer")
        if self.draws < 1:
            raise ConfigError("draws must be >= 1")


def build_model(spec: str) -> models.GibbsModel:
    """Resolve a model shorthand: k2 | path-N | cycle-N | grid-RxC | const-h | table:<file>."""
    if spec == "k2":
        return models.ising_model([(0, 1)], num_vertices=2)
    if spec.startswith("path-"):
        n = int(spec[len("path-"):])
        return models.ising_model(models.path_edges(n), num_vertices=n)
    if spec.startswith("cycle-"):
        n = int(spec[len("cycle-"):])
        return models.ising_model(models.cycle_edges(n), num_vertices=n)
    if spec.startswith("grid-"):
        rows, cols = spec[len("grid-"):].split("x")
        r, c = int(rows), int(cols)
        return models.ising_model(models.grid_edges(r, c), num_vertices=r * c)
    if spec.startswith("const-"):
        return models.constant_model(float(spec[len("const-"):]))
    if spec.startswith("table:"):
        return models.load_model(spec[len("table:"):])
    raise ConfigError(f"unknown model spec {spec!r}")


def build_oracle(model: models.GibbsModel, config: ExperimentConfig) -> samplers.SamplerOracle:
    if config.sampler == "exact":
        return samplers.exact_oracle(model)
    return samplers.mcmc_oracle(model, config.mcmc_steps, config.tv_budget)


def parse_overrides(text: str) -> dict:
    """Parse 'd=140,k=300.5,eta=0.5,r=100' into override fields."""
    out: dict = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, _, value = chunk.partition("=")
        key = key.strip()
        if key == "d":
            out["d"] = int(value)
        elif key == "k":
            out["k"] = float(value)
        elif key == "eta":
            out["eta"] = float(value)
        elif key == "r":
            out["replicates"] = int(value)
        else:
            raise ConfigError(f"unknown override {key!r}")
    return out


def _true_log_ratio(model: models.GibbsModel, beta: float) -> float | None:
    try:
        return models.log_ratio_exact(model, beta)
    except models.EnumerationGuardError:
        return None


def _load_schedule(path: str):
    with open(path) as fh:
        spec = json.load(fh)
    schedule = sched_mod.CoolingSchedule.from_dict(spec)
    params = (
        sched_mod.ScheduleParams.from_dict(spec["params"]) if spec.get("params") else None
    )
    return schedule, params


def _save_schedule(path: str, schedule: sched_mod.CoolingSchedule, params) -> None:
    spec = schedule.to_dict()
    spec["params"] = params.to_dict() if params is not None else None
    with open(path, "w") as fh:
        json.dump(spec, fh)


def export_schedule(config: ExperimentConfig):
    """Build one schedule from (seed, 'schedule-export') for reuse across runs."""
    model = build_model(config.model)
    oracle = build_oracle(model, config)
    regime = sched_mod.regime_for_model(model)
    work = oracle
    if regime == sched_mod.REGIME_SHIFTED:
        work = oracle.with_model(models.shift_hamiltonian(model, -2.0 * model.n_bound))
    rng = stage_stream(config.seed, "schedule-export")
    q_hat1, _ = sched_mod.initial_estimate(work, config.beta, rng)
    params = sched_mod.select_params(q_hat1, model.n_bound, regime, config.beta)
    schedule, _ = sched_mod.well_balanced_schedule(work, config.beta, params, rng)
    return schedule, params


def _run_repetition(cfg: dict, rep: int) -> dict:
    """One independent repetition; safe to run in a worker process."""
    config = ExperimentConfig(**cfg)
    model = build_model(config.model)
    truth = _true_log_ratio(model, config.beta)
    row = {
        "rep": rep,
        "method": config.method,
        "model": config.model,
        "beta": config.beta,
        "epsilon": config.epsilon,
        "sampler": config.sampler,
        "true_log_ratio": truth,
        "seed": config.seed,
        "replicates": 0,
        "draws_total": 0,
        "schedule_length": 0,
    }
    start = time.perf_counter()

    if config.method == "exact":
        if truth is None:
            raise models.EnumerationGuardError("exact method infeasible for this model")
        row["estimate"] = math.exp(truth)
        row["log_estimate"] = truth
    else:
        oracle = build_oracle(model, config)
        rng = stage_stream(config.seed, f"{config.method}-rep", rep)
        trace: list | None = [] if config.trace else None
        if config.method == "paired":
            overrides = estimators.ParamOverrides(**config.overrides)
            schedule = params = None
            if config.schedule_in:
                schedule, params = _load_schedule(config.schedule_in)
            est = estimators.median_boosted_estimate(
                oracle,
                config.beta,
                config.epsilon,
                rng,
                boost=config.boost,
                overrides=overrides,
                schedule=schedule,
                schedule_params=params,
                trace=trace,
            )
            row["estimate"] = est.ratio_estimate
            row["log_estimate"] = est.log_ratio_estimate
            row["replicates"] = est.replicates
            row["draws_total"] = est.draws_total
            row["schedule_length"] = len(est.schedule.betas)
        elif config.method == "single":
            before = oracle.counter.total
            est = estimators.single_shot_estimate(oracle, config.beta, config.draws, rng)
            row["estimate"] = est
            row["log_estimate"] = math.log(est) if est > 0 else float("-inf")
            row["draws_total"] = oracle.counter.total - before
            row["schedule_length"] = 2
        else:  # product: two-piece fixed schedule fed by the TPA q estimate
            before = oracle.counter.total
            regime = sched_mod.regime_for_model(model)
            work = oracle
            if regime == sched_mod.REGIME_SHIFTED:
                work = oracle.with_model(
                    models.shift_hamiltonian(model, -2.0 * model.n_bound)
                )
            q_hat1, _ = sched_mod.initial_estimate(
                work, config.beta, rng, trace=trace
            )
            if q_hat1 > 0:
                schedule = estimators.bezakova_schedule(
                    q_hat1, model.n_bound, config.beta
                )
            else:
                schedule = sched_mod.CoolingSchedule(betas=(0.0, config.beta))
            per_stage = max(1, config.draws // schedule.num_intervals)
            est = estimators.product_estimate(schedule, work, per_stage, rng)
            log_est = (math.log(est) if est > 0 else float("-inf")) + (
                config.beta * (-2.0 * model.n_bound)
                if regime == sched_mod.REGIME_SHIFTED
                else 0.0
            )
            row["estimate"] = math.exp(log_est)
            row["log_estimate"] = log_est
            row["draws_total"] = oracle.counter.total - before
            row["schedule_length"] = len(schedule.betas)
        if trace is not None:
            row["_trace"] = trace
    row["_wall_time"] = time.perf_counter() - start
    return row


def _map_reps(config: ExperimentConfig, reps: int) -> list[dict]:
    cfg = asdict(config)
    threads = int(os.environ.get(THREADS_ENV, "1") or "1")
    if threads > 1 and reps > 1 and not config.trace:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_run_repetition, [cfg] * reps, range(reps)))
    return [_run_repetition(cfg, rep) for rep in range(reps)]


def run_experiment(config: ExperimentConfig) -> list[dict]:
    """Execute `reps` independent estimates; rows are in repetition order."""
    config.validate()
    if config.schedule_out:
        schedule, params = export_schedule(config)
        _save_schedule(config.schedule_out, schedule, params)
        config.schedule_in = config.schedule_out
    reps = 1 if config.method == "exact" else config.reps
    return _map_reps(config, reps)


def compare_methods(config: ExperimentConfig, methods: list[str]) -> list[dict]:
    """Paired vs baselines at matched draw budgets, with the instance bound."""
    config.validate()
    if not methods:
        raise ConfigError("empty method list")
    for m in methods:
        if m not in ("paired", "product", "single"):
            raise ConfigError(f"compare does not support method {m!r}")

    model = build_model(config.model)
    truth = _true_log_ratio(model, config.beta)
    if truth is None:
        raise ConfigError("compare needs an enumerable model for ground truth")
    band = math.log(1.0 + config.epsilon)
    regime = sched_mod.regime_for_model(model)
    q = abs(truth)
    if regime == sched_mod.REGIME_SHIFTED:
        bound = estimators.sample_bound_shifted(
            q, model.n_bound, config.beta, config.epsilon
        )
    else:
        bound = estimators.sample_bound_integer(q, model.n_bound, config.epsilon)

    paired_cfg = replace(config, method="paired")
    paired_rows = _map_reps(paired_cfg, config.reps)
    mean_paired_draws = sum(r["draws_total"] for r in paired_rows) / len(paired_rows)

    table = []
    for method in methods:
        if method == "paired":
            rows = paired_rows
        else:
            cfg = replace(config, method=method, draws=max(1, round(mean_paired_draws)))
            rows = _map_reps(cfg, config.reps)
        hits = sum(
            1
            for r in rows
            if math.isfinite(r["log_estimate"]) and abs(r["log_estimate"] - truth) <= band
        )
        errs = [
            abs(r["log_estimate"] - truth)
            for r in rows
            if math.isfinite(r["log_estimate"])
        ]
        table.append(
            {
                "method": method,
                "model": config.model,
                "beta": config.beta,
                "epsilon": config.epsilon,
                "reps": config.reps,
                "coverage": hits / len(rows),
                "mean_draws": sum(r["draws_total"] for r in rows) / len(rows),
                "mean_abs_log_error": sum(errs) / len(errs) if errs else float("nan"),
                "sample_bound": bound,
                "seed": config.seed,
            }
        )
    return table


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row.get(f)) for f in fields])
    return buf.getvalue()


def _emit(rows, fields, config, out, fmt, elapsed):
    if fmt == "json":
        payload = []
        for row in rows:
            rec = {f: row.get(f) for f in fields}
            if "_wall_time" in row:
                rec["wall_time"] = row["_wall_time"]
            payload.append(rec)
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = render_csv(rows, fields)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        sidecar = out + ".config.json"
        with open(sidecar, "w") as fh:
            json.dump({"config": asdict(config), "wall_time": elapsed}, fh, indent=2)
    else:
        sys.stdout.write(text)


def _write_trace(rows: list[dict], path: str) -> None:
    with open(path, "w") as fh:
        for row in rows:
            for record in row.pop("_trace", []) or []:
                fh.write(json.dumps(record) + "\n")


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, help="k2|path-N|cycle-N|grid-RxC|const-h|table:<file>")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--sampler", choices=["exact", "mcmc"], default="exact")
    p.add_argument("--mcmc-steps", type=int, default=100)
    p.add_argument("--tv-budget", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--boost", type=int, default=1)
    p.add_argument("--draws", type=int, default=10_000,
                   help="draw budget for the single/product baselines")
    p.add_argument("--expert-overrides", default="",
                   help="expert mode: d=..,k=..,eta=..,r=..")
    p.add_argument("--schedule-in", default=None)
    p.add_argument("--schedule-out", default=None)
    p.add_argument("--trace", default=None, help="write TPA step records (JSON lines)")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def _config_from_args(args) -> ExperimentConfig:
    return ExperimentConfig(
        model=args.model,
        beta=args.beta,
        epsilon=args.epsilon,
        method=getattr(args, "method", "paired"),
        sampler=args.sampler,
        mcmc_steps=args.mcmc_steps,
        tv_budget=args.tv_budget,
        seed=args.seed,
        reps=args.reps,
        boost=args.boost,
        draws=args.draws,
        overrides=parse_overrides(args.expert_overrides),
        schedule_in=args.schedule_in,
        schedule_out=args.schedule_out,
        trace=args.trace,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gibbs-partition",
        description="Estimate Z(beta)/Z(0) of discrete Gibbs models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one estimation method")
    run_p.add_argument("--method", choices=["paired", "product", "single", "exact"],
                       default="paired")
    _add_common_args(run_p)

    cmp_p = sub.add_parser("compare", help="compare methods at matched draw budgets")
    cmp_p.add_argument("--methods", default="paired,product,single",
                       help="comma-separated subset of paired,product,single")
    _add_common_args(cmp_p)

    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        config = _config_from_args(args)
        if args.command == "run":
            rows = run_experiment(config)
            if config.trace:
                _write_trace(rows, config.trace)
            _emit(rows, CSV_FIELDS, config, args.out, args.format,
                  time.perf_counter() - start)
        else:
            methods = [m for m in args.methods.split(",") if m.strip()]
            rows = compare_methods(config, methods)
            _emit(rows, COMPARE_FIELDS, config, args.out, args.format,
                  time.perf_counter() - start)
    except models.EnumerationGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
