"""Experiment runner: config files, scheme sweeps, CSV persistence.

Config files are flat ``key = value`` text with dotted section keys (see
``DEFAULTS`` for the schema). A run sweeps every (scheme, SNR) pair over L
block-fading realizations; source blocks and channel draws are seeded per
realization index only, so all schemes and SNR points see identical sources
and channels (paired comparisons), while receiver noise additionally keys on
the scheme and SNR. Results are reduced in realization order, making output
independent of the worker count.
"""

import csv
import json
import multiprocessing
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .baseline import LinearScheme, linear_kf_run
from .channel import draw_channel
from .codec import DqlcParams
from .kalman import DecodeConfig, run_block
from .metrics import SdrRecord, sdr_db
from .numerics import backend_name
from .optimizer import OptimizerConfig
from .source import CorrelationSpec, SourceModel, generate_block

SCHEMES = ("dqlc-kf", "dqlc-memoryless", "dqlc-fixed",
           "linear-kf", "linear-memoryless")

CSV_COLUMNS = ("scheme", "K", "K_q", "rho", "phi", "eta_db", "xi", "sdr_db",
               "avg_candidates", "fallback_rate", "wallclock_s", "seed")

DEFAULTS = {
    "experiment.K": "3",
    "experiment.K_q": "2",
    "experiment.schemes": "dqlc-kf,linear-kf",
    "source.correlation": "uniform",
    "source.rho": "0.95",
    "source.phi": "0.0",
    "grid.eta_db": "20,30,40,50",
    "run.T": "50",
    "run.L": "100",
    "run.seed": "1",
    "run.workers": "1",
    "run.out": "results.csv",
    "decode.tau": "1e-4",
    "decode.moment_accuracy": "1e-3",
    "decode.max_retries": "3",
    "decode.cov_spread_term": "false",
    "optimizer.solver": "nelder-mead",
    "optimizer.max_iters": "200",
    "optimizer.tolerance": "1e-8",
    "optimizer.mu_margin_frac": "0.05",
    "optimizer.s_value": "",
    "optimizer.restarts": "5",
    "optimizer.reopt_threshold": "0.01",
    "optimizer.exact_reopt": "false",
    "fixed.delta": "1,1",
    "fixed.alpha": "1,0.2,0.025",
}


def parse_config_text(text: str) -> dict:
    """key = value lines; '#' starts a comment; later keys override."""
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip() != "")


def _bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class ExperimentConfig:
    n_users: int = 3
    n_quantized: int = 2
    schemes: tuple = ("dqlc-kf", "linear-kf")
    correlation: str = "uniform"
    rho: float = 0.95
    phi: float = 0.0
    eta_db: tuple = (20.0, 30.0, 40.0, 50.0)
    block_length: int = 50
    n_blocks: int = 100
    seed: int = 1
    workers: int = 1
    out_path: str = "results.csv"
    tau: float = 1e-4
    moment_accuracy: float = 1e-3
    max_retries: int = 3
    cov_spread_term: bool = False
    opt_solver: str = "nelder-mead"
    opt_max_iters: int = 200
    opt_tolerance: float = 1e-8
    opt_mu_margin_frac: float = 0.05
    opt_s_value: float | None = None
    opt_restarts: int = 5
    reopt_threshold: float = 0.01
    exact_reopt: bool = False
    fixed_delta: tuple = (1.0, 1.0)
    fixed_alpha: tuple = (1.0, 0.2, 0.025)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        merged = dict(DEFAULTS)
        unknown = [k for k in mapping if k not in merged]
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(mapping)
        return cls(
            n_users=int(merged["experiment.K"]),
            n_quantized=int(merged["experiment.K_q"]),
            schemes=tuple(s.strip() for s in merged["experiment.schemes"].split(",")
                          if s.strip()),
            correlation=merged["source.correlation"],
            rho=float(merged["source.rho"]),
            phi=float(merged["source.phi"]),
            eta_db=_floats(merged["grid.eta_db"]),
            block_length=int(merged["run.T"]),
            n_blocks=int(merged["run.L"]),
            seed=int(merged["run.seed"]),
            workers=int(merged["run.workers"]),
            out_path=merged["run.out"],
            tau=float(merged["decode.tau"]),
            moment_accuracy=float(merged["decode.moment_accuracy"]),
            max_retries=int(merged["decode.max_retries"]),
            cov_spread_term=_bool(merged["decode.cov_spread_term"]),
            opt_solver=merged["optimizer.solver"],
            opt_max_iters=int(merged["optimizer.max_iters"]),
            opt_tolerance=float(merged["optimizer.tolerance"]),
            opt_mu_margin_frac=float(merged["optimizer.mu_margin_frac"]),
            opt_s_value=(float(merged["optimizer.s_value"])
                         if merged["optimizer.s_value"].strip() else None),
            opt_restarts=int(merged["optimizer.restarts"]),
            reopt_threshold=float(merged["optimizer.reopt_threshold"]),
            exact_reopt=_bool(merged["optimizer.exact_reopt"]),
            fixed_delta=_floats(merged["fixed.delta"]),
            fixed_alpha=_floats(merged["fixed.alpha"]),
        )

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_mapping(parse_config_text(fh.read()))

    def echo(self) -> dict:
        return asdict(self)


def validate_config(cfg: ExperimentConfig) -> list:
    """Structural checks; returns every violation as a message."""
    errors = []
    if cfg.n_users < 2:
        errors.append(f"experiment.K must be >= 2, got {cfg.n_users}")
    if not 1 <= cfg.n_quantized <= cfg.n_users - 1:
        errors.append(f"experiment.K_q must be in [1, K-1], got {cfg.n_quantized}")
    if not cfg.schemes:
        errors.append("experiment.schemes must be nonempty")
    for s in cfg.schemes:
        if s not in SCHEMES:
            errors.append(f"unknown scheme {s!r} (valid: {', '.join(SCHEMES)})")
    if cfg.correlation not in ("uniform", "exponential"):
        errors.append(f"source.correlation must be uniform|exponential, got {cfg.correlation!r}")
    if not 0.0 <= cfg.rho < 1.0:
        errors.append(f"source.rho must be in [0,1), got {cfg.rho}")
    if not 0.0 <= cfg.phi < 1.0:
        errors.append(f"source.phi must be in [0,1), got {cfg.phi}")
    if not cfg.eta_db:
        errors.append("grid.eta_db must be nonempty")
    if cfg.block_length < 1:
        errors.append(f"run.T must be >= 1, got {cfg.block_length}")
    if cfg.n_blocks < 1:
        errors.append(f"run.L must be >= 1, got {cfg.n_blocks}")
    if cfg.workers < 1:
        errors.append(f"run.workers must be >= 1, got {cfg.workers}")
    if not 0.0 < cfg.tau < 1.0:
        errors.append(f"decode.tau must be in (0,1), got {cfg.tau}")
    if "dqlc-fixed" in cfg.schemes:
        if len(cfg.fixed_delta) != cfg.n_quantized:
            errors.append("fixed.delta must list one step per quantized user")
        if len(cfg.fixed_alpha) != cfg.n_users:
            errors.append("fixed.alpha must list one gain per user")
    return errors


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _run_task(args):
    """One (scheme, eta, realization) cell; returns ordered aggregates."""
    cfg, scheme, scheme_i, eta_i, block_i = args
    eta = cfg.eta_db[eta_i]
    budget = 10.0 ** (eta / 10.0)
    budgets = np.full(cfg.n_users, budget)
    spec = CorrelationSpec(cfg.correlation, cfg.rho)
    model = SourceModel.from_spec(cfg.n_users, spec, cfg.phi)
    chan_rng = _rng(cfg.seed, 2, block_i)
    source_rng = _rng(cfg.seed, 1, block_i)
    noise_rng = _rng(cfg.seed, 3, block_i, scheme_i, eta_i)
    realization = draw_channel(cfg.n_users, 1.0, chan_rng)
    block = generate_block(model, cfg.block_length, source_rng)
    dec_cfg = DecodeConfig(tau=cfg.tau, moment_accuracy=cfg.moment_accuracy,
                           max_retries=cfg.max_retries,
                           include_spread=cfg.cov_spread_term)
    opt_cfg = OptimizerConfig(tau=cfg.tau, s_value=cfg.opt_s_value,
                              mu_margin_frac=cfg.opt_mu_margin_frac,
                              solver=cfg.opt_solver, max_iters=cfg.opt_max_iters,
                              tolerance=cfg.opt_tolerance,
                              restarts=cfg.opt_restarts)
    if scheme in ("linear-kf", "linear-memoryless"):
        lin = LinearScheme.full_power(budgets)
        _, stats, _ = linear_kf_run(model, realization, block, lin, noise_rng,
                                    use_prior=(scheme == "linear-kf"),
                                    n_quantized=cfg.n_quantized)
    elif scheme == "dqlc-fixed":
        fixed = DqlcParams.from_user_values(cfg.n_users, cfg.n_quantized,
                                            cfg.fixed_alpha, cfg.fixed_delta,
                                            budgets)
        _, stats, _ = run_block(model, realization, block, cfg.n_quantized,
                                noise_rng, dec_cfg, opt_cfg,
                                fixed_params=fixed, use_prior=False)
    else:
        _, stats, _ = run_block(model, realization, block, cfg.n_quantized,
                                noise_rng, dec_cfg, opt_cfg, budgets=budgets,
                                use_prior=(scheme == "dqlc-kf"),
                                reopt_threshold=cfg.reopt_threshold,
                                exact_reopt=cfg.exact_reopt)
    return (block_i, stats.sq_error, stats.n_symbols, stats.candidates,
            stats.fallbacks)


def run(cfg: ExperimentConfig, progress=None) -> list:
    """Execute the experiment grid; writes CSV + manifest, returns records."""
    errors = validate_config(cfg)
    if errors:
        raise ValueError("invalid config: " + "; ".join(errors))
    progress = progress if progress is not None else sys.stderr
    records = []
    for scheme_i, scheme in enumerate(cfg.schemes):
        for eta_i, eta in enumerate(cfg.eta_db):
            t0 = time.perf_counter()
            tasks = [(cfg, scheme, scheme_i, eta_i, b)
                     for b in range(cfg.n_blocks)]
            if cfg.workers > 1:
                with multiprocessing.get_context("fork").Pool(cfg.workers) as pool:
                    results = pool.map(_run_task, tasks)
            else:
                results = [_run_task(t) for t in tasks]
            results.sort(key=lambda r: r[0])  # reduce in realization order
            sq = sum(r[1] for r in results)
            n_sym = sum(r[2] for r in results)
            cand = sum(r[3] for r in results)
            falls = sum(r[4] for r in results)
            xi = sq / (n_sym * cfg.n_users)
            wall = time.perf_counter() - t0
            rec = SdrRecord(scheme=scheme, n_users=cfg.n_users,
                            n_quantized=cfg.n_quantized, rho=cfg.rho,
                            phi=cfg.phi, eta_db=eta, xi=xi, sdr_db=sdr_db(xi),
                            avg_candidates=(cand / n_sym if "dqlc" in scheme else 0.0),
                            fallback_rate=falls / n_sym,
                            wallclock_s=wall, seed=cfg.seed)
            records.append(rec)
            if progress:
                print(f"[{scheme} eta={eta:g}] sdr={rec.sdr_db:.2f} dB "
                      f"xi={xi:.4g} cand={rec.avg_candidates:.2f} "
                      f"({wall:.1f}s)", file=progress)
    write_csv(cfg.out_path, records)
    write_manifest(cfg.out_path + ".manifest.json", cfg)
    return records


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_csv(path: str, records: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([_fmt(v) for v in (
                r.scheme, r.n_users, r.n_quantized, r.rho, r.phi, r.eta_db,
                r.xi, r.sdr_db, r.avg_candidates, r.fallback_rate,
                r.wallclock_s, r.seed)])


def write_manifest(path: str, cfg: ExperimentConfig) -> None:
    payload = {
        "version": __version__,
        "kernel_backend": backend_name(),
        "csv_columns": list(CSV_COLUMNS),
        "config": cfg.echo(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
