"""Command-line interface.

Subcommands::

    parpf simulate  - write a ground-truth trajectory and observations as CSV
    parpf run       - run one filter configuration, write per-step estimates
    parpf bench     - replicated sweep over (variant, M, N), one CSV row each
    parpf verify    - oracle-backed property suites, pass/fail per check

Options shared with the ``key=value`` config file (``--config``) override it.
The default worker count comes from ``PARPF_WORKERS`` (or the CPU count) and
is overridden by ``--workers``.  Exit status is 0 on success, nonzero on any
error or failed check.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import accel
from .bench import build_model, compute_reference, prepare_data, run_sweep
from .config import ExperimentConfig, parse_config
from .ensemble import run_ensemble
from .exceptions import ConfigError
from .filters import run_double_bootstrap, run_filter
from .io import write_array_csv, write_csv, write_metric_records
from .metrics import empirical_mse
from .verify import ALL_CHECKS, run_checks


def _add_config_options(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--model", choices=["lorenz63", "fhn"])
    parser.add_argument("--variants", help="comma-separated variant list")
    parser.add_argument("--M", dest="M", help="comma-separated filter/island counts")
    parser.add_argument("--N", dest="N", help="comma-separated particles-per-filter")
    parser.add_argument("--reps", type=int)
    parser.add_argument("--T", type=int, help="number of observations")
    parser.add_argument("--island-period", dest="island_period", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--reference", choices=["proxy", "truth"])
    parser.add_argument("--proxy-J", dest="proxy_J", type=int)
    parser.add_argument("--fhn-grid", dest="fhn_grid", type=int)
    parser.add_argument("--obs", help="observations CSV path")
    parser.add_argument("--traj", help="trajectory CSV path")
    parser.add_argument("--out", help="output CSV path")


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    keys = ("model", "variants", "M", "N", "reps", "T", "island_period", "seed",
            "workers", "reference", "proxy_J", "fhn_grid", "obs", "traj", "out")
    overrides = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = str(value) if not isinstance(value, str) else value
    return parse_config(getattr(args, "config", None), overrides)


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    if not cfg.observations_path or not cfg.trajectory_path:
        raise ConfigError("simulate needs --obs and --traj output paths")
    model = build_model(cfg)
    prepare_data(cfg, model)
    print(f"wrote {cfg.trajectory_path} and {cfg.observations_path} "
          f"({cfg.n_observations} observations, seed {cfg.seed})")
    return 0


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    model = build_model(cfg)
    states, observations = prepare_data(cfg, model)
    variant = cfg.variants[0]
    m = cfg.n_filters_list[0]
    n = cfg.n_particles_list[0]
    seed = np.random.SeedSequence(cfg.seed)
    if variant == "centralised-bf":
        out = run_filter(model, observations, "bootstrap", m * n, seed)
        estimates, trace = out.estimates, out.log_norm_const
        wall = out.total_seconds
    elif variant in ("ensemble-bf", "ensemble-apf"):
        inner = "bootstrap" if variant == "ensemble-bf" else "auxiliary"
        ens = run_ensemble(model, observations, inner, m, n, seed,
                           workers=cfg.workers)
        estimates = ens.mean_estimates
        trace = np.full(ens.n_steps, np.nan)
        wall = ens.total_seconds
    else:
        out = run_double_bootstrap(model, observations, m, n,
                                   cfg.island_period, seed)
        estimates, trace = out.estimates, out.log_norm_const
        wall = out.total_seconds
    path = cfg.out_path
    header = (["t"] + [f"est{i}" for i in range(estimates.shape[1])]
              + ["log_norm_const"])
    rows = [[k + 1] + list(estimates[k]) + [trace[k]]
            for k in range(estimates.shape[0])]
    write_csv(path, header, rows)
    summary = f"{variant} M={m} N={n}: wrote {path}, wall={wall:.3f}s"
    if states is not None:
        proj_est = model.error_projection(estimates)
        proj_truth = model.error_projection(np.asarray(states)[1:])
        summary += f", mse_vs_truth={empirical_mse(proj_est, proj_truth):.6g}"
    print(summary)
    return 0


def cmd_bench(args) -> int:
    cfg = _config_from_args(args)
    model = build_model(cfg)
    states, observations = prepare_data(cfg, model)
    reference = compute_reference(cfg, model, states, observations)
    records = run_sweep(cfg, model=model, states=states,
                        observations=observations, reference=reference)
    write_metric_records(cfg.out_path, records)
    print(f"wrote {len(records)} rows to {cfg.out_path} "
          f"(kernel backend: {accel.backend_name()})")
    return 0


def cmd_verify(args) -> int:
    names = args.only.split(",") if args.only else None
    results = run_checks(names, fast=args.fast, workers=args.workers)
    for result in results:
        print(result.line())
    failed = [r for r in results if not r.skipped and not r.passed]
    skipped = [r for r in results if r.skipped]
    print(f"{len(results) - len(failed) - len(skipped)} passed, "
          f"{len(failed)} failed, {len(skipped)} skipped")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="parpf",
        description="Parallel particle filtering benchmarks and verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="write ground truth and observations")
    _add_config_options(p_sim)
    p_sim.set_defaults(fn=cmd_simulate)

    p_run = sub.add_parser("run", help="run one filter configuration")
    _add_config_options(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_bench = sub.add_parser("bench", help="replicated metric sweep")
    _add_config_options(p_bench)
    p_bench.set_defaults(fn=cmd_bench)

    p_verify = sub.add_parser("verify", help="oracle-backed property suites")
    p_verify.add_argument("--only", help=f"comma-separated subset of {sorted(ALL_CHECKS)}")
    p_verify.add_argument("--fast", action="store_true",
                          help="reduced replicate counts for a quick pass")
    p_verify.add_argument("--workers", type=int, default=None)
    p_verify.set_defaults(fn=cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
