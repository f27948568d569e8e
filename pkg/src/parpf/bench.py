"""Experiment sweeps: replicated runs per (variant, M, N) cell, CSV rows out.

Seeding is hierarchical and schedule-independent: one root ``SeedSequence``
per sweep yields children for (1) data simulation, (2) the proxy reference
filter and (3) one grand-child per (cell, replicate).  The mse/bias columns
of the output are therefore byte-identical whatever the worker count;
wall-clock columns are measurements and will differ.

Per replicate, ensembles run their member filters serially inside one
worker, so the recorded wall times are serial-equivalent costs (comparable
across variants); the parallel wall-time behaviour of ensembles is exercised
separately through :func:`parpf.ensemble.run_ensemble` with ``workers > 1``.

For ``centralised-bf`` rows the (M, N) pair records the budget factorisation
being compared against: the filter itself runs with K = M * N particles.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from .config import ExperimentConfig
from .core import StateSpaceModel
from .ensemble import run_ensemble, time_error_index
from .exceptions import NumericalDivergenceError
from .filters import run_double_bootstrap, run_filter
from .io import read_array_csv, write_array_csv
from .metrics import MetricRecord, empirical_mse
from .models import FhnNetworkModel, Lorenz63Model, simulate


def spawn_child(parent: np.random.SeedSequence, index: int) -> np.random.SeedSequence:
    """The ``index``-th spawn of ``parent``, constructible out of order."""
    return np.random.SeedSequence(entropy=parent.entropy,
                                  spawn_key=tuple(parent.spawn_key) + (index,))


def build_model(cfg: ExperimentConfig) -> StateSpaceModel:
    if cfg.model == "lorenz63":
        return Lorenz63Model()
    return FhnNetworkModel(J=cfg.fhn_grid)


def _root_sequences(cfg: ExperimentConfig):
    root = np.random.SeedSequence(cfg.seed)
    sim_ss, ref_ss, sweep_ss = root.spawn(3)
    return sim_ss, ref_ss, sweep_ss


def prepare_data(cfg: ExperimentConfig, model: StateSpaceModel):
    """Load or simulate the ground truth and observation record.

    Requested output paths that do not exist yet are written, so repeated
    invocations with the same seed are idempotent.
    """
    sim_ss, _, _ = _root_sequences(cfg)
    states = None
    observations = None
    if cfg.observations_path and os.path.exists(cfg.observations_path):
        _, observations = read_array_csv(cfg.observations_path)
        if cfg.trajectory_path and os.path.exists(cfg.trajectory_path):
            _, states = read_array_csv(cfg.trajectory_path)
    else:
        states, observations = simulate(model, cfg.n_observations, sim_ss)
        if cfg.observations_path:
            write_array_csv(cfg.observations_path, "y", observations)
        if cfg.trajectory_path:
            write_array_csv(cfg.trajectory_path, "x", states, first_step=0)
    return states, observations


def compute_reference(cfg: ExperimentConfig, model: StateSpaceModel,
                      states, observations) -> np.ndarray:
    """Error baseline, already passed through the model's error projection."""
    if cfg.reference == "truth":
        if states is None:
            raise OSError("ground-truth reference requested but no trajectory available")
        return model.error_projection(np.asarray(states)[1:])
    _, ref_ss, _ = _root_sequences(cfg)
    proxy = run_filter(model, observations, "bootstrap", cfg.proxy_particles, ref_ss)
    return model.error_projection(proxy.estimates)


def _replicate_task(args):
    (cell_index, rep_index, model, observations, variant, n_filters,
     n_particles, island_period, seed) = args
    try:
        if variant == "centralised-bf":
            out = run_filter(model, observations, "bootstrap",
                             n_filters * n_particles, seed)
            wall_per_step = float(np.median(out.step_seconds))
            estimates, collapse, total = (out.estimates, len(out.collapse_steps),
                                          out.total_seconds)
        elif variant in ("ensemble-bf", "ensemble-apf"):
            inner = "bootstrap" if variant == "ensemble-bf" else "auxiliary"
            ens = run_ensemble(model, observations, inner, n_filters, n_particles,
                               seed, workers=1)
            estimates = ens.mean_estimates
            collapse = sum(len(f.collapse_steps) for f in ens.filter_outputs)
            total = ens.total_seconds
            wall_per_step = total / ens.n_steps
        elif variant == "double-bf":
            out = run_double_bootstrap(model, observations, n_filters, n_particles,
                                       island_period, seed)
            estimates, collapse, total = (out.estimates, len(out.collapse_steps),
                                          out.total_seconds)
            wall_per_step = total / out.n_steps
        else:
            raise ValueError(f"unknown variant {variant!r}")
    except NumericalDivergenceError:
        return cell_index, rep_index, None, 0, 0.0, 0.0
    projected = model.error_projection(estimates)
    return cell_index, rep_index, projected, collapse, total, wall_per_step


def _variant_index(variant: str, n_filters: int, n_particles: int) -> float:
    if variant == "centralised-bf":
        return time_error_index("centralised", n_filters, n_particles)
    if variant in ("ensemble-bf", "ensemble-apf"):
        return time_error_index("ensemble", n_filters, n_particles)
    return float("nan")  # no closed form recorded for the island scheme


@dataclass
class _Cell:
    variant: str
    n_filters: int
    n_particles: int


def run_sweep(cfg: ExperimentConfig, model: StateSpaceModel | None = None,
              states=None, observations=None,
              reference: np.ndarray | None = None) -> list[MetricRecord]:
    """Execute the configured sweep and aggregate one record per cell."""
    model = model or build_model(cfg)
    if observations is None:
        states, observations = prepare_data(cfg, model)
    if reference is None:
        reference = compute_reference(cfg, model, states, observations)
    _, _, sweep_ss = _root_sequences(cfg)

    cells = [_Cell(v, m, n) for v in cfg.variants
             for m in cfg.n_filters_list for n in cfg.n_particles_list]
    tasks = []
    for ci, cell in enumerate(cells):
        cell_ss = spawn_child(sweep_ss, ci)
        for r in range(cfg.replicates):
            tasks.append((ci, r, model, observations, cell.variant,
                          cell.n_filters, cell.n_particles, cfg.island_period,
                          spawn_child(cell_ss, r)))

    results: dict[tuple[int, int], tuple] = {}

    def store(res):
        ci, r, projected, collapse, total, per_step = res
        results[(ci, r)] = (projected, collapse, total, per_step)

    if cfg.workers == 1 or len(tasks) == 1:
        for task in tasks:
            store(_replicate_task(task))
    else:
        ctx = get_context("fork")
        with ProcessPoolExecutor(max_workers=cfg.workers, mp_context=ctx) as pool:
            for res in pool.map(_replicate_task, tasks, chunksize=1):
                store(res)

    records = []
    for ci, cell in enumerate(cells):
        reps = cfg.replicates
        per_rep = [results[(ci, r)] for r in range(reps)]
        mses, valid = [], []
        collapse_total = 0
        for projected, collapse, _, _ in per_rep:
            collapse_total += collapse
            mse = (empirical_mse(projected, reference)
                   if projected is not None else float("nan"))
            if np.isfinite(mse):
                mses.append(mse)
                valid.append(projected)
            else:
                collapse_total += 1  # divergent replicate, excluded and counted
        mse_mean = float(np.mean(mses)) if mses else float("nan")
        mse_var = float(np.var(mses, ddof=1)) if len(mses) > 1 else float("nan")
        if valid:
            mean_est = valid[0].copy()
            for proj in valid[1:]:
                mean_est += proj
            mean_est /= float(len(valid))
            bias_sq = float(np.mean((mean_est - reference) ** 2))
        else:
            bias_sq = float("nan")
        wall_total = float(np.mean([t for _, _, t, _ in per_rep]))
        wall_per_step = float(np.mean([p for _, _, _, p in per_rep]))
        records.append(MetricRecord(
            variant=cell.variant,
            n_filters=cell.n_filters,
            n_particles=cell.n_particles,
            total_particles=cell.n_filters * cell.n_particles,
            replicates=reps,
            mse_mean=mse_mean,
            mse_var=mse_var,
            bias_sq=bias_sq,
            wall_per_step_s=wall_per_step,
            wall_total_s=wall_total,
            time_error_index=_variant_index(cell.variant, cell.n_filters,
                                            cell.n_particles),
            collapse_count=collapse_total,
        ))
    return records
