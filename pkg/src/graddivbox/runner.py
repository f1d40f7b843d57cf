"""Run orchestration: single runs, gamma sweeps, CSV/JSON persistence.

A single run realizes the configured force, builds a reproducible initial
condition (force shape at unit rms plus a small seeded divergence-free
perturbation), advances the solver with a fixed step, accumulates window
statistics after burn-in, and writes three artifacts into output_dir:

    timeseries.csv   one row per step: t, kinetic_energy, eps_nu,
                     eps_gamma, div_norm_sq, budget_residual
    summary.json     force scales, U_T, Re, R_gamma, <eps> and its split,
                     the dissipation bound and whether it held, and the
                     admissible gamma windows
    final.ckpt       restartable binary checkpoint of the end state

All floats in the CSV are printed with 17 significant digits, so a serial
rerun (or a checkpoint restart) reproduces rows bitwise.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import criterion as crit
from .checkpoint import read_checkpoint, write_checkpoint
from .config import RunConfig, SweepConfig
from .forcing import check_divergence_free, force_stats, realize_force
from .grid import Field, dealias_mask, mode_numbers, project_divergence_free, volume_norm_sq
from .solver import BlowUpError, imex_step
from .stats import RunningStats, dissipation_rate, divergence_norm_sq, finalize, update

PERTURBATION_RMS = 0.01
PERTURBATION_MAX_MODE = 4

CSV_HEADER = "t,kinetic_energy,eps_nu,eps_gamma,div_norm_sq,budget_residual"


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return float(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj


def initial_condition(cfg: RunConfig, force: Field | None) -> Field:
    """Force shape at unit rms plus a seeded divergence-free perturbation.

    The perturbation lives on modes with |m_j| <= 4, has zero mean, and is
    scaled to rms PERTURBATION_RMS; the whole construction is a pure
    function of the seed, so runs are reproducible. For unforced runs the
    perturbation alone, scaled to unit rms, is the initial state.
    """
    grid = cfg.grid
    if force is not None:
        base = force.phys / np.sqrt(volume_norm_sq(force))
    else:
        base = np.zeros((grid.dim,) + grid.shape)
    rng = np.random.default_rng(cfg.seed)
    noise = Field.from_physical(grid, rng.standard_normal((grid.dim,) + grid.shape))
    s = noise.spec.copy()
    for m in mode_numbers(grid):
        s[:, np.abs(m) > PERTURBATION_MAX_MODE] = 0.0
    s[(slice(None),) + (0,) * grid.dim] = 0.0
    pert = project_divergence_free(Field.from_spectral(grid, s))
    prms = np.sqrt(volume_norm_sq(pert))
    target_rms = PERTURBATION_RMS if force is not None else 1.0
    scale = target_rms / prms if prms > 0 else 0.0
    u0 = Field.from_physical(grid, base + scale * pert.phys)
    # keep the state band-limited from the start
    return Field.from_spectral(grid, u0.spec * dealias_mask(grid))


def run_single(cfg: RunConfig, restart_path=None) -> dict:
    """Execute one run; returns the summary dict (also written to summary.json)."""
    grid, params, stepper = cfg.grid, cfg.params, cfg.stepper
    os.makedirs(cfg.output_dir, exist_ok=True)

    if cfg.forcing.modes:
        force = realize_force(cfg.forcing)
        check_divergence_free(force)
        fstats = force_stats(force)
    else:
        force = None
        fstats = None
    f_field = force if force is not None else Field.zeros(grid)
    fhat = f_field.spec

    dt = stepper.dt
    n_steps = int(round(stepper.t_end / dt))
    if n_steps < 1:
        raise ValueError("stepper.t_end shorter than one step")

    if restart_path is not None:
        ck_grid, u, t0, ck_params = read_checkpoint(restart_path)
        if (ck_grid.dim, ck_grid.n) != (grid.dim, grid.n) or ck_grid.box_length != grid.box_length:
            raise ValueError("checkpoint grid does not match the configured grid")
        if (ck_params.nu, ck_params.gamma) != (params.nu, params.gamma):
            raise ValueError("checkpoint flow parameters do not match the configured flow")
        u = Field.from_physical(grid, u.phys)  # rebind to the configured grid (dealias fraction)
        start_step = int(round(t0 / dt))
    else:
        u = initial_condition(cfg, force)
        start_step = 0

    stats = RunningStats(burn_in=cfg.burn_in, t=start_step * dt)
    csv_path = os.path.join(cfg.output_dir, "timeseries.csv")
    with open(csv_path, "w") as csv:
        csv.write(CSV_HEADER + "\n")
        if start_step == 0:
            e = dissipation_rate(u, params)
            csv.write(",".join([
                _fmt(0.0), _fmt(0.5 * volume_norm_sq(u)), _fmt(e[1]), _fmt(e[2]),
                _fmt(divergence_norm_sq(u)), _fmt(0.0),
            ]) + "\n")
        for i in range(start_step, n_steps):
            t = i * dt
            u_hat = imex_step(u.spec, t, dt, params, grid, fhat)
            u_next = Field.from_spectral(grid, u_hat)
            if not np.all(np.isfinite(u_next.phys)):
                write_checkpoint(os.path.join(cfg.output_dir, "blowup.ckpt"), u, t, params)
                raise BlowUpError(t + dt, last_state=u)
            # canonical state is physical space so checkpoints restart bitwise
            u_next = Field.from_physical(grid, u_next.phys)
            update(stats, u, u_next, params, f_field, dt)
            e = dissipation_rate(u_next, params)
            csv.write(",".join([
                _fmt((i + 1) * dt), _fmt(0.5 * volume_norm_sq(u_next)), _fmt(e[1]),
                _fmt(e[2]), _fmt(divergence_norm_sq(u_next)), _fmt(stats.last_residual),
            ]) + "\n")
            u = u_next

    write_checkpoint(os.path.join(cfg.output_dir, "final.ckpt"), u, n_steps * dt, params)

    summary = _summarize(cfg, fstats, stats)
    with open(os.path.join(cfg.output_dir, "summary.json"), "w") as fh:
        json.dump(_json_safe(summary), fh, indent=2)
    return summary


def _summarize(cfg: RunConfig, fstats, stats: RunningStats) -> dict:
    averages = finalize(stats, fstats)
    u_t = averages["U_T"]
    report = None
    if fstats is not None and u_t > 0:
        inp = crit.CriterionInput(
            U=u_t, L=fstats.L, nu=cfg.params.nu,
            kappa=max(fstats.kappa, 1.0), gamma=cfg.params.gamma, h=cfg.grid.spacing,
        )
        report = crit.build_report(inp, measured_eps_avg=averages["eps_avg"])
    return {
        "F": fstats.F if fstats else None,
        "L": fstats.L if fstats else None,
        "L_branch": fstats.L_branch if fstats else None,
        "kappa": fstats.kappa if fstats else None,
        "nu": cfg.params.nu,
        "gamma": cfg.params.gamma,
        "dt": cfg.stepper.dt,
        "t_end": cfg.stepper.t_end,
        "burn_in": cfg.burn_in,
        "window": averages["window"],
        "seed": cfg.seed,
        "U_T": u_t,
        "Re": report.Re if report else None,
        "R_gamma": report.R_gamma if report else None,
        "eps_avg": averages["eps_avg"],
        "eps_nu_avg": averages["eps_nu_avg"],
        "eps_gamma_avg": averages["eps_gamma_avg"],
        "eps_normalized": averages.get("eps_normalized"),
        "eps_bound": report.eps_bound if report else None,
        "eps_bound_viscous": report.eps_bound_viscous if report else None,
        "bound_satisfied": report.bound_satisfied if report else None,
        "div_norm_sq_avg": averages["div_norm_sq_avg"],
        "budget_residual_max": averages["budget_residual_max"],
        "gamma_lo": report.gamma_lo if report else None,
        "gamma_hi_mesh_independent": report.gamma_hi_mesh_independent if report else None,
        "gamma_hi_mesh_dependent": report.gamma_hi_mesh_dependent if report else None,
        "in_window_mesh_independent": report.in_window_mesh_independent if report else None,
        "in_window_mesh_dependent": report.in_window_mesh_dependent if report else None,
        "kolmogorov_eta": report.eta if report else None,
    }


def _run_for_sweep(args):
    cfg, gamma, index = args
    sub = dataclasses.replace(
        cfg,
        params=dataclasses.replace(cfg.params, gamma=gamma),
        output_dir=os.path.join(cfg.output_dir, f"gamma_{index:03d}"),
    )
    try:
        return index, run_single(sub), None
    except BlowUpError as e:
        return index, None, f"blow-up at t = {e.t}"


def run_sweep(sweep: SweepConfig) -> dict:
    """Run one solver instance per gamma; aggregate into sweep.csv and sweep.json.

    Per-gamma failures are recorded and the sweep continues; the returned
    dict has `failures` nonempty in that case.
    """
    base = sweep.base
    os.makedirs(base.output_dir, exist_ok=True)
    jobs = [(base, g, i) for i, g in enumerate(sweep.gamma_values)]
    if sweep.parallel_workers > 1:
        with ProcessPoolExecutor(max_workers=sweep.parallel_workers) as pool:
            results = list(pool.map(_run_for_sweep, jobs))
    else:
        results = [_run_for_sweep(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    rows = []
    summaries = {}
    failures = {}
    for (index, summary, err), gamma in zip(results, sweep.gamma_values):
        if err is not None:
            failures[gamma] = err
            continue
        summaries[gamma] = summary
        rows.append([
            gamma, summary["eps_avg"], summary["eps_nu_avg"], summary["eps_gamma_avg"],
            summary["div_norm_sq_avg"], summary["U_T"], summary["eps_bound"],
            summary["in_window_mesh_independent"], summary["in_window_mesh_dependent"],
        ])

    csv_path = os.path.join(base.output_dir, "sweep.csv")
    with open(csv_path, "w") as fh:
        fh.write("gamma,eps_total,eps_nu,eps_gamma,div_norm_avg,U_T,bound,in_window_mi,in_window_md\n")
        for row in rows:
            fh.write(",".join(
                _fmt(v) if isinstance(v, float) else str(v) for v in row
            ) + "\n")

    out = {
        "gamma_values": list(sweep.gamma_values),
        "summaries": {str(g): s for g, s in summaries.items()},
        "failures": {str(g): e for g, e in failures.items()},
    }
    with open(os.path.join(base.output_dir, "sweep.json"), "w") as fh:
        json.dump(_json_safe(out), fh, indent=2)
    return out
