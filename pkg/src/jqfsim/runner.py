"""Scenario execution: from a parsed config to tables and a run report."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from . import fitting
from .config import ScenarioConfig
from .decay import decay_amplitudes
from .delay import compare_with_approximation
from .driven import (
    DriveEnvelope,
    amplitude_for_rabi,
    evolve_master,
    free_rabi,
    scenario_pi_pulse,
    scenario_pulse_train,
)
from .model import SystemParameters, derive_couplings
from .report import RunReport, Table, derived_summary, trajectory_table

_EXCITED_DQ = np.zeros((4, 4), dtype=complex)
_EXCITED_DQ[2, 2] = 1.0
_EXCITED_DQ.flags.writeable = False


def _single_excitation_purity(p1):
    return p1**2 + (1.0 - p1) ** 2


def _free_exponential(p: SystemParameters, times):
    theta1 = p.omega1 * p.l1 / p.velocity
    return np.exp(-2.0 * p.gamma1 * math.cos(theta1) ** 2 * np.asarray(times))


def _run_decay(cfg: ScenarioConfig, p: SystemParameters, report: RunReport):
    t = np.linspace(0.0, cfg.options["t_end"], cfg.options["samples"])
    c = derive_couplings(p)
    traj = decay_amplitudes(c, t)
    table = trajectory_table(
        "trajectory", t, traj.p1, traj.p2,
        _single_excitation_purity(traj.p1), _free_exponential(p, t),
    )
    report.add_metric("stationary_p1", traj.p1[-1], "single_excitation.decay_amplitudes")
    report.add_metric("slow_mode_rate", -2.0 * traj.mu1.real,
                      "single_excitation.decay_amplitudes")
    return [table]


def _run_dde_compare(cfg: ScenarioConfig, p: SystemParameters, report: RunReport):
    cmp = compare_with_approximation(p, cfg.options["t_end"], cfg.options["step"])
    rig, approx = cmp.rigorous, cmp.approximate
    main = trajectory_table("rigorous", rig.times, rig.p1, rig.p2,
                            _single_excitation_purity(rig.p1), None)
    extra = trajectory_table("approximate", approx.times, approx.p1, approx.p2,
                             _single_excitation_purity(approx.p1), None)
    report.add_metric("max_dev", cmp.max_dev, "delay.compare_with_approximation")
    report.add_metric("stationary_dev", cmp.stationary_dev,
                      "delay.compare_with_approximation")
    return [main, extra]


def _run_rabi(cfg: ScenarioConfig, p: SystemParameters, report: RunReport):
    t = np.linspace(0.0, cfg.options["t_end"], cfg.options["samples"])
    c = derive_couplings(p)
    amp = amplitude_for_rabi(c, cfg.options["rabi_frequency"])
    drive = DriveEnvelope.continuous(amp, c.omega_ref)
    traj = evolve_master(p, c, drive, t)
    p1f = free_rabi(0.5 * c.eta**2, amp, t)
    table = trajectory_table("trajectory", t, traj.p1, traj.p2, traj.purity, p1f)
    report.add_metric("max_dev_p1_vs_free", float(np.max(np.abs(traj.p1 - p1f))),
                      "driven.evolve_master")
    if p.gamma2 > 0.0:
        report.add_metric("photon_rate_ratio", amp * amp / p.gamma2,
                          "driven.amplitude_for_rabi")
    return [table]


def _run_pi_pulse(cfg: ScenarioConfig, p: SystemParameters, report: RunReport):
    duration = cfg.options["duration"]
    t_end = cfg.options["t_end"]
    t = np.unique(np.append(np.linspace(0.0, t_end, cfg.options["samples"]),
                            min(duration, t_end)))
    traj = scenario_pi_pulse(p, duration, t)
    table = trajectory_table("trajectory", t, traj.p1, traj.p2, traj.purity, None)
    report.add_metric("stationary_p1", traj.p1[-1], "driven.scenario_pi_pulse")
    report.add_metric("unexcited_probability", 1.0 - traj.p1[-1],
                      "driven.scenario_pi_pulse")
    return [table]


def _run_pulse_train(cfg: ScenarioConfig, p: SystemParameters, report: RunReport):
    duration = cfg.options["duration"]
    period = cfg.options["period"]
    n_pulses = cfg.options["n_pulses"]
    t_end = cfg.options["t_end"]
    if t_end is None:
        t_end = (n_pulses - 1) * period + duration
    t = np.unique(np.append(np.linspace(0.0, t_end, cfg.options["samples"]), t_end))
    traj = scenario_pulse_train(p, duration, period, n_pulses, t)
    table = trajectory_table("trajectory", t, traj.p1, traj.p2, traj.purity, None)
    report.add_metric("p1_final", traj.p1[-1], "driven.scenario_pulse_train")
    report.add_metric("purity_final", traj.purity[-1], "driven.purity")
    return [table]


def fitted_decay_rate(p: SystemParameters, fit_t_end: float,
                      samples: int = 400) -> float:
    """Exponential DQ decay rate fitted from a drive-free master-equation run
    starting from the excited DQ."""
    c = derive_couplings(p)
    fast = p.gamma2 + p.gamma1
    t_min = min(50.0 / fast if fast > 0 else 0.0, 0.25 * fit_t_end)
    t = np.linspace(0.0, fit_t_end, samples)
    traj = evolve_master(p, c, DriveEnvelope.off(), t, rho0=_EXCITED_DQ)
    return fitting.fit_exponential_rate(t, traj.p1, t_min=t_min)


def _detuning_point(args):
    p, dw, fit_t_end = args
    from .decay import decay_rate_with_loss

    p_det = p.replace(omega2=p.omega1 + dw)
    formula = decay_rate_with_loss(p_det)
    fitted = fitted_decay_rate(p_det, fit_t_end)
    return dw, formula, fitted


def _position_point(args):
    p, frac, t_end = args
    p_pos = p.replace(l2=frac * p.wavelength)
    c = derive_couplings(p_pos)
    traj = decay_amplitudes(c, np.array([0.0, t_end]))
    return frac, p_pos.l2, traj.p1[-1], -2.0 * traj.mu1.real


def _map_points(worker, items, jobs: Optional[int]):
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(items) <= 1:
        return [worker(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, items))


def _run_detuning_sweep(cfg: ScenarioConfig, p: SystemParameters, report: RunReport):
    opts = cfg.options
    dws = np.linspace(opts["start"], opts["stop"], opts["count"])
    rows = _map_points(_detuning_point,
                       [(p, float(dw), opts["fit_t_end"]) for dw in dws],
                       cfg.jobs)
    table = Table(
        name="detuning_sweep",
        columns=("detuning_rad_s", "detuning_hz", "rate_formula_rad_s",
                 "rate_fitted_rad_s"),
        rows=[(dw, dw / (2 * math.pi), f, g) for dw, f, g in rows],
    )
    rates = np.array([r[1] for r in rows])
    report.add_metric("min_rate_formula", rates.min(), "single_excitation.decay_rate_with_loss")
    return [table]


def _run_position_sweep(cfg: ScenarioConfig, p: SystemParameters, report: RunReport):
    opts = cfg.options
    fracs = np.linspace(opts["start_over_lambda"], opts["stop_over_lambda"],
                        opts["count"])
    rows = _map_points(_position_point,
                       [(p, float(f), opts["t_end"]) for f in fracs], cfg.jobs)
    table = Table(
        name="position_sweep",
        columns=("l2_over_lambda", "l2_m", "p1_at_t_end", "slow_mode_rate_rad_s"),
        rows=rows,
    )
    p1s = np.array([r[2] for r in rows])
    report.add_metric("best_p1", p1s.max(), "single_excitation.decay_amplitudes")
    return [table]


_RUNNERS = {
    "decay": _run_decay,
    "dde-compare": _run_dde_compare,
    "rabi": _run_rabi,
    "pi-pulse": _run_pi_pulse,
    "pulse-train": _run_pulse_train,
    "detuning-sweep": _run_detuning_sweep,
    "position-sweep": _run_position_sweep,
}


def _table_path(base: str, index: int, name: str, fmt: str) -> str:
    if index == 0:
        return base
    root, ext = os.path.splitext(base)
    return f"{root}.{name}{ext or '.' + fmt}"


def run(cfg: ScenarioConfig) -> RunReport:
    """Execute a scenario deterministically and write its tables.

    Tables go to ``cfg.output_path`` (second and later tables get the table
    name injected before the extension); with no path the tables are only
    summarized in the report.
    """
    start = time.perf_counter()
    p = cfg.system
    if cfg.no_jqf:
        p = p.replace(gamma2=0.0)
    report = RunReport(
        scenario=cfg.kind,
        resolved=cfg.resolved_document(),
        derived=derived_summary(derive_couplings(p)),
    )
    tables = _RUNNERS[cfg.kind](cfg, p, report)
    if cfg.output_path:
        for i, table in enumerate(tables):
            path = _table_path(cfg.output_path, i, table.name, cfg.output_format)
            with open(path, "w", encoding="utf-8") as fh:
                if cfg.output_format == "csv":
                    fh.write(table.to_csv())
                else:
                    json.dump(table.to_json_obj(), fh, indent=2)
                    fh.write("\n")
            report.tables.append(path)
    report.wall_clock_s = time.perf_counter() - start
    return report
