"""Run orchestration: execute a RunConfig, emit artifacts, gate on hard assertions.

Artifacts per stage: fields_kappa_<k>.csv (cell values), trace_kappa_<k>.csv
(iteration trace).  One report.json per run collects every diagnostic
section; sweep runs nest per-width artifacts in eps_<width>/ directories.

Exit codes: 0 all hard assertions pass, 1 an assertion failed (named in the
report and the log), 2 I/O failure.
"""

from __future__ import annotations

import concurrent.futures
import json
import logging
import os
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .analysis import (
    check_2kvar,
    energy_sandwich,
    hard_segregate,
    reference_energies,
    segregation_metrics,
    taylor_remainder_check,
    trivial_min_comparison,
)
from .config import RunConfig
from .discretization import State, dump_fields_csv, energy_J
from .geometry import DomainSpec, Rect, build_domain, measure, validate_spec
from .reaction import check_assumptions, make_logistic
from .solver import ContinuationResult, kappa_continuation

log = logging.getLogger("coexmin.run")

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_IO = 2


@dataclass
class RunOutcome:
    exit_code: int
    hard_failures: list[str]
    report_path: str | None


def run(config: RunConfig, output_dir: str | None = None) -> RunOutcome:
    out_dir = output_dir or config.output_dir
    try:
        os.makedirs(out_dir, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise OSError(f"output directory {out_dir} is not writable")
    except OSError as exc:
        log.error("cannot prepare output directory: %s", exc)
        return RunOutcome(EXIT_IO, [], None)

    report = {
        "tool": {"name": "coexmin", "version": __version__},
        "config": config.to_json(),
        "mode": config.mode,
    }
    failures: list[str] = []
    try:
        models = [make_logistic(lam, p) for lam, p in config.species]
        assumptions = check_assumptions(models)
        report["assumptions"] = assumptions.to_json()
        report["species_constants"] = [
            {"name": m.name, "A": m.A, "mu": m.mu} for m in models
        ]

        violations = validate_spec(config.domain)
        report["domain_validation"] = [
            {"code": v.code, "message": v.message, "severity": v.severity} for v in violations
        ]
        if any(v.severity == "error" for v in violations):
            failures.append("domain: " + "; ".join(v.message for v in violations
                                                   if v.severity == "error"))
            report["hard_failures"] = failures
            return _write_report(report, out_dir, failures)

        if config.mode == "check":
            grid = build_domain(config.domain)
            report["geometry"] = _geometry_summary(grid)
            report["stages"] = []
            return _write_report(report, out_dir, failures)

        if config.mode == "sweep":
            report["sweep"], failures = _run_sweep(config, models, assumptions, out_dir)
            report["stages"] = []
        else:
            grid = build_domain(config.domain)
            report["geometry"] = _geometry_summary(grid)
            schedule = config.kappa_schedule if config.mode == "continuation" \
                else config.kappa_schedule[-1:]
            cont = kappa_continuation(grid, models, schedule, config.solver,
                                      kappa_threshold=assumptions.kappa_threshold)
            stages, stage_failures = _stage_reports(cont, grid, models, assumptions, out_dir)
            report["stages"] = stages
            failures.extend(stage_failures)
            if not cont.monotone:
                failures.append("monotone_energy: stage energies decreased beyond slack")
    except Exception as exc:  # pragma: no cover - defensive
        log.exception("run failed")
        failures.append(f"internal: {exc}")
        report.setdefault("stages", [])

    return _write_report(report, out_dir, failures)


def _write_report(report: dict, out_dir: str, failures: list[str]) -> RunOutcome:
    report["hard_failures"] = failures
    report["passed"] = not failures
    path = os.path.join(out_dir, "report.json")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        log.error("cannot write report: %s", exc)
        return RunOutcome(EXIT_IO, failures, None)
    if failures:
        log.error("hard assertion failed: %s", failures[0])
        return RunOutcome(EXIT_ASSERTION, failures, path)
    return RunOutcome(EXIT_OK, failures, path)


def _geometry_summary(grid) -> dict:
    return {
        "nx": grid.nx,
        "ny": grid.ny,
        "h": grid.h,
        "cell_count": int(np.count_nonzero(grid.mask)),
        "measures": {
            **{f"core_{i}": measure(grid, f"core_{i}") for i in range(1, grid.k + 1)},
            "channel": measure(grid, "channel"),
            "domain": grid.cell_area * float(np.count_nonzero(grid.mask)),
        },
    }


def _stage_reports(cont: ContinuationResult, grid, models, assumptions,
                   out_dir) -> tuple[list[dict], list[str]]:
    stages = []
    failures: list[str] = []
    core_measures = [measure(grid, f"core_{i + 1}") for i in range(grid.k)]
    for kappa, res, overlap in zip(cont.kappas, cont.stages, cont.overlaps):
        tag = _format_kappa(kappa)
        dump_fields_csv(res.state, os.path.join(out_dir, f"fields_kappa_{tag}.csv"))
        _dump_trace(res, os.path.join(out_dir, f"trace_kappa_{tag}.csv"))

        stage: dict = {
            "kappa": kappa,
            "converged": res.converged,
            "iterations": res.iterations,
            "energy": res.energy,
            "residual": res.residual,
            "h1_core_distance": res.h1_core_distance,
        }
        state = res.state
        metrics = segregation_metrics(state, grid, models)
        stage["overlap"] = {
            "pairs": {f"{i + 1},{j + 1}": v for (i, j), v in metrics.overlap_pairs.items()},
            "total": metrics.overlap_total,
            "kappa_times_total": kappa * metrics.overlap_total,
            "product_max": metrics.product_max,
            "support_measures": metrics.support_measures,
        }

        bounds = _bounds_section(state, models)
        stage["bounds"] = bounds
        if bounds["violations"] > 0:
            failures.append(f"bounds: kappa={kappa:g} has {bounds['violations']} cells "
                            f"outside [0, A] by up to {bounds['worst']:.3e}")

        masses = [float(np.sum(state.u[i][grid.mask])) * grid.cell_area
                  for i in range(state.k)]
        stage["masses"] = masses
        for i, m in enumerate(models):
            if res.converged and masses[i] < 1e-3 * m.A * core_measures[i]:
                failures.append(f"nontriviality: species {i + 1} mass {masses[i]:.3e} "
                                f"below 1e-3*A*|core| at kappa={kappa:g}")

        try:
            sandwich = energy_sandwich(res, grid, models, kappa, assumptions)
            stage["sandwich"] = sandwich.to_json()
        except Exception as exc:
            stage["sandwich"] = "skipped"
            log.warning("sandwich diagnostics failed at kappa=%g: %s", kappa, exc)

        try:
            segregated = hard_segregate(state, models)
            stage["extremality"] = {
                "state": check_2kvar(state, grid, models, tol=_kvar_tol(kappa)).to_json(),
                "segregated_candidate": check_2kvar(
                    segregated, grid, models, tol=_kvar_tol(kappa)).to_json(),
                "candidate_energy_J": energy_J(segregated, models),
            }
        except Exception as exc:
            stage["extremality"] = "skipped"
            log.warning("extremality diagnostics failed at kappa=%g: %s", kappa, exc)

        try:
            stage["taylor"] = taylor_remainder_check(
                state, grid, models, assumptions.eta).to_json()
        except Exception as exc:
            stage["taylor"] = "skipped"
            log.warning("taylor diagnostics failed at kappa=%g: %s", kappa, exc)

        try:
            stage["trivial_min"] = trivial_min_comparison(state, grid, models).to_json()
        except Exception as exc:
            stage["trivial_min"] = "skipped"
            log.warning("trivial-minimum diagnostics failed at kappa=%g: %s", kappa, exc)

        if not res.converged:
            failures.append(f"convergence: stage kappa={kappa:g} hit the iteration cap")
        stages.append(stage)
    return stages, failures


def _bounds_section(state: State, models) -> dict:
    mask = state.grid.mask
    worst = 0.0
    count = 0
    for i, m in enumerate(models):
        dev = np.maximum(-state.u[i], state.u[i] - m.A)
        dev = dev[mask]
        over = dev > 1e-9
        count += int(np.count_nonzero(over))
        if dev.size:
            worst = max(worst, float(dev.max()))
    return {"violations": count, "worst": worst, "tolerance": 1e-9}


def _kvar_tol(kappa: float) -> float:
    # exactness only holds in the limit; allow the finite-kappa interface scale
    return 1.0 / max(kappa, 1.0)


def _format_kappa(kappa: float) -> str:
    if kappa == int(kappa) and abs(kappa) < 1e15:
        return str(int(kappa))
    return f"{kappa:g}".replace("+", "")


def _dump_trace(res, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,I,residual,h1_core_distance\n")
        for it, (e, r, d) in enumerate(zip(res.energies, res.residuals, res.h1_distances)):
            fh.write(f"{it},{e:.12g},{r:.12g},{d:.12g}\n")


def _with_channel_width(spec: DomainSpec, width: float) -> DomainSpec:
    """Shrink every channel's thin dimension to `width`, keeping centerlines."""
    channels = []
    for r in spec.channels:
        if r.width <= r.height:
            channels.append(Rect(r.x + (r.width - width) / 2, r.y, width, r.height))
        else:
            channels.append(Rect(r.x, r.y + (r.height - width) / 2, r.width, width))
    return replace(spec, channels=tuple(channels))


def _sweep_one(args):
    config, models, assumptions, out_dir, width = args
    spec = _with_channel_width(config.domain, width)
    sub = os.path.join(out_dir, f"eps_{width:g}")
    os.makedirs(sub, exist_ok=True)
    grid = build_domain(spec)
    cont = kappa_continuation(grid, models, config.kappa_schedule, config.solver,
                              kappa_threshold=assumptions.kappa_threshold)
    stages, failures = _stage_reports(cont, grid, models, assumptions, sub)
    mu, tau = reference_energies(grid, models)
    final = cont.stages[-1]
    entry = {
        "width": width,
        "channel_measure": measure(grid, "channel"),
        "tau_eps": tau,
        "sigma_eps": stages[-1]["sandwich"]["sigma_eps"]
        if isinstance(stages[-1]["sandwich"], dict) else None,
        "distance_sq": final.h1_core_distance ** 2,
        "energy": final.energy,
        "mu": mu,
        "stages": stages,
    }
    return entry, failures


def _run_sweep(config: RunConfig, models, assumptions, out_dir):
    """Returns ({"entries": ..., "trends": ...}, hard_failures)."""
    tasks = [(config, models, assumptions, out_dir, w) for w in config.sweep]
    failures: list[str] = []
    if config.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    entries = []
    for (entry, fails), width in zip(results, config.sweep):
        entries.append(entry)
        failures.extend(f"eps={width:g}: {f}" for f in fails)

    # perturbation trend: every shrinking-channel quantity should shrink too
    trends = {}
    for key in ("tau_eps", "sigma_eps", "distance_sq"):
        vals = [e[key] for e in entries]
        decreasing = (all(v is not None for v in vals)
                      and all(b < a for a, b in zip(vals, vals[1:])))
        trends[key] = {"values": vals, "strictly_decreasing": decreasing}
    return {"entries": entries, "trends": trends}, failures
