import logging
import time

import numpy as np

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('confhor.analyze')

from lib import __version__
from lib.errors import HypothesisViolated, InconclusiveRefinement, NonCausalZ
from lib.exact_solutions import catalog, mass_ratio_grid, verdict
from lib.mass_geometry import (GRADIENT_TOL, REGION_TOL, calibrate_tau, curvature_conditions, energy_condition,
                               horizon_profile, mass_grid, stay_criterion)
from lib.penrose_bound import QuadratureGrid, penrose_bound
from lib.report import build_report, to_jsonable, write_report
from lib.types import MassSource, Stage

SAMPLE_LOG_OMEGA0 = (-3.0, -1.0, -0.3, -0.1)
STAY_S_MAX = 10.0


def _has_gauge(entry):
    return getattr(entry.metric, 'temporal_gauge', None) is not None


def _skipped(reason):
    logger.info(f"Stage skipped: {reason}")
    return {"status": "skipped", "reason": reason}


def _mass_stage(entry, config, state):
    rows = entry.horizon_grid(config.grid)
    L = np.array(SAMPLE_LOG_OMEGA0)
    values = mass_grid(entry.metric, L, rows)
    result = {"status": "completed", "source": MassSource.GENERIC, "log_omega0": L, "rho": rows[:, 0],
              "m": values, "negative_fraction": float(np.mean(values < 0)),
              "min": float(np.nanmin(values)), "max": float(np.nanmax(values))}
    if entry.m_closed is not None:
        y = np.concatenate([np.broadcast_to(L[:, None, None], (len(L), len(rows), 1)),
                            np.broadcast_to(rows[None], (len(L),) + rows.shape)], axis=-1)
        ratios = mass_ratio_grid(entry, y)
        finite = ratios[np.isfinite(ratios)]
        result["closed_form_ratio"] = {"source": entry.closed_source, "samples": int(finite.size),
                                       "positive": bool(np.all(finite > 0)),
                                       "min": float(finite.min()) if finite.size else None,
                                       "max": float(finite.max()) if finite.size else None}
    return result


def _horizon_stage(entry, config, state):
    profile = horizon_profile(entry.metric, entry.horizon_grid(config.grid), state["threads"])
    state["profile"] = profile
    return {"status": "completed", "solved": len(profile.ok), "skipped": len(profile.nodes) - len(profile.ok),
            "root_tol": config.root_tol, "nodes": profile.nodes}


def _naked_stage(entry, config, state):
    try:
        result = verdict(entry, depth=config.refine_depth, threads=state["threads"], dtol=config.dtol)
    except InconclusiveRefinement as e:
        logger.warning(f"{entry.name}: {e}")
        return {"status": "inconclusive", "message": str(e), "traces": e.trace, "dtol": config.dtol}
    return {"status": "completed", "verdict": result.verdict, "limit_points": result.limit_points,
            "traces": result.traces, "diagnostics": result.diagnostics, "expected": entry.expected,
            "dtol": config.dtol, "depth": config.refine_depth}


def _condition_samples(entry, config):
    rows = entry.horizon_grid(config.grid)
    L = np.array(SAMPLE_LOG_OMEGA0)
    return np.concatenate([np.column_stack([np.full(len(rows), value), rows]) for value in L])


def _conditions_stage(entry, config, state):
    if not _has_gauge(entry):
        return _skipped(f"{entry.name} is not in temporal gauge")
    samples = _condition_samples(entry, config)
    conditions = curvature_conditions(entry.metric, samples)
    result = {"status": "completed", "samples": len(samples),
              "strict_fraction": conditions.strict_fraction, "general_fraction": conditions.general_fraction,
              "trK_max": float(np.max(conditions.trK)), "K_grad_min": float(np.min(conditions.K_grad)),
              "tau_calibration": calibrate_tau(entry.metric, samples[::max(1, len(samples) // 16)])}
    try:
        energy = energy_condition(entry.metric, lambda y: np.array([-1.0, 0.0, 0.0, 0.0]),
                                  samples[::max(1, len(samples) // 16)])
        result["energy_minimum"] = energy.minimum
        result["black_hole_exists"] = energy.black_hole_exists
    except NonCausalZ as e:
        logger.warning(f"Energy condition not testable: {e}")
        result["energy_minimum"] = None
    return result


def _stay_stage(entry, config, state):
    profile = state.get("profile") or horizon_profile(entry.metric, entry.horizon_grid(config.grid),
                                                      state["threads"])
    nodes = profile.ok
    if not nodes:
        raise HypothesisViolated(f"{entry.name}: no horizon node to start the stay test from")
    node = nodes[len(nodes) // 2]
    start = 0.5 * node.X

    def curve(s):
        return [node.omega1] + list(node.angles)

    leaving = stay_criterion(entry.metric, profile, curve, lambda s: np.array([1.0, 0.0, 0.0, 0.0]),
                             start, STAY_S_MAX)
    staying = stay_criterion(entry.metric, profile, curve, lambda s: np.array([-1.0, 0.0, 0.0, 0.0]),
                             start, STAY_S_MAX)
    return {"status": "completed", "omega1": node.omega1, "omega0_start": start,
            "exit_s": leaving.exit_s, "expected_exit_s": node.X - start,
            "nonnegative_energy_stays": staying.stays, "identity_gap": max(leaving.identity_gap,
                                                                           staying.identity_gap)}


def _penrose_stage(entry, config, state):
    if not _has_gauge(entry):
        return _skipped(f"{entry.name} is not in temporal gauge")
    grid = QuadratureGrid.for_chart(entry.chart, config.quad_nodes)
    report = penrose_bound(entry, grid, config.band, state["threads"])
    result = {"status": "completed", "holds": report.holds}
    result.update(to_jsonable(report))
    result["cutoff_within_tolerance"] = report.M_sq_error <= config.quad_tol * max(1.0, abs(report.M_sq))
    return result


STAGES = {
    Stage.MASS: _mass_stage,
    Stage.HORIZON: _horizon_stage,
    Stage.NAKED: _naked_stage,
    Stage.CONDITIONS: _conditions_stage,
    Stage.STAY: _stay_stage,
    Stage.PENROSE: _penrose_stage,
}


def _provenance(entry):
    return {"library": "confhor", "version": __version__, "metric": entry.name, "params": entry.params,
            "closed_form_source": entry.closed_source if entry.m_closed is not None else None,
            "tau_normalization": "sqrt(|gbar|)/Omega", "region_tol": REGION_TOL, "gradient_tol": GRADIENT_TOL}


def cmd_analyze(config, threads=None):
    """Run the enabled stages on the configured catalog metric and write the JSON report."""
    entry = catalog(config.metric, **config.catalog_params())
    state = {"threads": threads or config.threads or None}
    stages, timing = {}, {}
    try:
        for stage in config.stages:
            logger.info(f"Stage {stage.value} on {entry.name}")
            start = time.perf_counter()
            try:
                stages[stage.value] = STAGES[stage](entry, config, state)
            except Exception as e:
                stages[stage.value] = {"status": "failed", "error": type(e).__name__, "message": str(e)}
                raise
            finally:
                timing[stage.value] = time.perf_counter() - start
    finally:
        for stage in config.stages:
            if stage.value not in stages:
                stages[stage.value] = {"status": "skipped", "reason": "an earlier stage failed"}
        report = build_report(config.as_dict(), stages, _provenance(entry), timing)
        write_report(report, config.out)
    return report
