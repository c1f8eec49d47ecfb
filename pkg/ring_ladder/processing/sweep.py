"""Resumable parameter sweeps over classify (and optionally compare).

Rows are checkpointed to ``<output>.partial.json`` while the sweep runs so an
interrupted sweep picks up where it stopped with ``resume=True``.
"""

import asyncio
import logging
import os
import sys
import time

import numpy as np
from tqdm import tqdm

from .. import settings
from ..items import SystemParams
from ..physics.analytic import classify
from ..physics.mqst import critical_imbalance
from ..physics.oracle import compare
from ..pipelines import load_data, save_data, to_jsonable
from .parallel_runner import run_concurrently

logger = logging.getLogger(__name__)

PARAMETER_COLUMNS = ["index", "lambda_rho", "delta", "z0", "theta0"]
REPORT_COLUMNS = [
    "branch", "H0", "k", "k_tilde", "C", "alpha", "zeta", "D", "g2", "g3", "discriminant", "roots",
    "period", "period_infinite", "frequency", "mean_Z", "midpoint_Z", "amplitude", "turning_points", "Zc", "mqst",
]
VERIFY_COLUMNS = ["max_abs_err", "period_rel_err", "mean_abs_err", "verified"]


def sweep_columns(verify=False):
    return PARAMETER_COLUMNS + REPORT_COLUMNS + (VERIFY_COLUMNS if verify else []) + ["error"]


def axis_values(start, stop, steps):
    if steps == 1:
        return [float(start)]
    return [float(v) for v in np.linspace(start, stop, steps)]


def build_payloads(config):
    """One payload per grid point; the swept axis overrides the system block."""
    base = {
        "lambda_rho": config.system.lambda_rho,
        "delta": config.system.delta,
        "z0": config.system.z0,
        "theta0": config.system.theta0,
        "modulus": config.compare.modulus,
        "delta_tol": config.compare.delta_tol,
        "perturbative": config.compare.perturbative,
        "verify": config.sweep.verify,
        "s_max": config.integrate.s_max,
        "rel_tol": config.integrate.rel_tol,
        "abs_tol": config.integrate.abs_tol,
        "sample_ds": config.integrate.sample_ds,
    }
    values = axis_values(config.sweep.start, config.sweep.stop, config.sweep.steps)
    return [{**base, config.sweep.axis: value} for value in values]


def evaluate_point(payload):
    """Classify one grid point; with ``verify`` also compare against the integrator."""
    p = SystemParams(lambda_rho=payload["lambda_rho"], delta=payload["delta"])
    report = classify(
        p,
        payload["z0"],
        payload["theta0"],
        modulus=payload["modulus"],
        perturbative=payload["perturbative"],
        delta_tol=payload["delta_tol"],
    )
    row = report.to_record()
    row["Zc"] = critical_imbalance(p.lambda_rho, payload["theta0"]) if p.delta == 0 else None
    if payload["verify"]:
        result = compare(
            p,
            payload["z0"],
            payload["theta0"],
            s_max=payload["s_max"],
            modulus=payload["modulus"],
            delta_tol=payload["delta_tol"],
            perturbative=payload["perturbative"],
            rel_tol=payload["rel_tol"],
            abs_tol=payload["abs_tol"],
            sample_ds=payload["sample_ds"],
        )
        row.update(
            max_abs_err=result.max_abs_err,
            period_rel_err=result.period_rel_err,
            mean_abs_err=result.mean_abs_err,
            verified=result.passed,
        )
    return to_jsonable(row)


def checkpoint_path(output_path):
    return None if output_path == "-" else f"{output_path}.partial.json"


def load_checkpoint(path, payloads):
    """Rows of a previous run whose payload matches the current grid point."""
    if not path or not os.path.exists(path):
        return {}
    try:
        data = load_data(path)
        stored_payloads = data["payloads"]
        stored_rows = data["rows"]
    except (ValueError, KeyError, TypeError, OSError) as e:
        logger.warning(f"Could not load checkpoint '{path}'. Starting from scratch. Error: {e}")
        return {}
    finished = {}
    for key, row in stored_rows.items():
        index = int(key)
        if index < len(payloads) and index < len(stored_payloads) and stored_payloads[index] == to_jsonable(payloads[index]):
            finished[index] = row
    logger.info(f"Resuming: {len(finished)} of {len(payloads)} grid points already done.")
    return finished


def _row(index, payload, result, error):
    row = {"index": index, **{k: payload[k] for k in ("lambda_rho", "delta", "z0", "theta0")}}
    if result:
        row.update(result)
    row["error"] = error
    return row


async def run_sweep(
    payloads,
    output_path="-",
    jobs=settings.DEFAULT_JOBS,
    resume=False,
    save_every=settings.SWEEP_SAVE_EVERY,
    worker=evaluate_point,
):
    """Evaluate every payload and return the rows in input order.

    Progress is saved every ``save_every`` results and once more when the run
    is interrupted; the checkpoint is removed after a complete run.
    """
    partial = checkpoint_path(output_path)
    rows = load_checkpoint(partial, payloads) if resume else {}
    pending = [i for i in range(len(payloads)) if i not in rows]
    newly_done = 0
    completed = False

    def save():
        if partial:
            save_data({"payloads": payloads, "rows": {str(i): r for i, r in sorted(rows.items())}}, partial)
            logger.info(f"Progress saved at {time.strftime('%Y-%m-%d %H:%M:%S')} ({len(rows)}/{len(payloads)} points)")

    try:
        with tqdm(total=len(payloads), initial=len(rows), desc="sweep", file=sys.stderr, disable=None) as bar:
            async for outcome in run_concurrently(worker, [payloads[i] for i in pending], jobs=jobs, indices=pending):
                index = outcome.get("index")
                if index is None:
                    logger.error(f"Sweep result missing 'index': {outcome}. Skipping this result.")
                    continue
                rows[index] = _row(index, payloads[index], outcome["result"], outcome["error"])
                newly_done += 1
                bar.update(1)
                if newly_done % save_every == 0:
                    save()
        completed = True
    except KeyboardInterrupt:
        logger.warning("KeyboardInterrupt detected. Saving progress...")
        raise
    except asyncio.CancelledError:
        logger.warning("Sweep was cancelled. Saving progress...")
        raise
    finally:
        if completed:
            if partial and os.path.exists(partial):
                os.remove(partial)
        elif rows:
            save()

    failed = sum(1 for r in rows.values() if r.get("error"))
    if failed:
        logger.warning(f"{failed} of {len(payloads)} grid points failed. See the error column.")
    return [rows[i] for i in range(len(payloads))]
