"""Command-line front end.

Exit codes: 0 success, 2 invalid configuration, 3 runtime failure,
4 analytic/numeric disagreement above the thresholds.
"""

import argparse
import asyncio
import logging
import sys

from . import __version__, settings
from .config import build_config, flag_name
from .errors import ConfigError, RingLadderError, VerificationError
from .items import MicroParams, OpticalSetup, QubitParams, State, SystemParams
from .physics import analytic, meanfield, mqst, optical_setup, oracle, qubit
from .pipelines import (
    save_data,
    write_csv,
    write_landscape_grid,
    write_portrait,
    write_potential,
    write_trajectory,
)
from .processing.sweep import build_payloads, run_sweep, sweep_columns

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4


def _add(parser, block, field, **kwargs):
    parser.add_argument(flag_name(block, field), dest=f"{block}.{field}", default=None, **kwargs)


def _add_system(parser, portrait=False):
    _add(parser, "system", "lambda_rho", type=float, help="interaction strength lambda*rho")
    _add(parser, "system", "delta", type=float, help="drive Delta")
    if portrait:
        _add(parser, "system", "z0_list", type=float, nargs="+", help="initial imbalances, one curve each")
    else:
        _add(parser, "system", "z0", type=float, help="initial imbalance Z0")
    _add(parser, "system", "theta0", type=float, help="initial phase difference")


def _add_integrate(parser):
    _add(parser, "integrate", "s_max", type=float, help="end of the time window in s_tilde")
    _add(parser, "integrate", "rel_tol", type=float)
    _add(parser, "integrate", "abs_tol", type=float)
    _add(parser, "integrate", "sample_ds", type=float, help="output spacing in s_tilde")


def _add_classification(parser):
    _add(parser, "compare", "delta_tol", type=float, help="relative tolerance for a vanishing discriminant")
    parser.add_argument(
        "--printed-modulus", dest="compare.modulus", action="store_const", const="printed", default=None,
        help="use the elliptic parameter without the square root (negative control)",
    )
    _add(parser, "compare", "perturbative", action="store_const", const=True, help="report weak-coupling orbits as SMALL_LR")


def _add_output(parser, formats=False):
    _add(parser, "output", "path", help="output file, '-' for standard output")
    if formats:
        _add(parser, "output", "format", choices=["csv", "json"])


def build_parser():
    parser = argparse.ArgumentParser(prog="ring_ladder", description="Josephson dynamics of two coupled ring condensates.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON config file; flags override its values")

    p = sub.add_parser("simulate", parents=[common], help="integrate the two-mode equations")
    _add_system(p)
    _add_integrate(p)
    _add_output(p)
    _add(p, "output", "with_current", action="store_const", const=True, help="add an I_over_I0 column")

    p = sub.add_parser("classify", parents=[common], help="regime report of one initial condition")
    _add_system(p)
    _add_classification(p)
    _add_output(p)

    p = sub.add_parser("compare", parents=[common], help="closed form against direct integration")
    _add_system(p)
    _add_integrate(p)
    _add_classification(p)
    _add(p, "compare", "max_abs_err", type=float)
    _add(p, "compare", "period_rel_err", type=float)
    _add(p, "compare", "mean_abs_err", type=float)
    _add_output(p)

    p = sub.add_parser("portrait", parents=[common], help="phase-space curves")
    _add_system(p, portrait=True)
    _add_integrate(p)
    _add_output(p)
    _add(p, "output", "potential", help="also write the U(Z) / f(Z) table here")

    p = sub.add_parser("landscape", parents=[common], help="minima and barriers of the qubit potential")
    _add(p, "qubit", "E_J", type=float)
    _add(p, "qubit", "E_Jp_ratio", type=float, help="E_J' / E_J")
    _add(p, "qubit", "Phi_diff", type=float, help="Phi_a - Phi_b")
    _add(p, "qubit", "N", type=int, help="sites per ring (even)")
    _add(p, "qubit", "U_int", type=float)
    _add(p, "qubit", "beta", type=float)
    _add(p, "qubit", "l_max", type=int)
    _add(p, "qubit", "grid_resolution", type=int)
    _add(p, "qubit", "at_degeneracy", action="store_const", const=True, help="use the flux difference of equal wells")
    _add_output(p)
    _add(p, "output", "grid", help="write the sampled (theta_a, theta_b, U) grid here")

    p = sub.add_parser("sweep", parents=[common], help="classify a line of parameters")
    _add_system(p)
    _add_integrate(p)
    _add_classification(p)
    _add(p, "sweep", "axis", choices=["z0", "lambda_rho", "delta", "theta0"])
    _add(p, "sweep", "start", type=float)
    _add(p, "sweep", "stop", type=float)
    _add(p, "sweep", "steps", type=int)
    _add(p, "sweep", "jobs", type=int, help=f"worker processes (env RING_LADDER_JOBS, default {settings.DEFAULT_JOBS})")
    _add(p, "sweep", "resume", action="store_const", const=True, help="reuse <output>.partial.json")
    _add(p, "sweep", "verify", action="store_const", const=True, help="add ODE comparison columns")
    _add_output(p, formats=True)

    p = sub.add_parser("setup-params", parents=[common], help="trap geometry and reduced parameters")
    for name, kind in (
        ("E0_sq", float), ("l", int), ("k_LG", float), ("wavelength_lambda", float),
        ("focal_f", float), ("beam_sep_D", float), ("mass_m", float), ("r0", float),
    ):
        _add(p, "optics", name, type=kind)
    for name, kind in (
        ("t", float), ("g", float), ("U", float), ("mu_a", float), ("mu_b", float),
        ("Phi_a", float), ("Phi_b", float), ("N", int), ("N_T", float),
    ):
        _add(p, "micro", name, type=kind)
    _add_output(p)
    return parser


def _overrides(args):
    nested = {}
    for dest, value in vars(args).items():
        if "." in dest and value is not None:
            block, field = dest.split(".", 1)
            nested.setdefault(block, {})[field] = value
    return nested


def _system(config):
    return SystemParams(lambda_rho=config.system.lambda_rho, delta=config.system.delta)


def cmd_simulate(config):
    s = config.system
    traj = meanfield.integrate(
        _system(config), s.z0, s.theta0,
        s_max=config.integrate.s_max, rel_tol=config.integrate.rel_tol,
        abs_tol=config.integrate.abs_tol, sample_ds=config.integrate.sample_ds,
    )
    write_trajectory(traj, config.output.path, with_current=config.output.with_current)
    return EXIT_OK


def cmd_classify(config):
    s, c = config.system, config.compare
    p = _system(config)
    report = analytic.classify(p, s.z0, s.theta0, modulus=c.modulus, perturbative=c.perturbative, delta_tol=c.delta_tol)
    record = report.to_record()
    record["Zc"] = mqst.critical_imbalance(p.lambda_rho, s.theta0) if p.delta == 0 else None
    record["delta_tol"] = c.delta_tol if c.delta_tol is not None else settings.DELTA_REL_TOL
    record["modulus"] = c.modulus
    record["allowed_regions"] = None
    if p.lambda_rho > 0:
        regions = mqst.allowed_regions(p, report.H0)
        record["allowed_regions"] = {"intervals": [list(i) for i in regions.intervals], "turning_points": list(regions.turning_points)}
    save_data(record, config.output.path)
    return EXIT_OK


def cmd_compare(config):
    s, c, i = config.system, config.compare, config.integrate
    result = oracle.compare(
        _system(config), s.z0, s.theta0,
        s_max=i.s_max, modulus=c.modulus, delta_tol=c.delta_tol, perturbative=c.perturbative,
        rel_tol=i.rel_tol, abs_tol=i.abs_tol, sample_ds=i.sample_ds,
        max_abs_err=c.max_abs_err, period_rel_err=c.period_rel_err, mean_abs_err=c.mean_abs_err,
    )
    save_data(result.to_record(), config.output.path)
    oracle.verify(result)
    return EXIT_OK


def cmd_portrait(config):
    s = config.system
    p = _system(config)
    curves = mqst.portrait(p, s.z0_list, s.theta0)
    write_portrait(curves, config.output.path)
    if config.output.potential:
        tables = []
        for z0 in s.z0_list:
            H0 = meanfield.hamiltonian(State(z0, s.theta0), p)
            tables.append(mqst.potential_curve(p, H0, [-1.0 + 2.0 * j / 400 for j in range(401)]))
        write_potential(tables, config.output.potential)
    return EXIT_OK


def cmd_landscape(config):
    qb = config.qubit
    q = QubitParams(
        E_J=qb.E_J, E_Jp=qb.E_Jp_ratio * qb.E_J, N=qb.N, U_int=qb.U_int, beta=qb.beta, l_max=qb.l_max,
    )
    q = qubit.with_flux_difference(q, qubit.degeneracy_bias(q) if qb.at_degeneracy else qb.Phi_diff)
    landscape = qubit.find_minima(q, qb.grid_resolution)
    record = {"phi_diff": q.phi_diff, "E_J": q.E_J, "E_Jp": q.E_Jp, "N": q.N, **landscape.to_record()}
    save_data(record, config.output.path)
    if config.output.grid:
        write_landscape_grid(landscape, config.output.grid)
    return EXIT_OK


def cmd_sweep(config):
    payloads = build_payloads(config)
    rows = asyncio.run(
        run_sweep(payloads, config.output.path, jobs=config.sweep.jobs, resume=config.sweep.resume)
    )
    if config.output.format == "json":
        save_data(rows, config.output.path)
    else:
        write_csv(sweep_columns(config.sweep.verify), rows, config.output.path)
    return EXIT_OK


def cmd_setup_params(config):
    setup = OpticalSetup(**config.optics.model_dump())
    record = optical_setup.setup_summary(setup)
    if config.micro.given:
        micro = MicroParams(**config.micro.model_dump())
        p = optical_setup.reduce_params(micro)
        record["system"] = {"lambda_rho": p.lambda_rho, "delta": p.delta, "omega0": p.omega0}
        record["Zc"] = mqst.critical_imbalance(p.lambda_rho) if p.delta == 0 else None
    save_data(record, config.output.path)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "compare": cmd_compare,
    "portrait": cmd_portrait,
    "landscape": cmd_landscape,
    "sweep": cmd_sweep,
    "setup-params": cmd_setup_params,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level or settings.LOG_LEVEL, logging.WARNING),
        format=settings.LOG_FORMAT,
        stream=sys.stderr,
    )
    try:
        config = build_config(args.command, _overrides(args), args.config)
        return COMMANDS[args.command](config)
    except ConfigError as e:
        for violation in e.violations:
            print(violation, file=sys.stderr)
        return EXIT_CONFIG
    except VerificationError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except RingLadderError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130
