"""Two-mode Gross-Pitaevskii dynamics of the coupled rings.

State variables are the population imbalance Z = (N_b - N_a) / N_T and the
phase difference Theta = theta_a - theta_b, evolved in the dimensionless time
s_tilde = 2 g s / hbar.
"""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .. import settings
from ..errors import DomainError, IntegrationError
from ..items import State, SystemParams, Trajectory

logger = logging.getLogger(__name__)


class Derivatives(NamedTuple):
    dZ: float
    dTheta: float
    singular: bool = False


def _check_z(Z):
    if not abs(Z) <= 1.0:
        raise DomainError(f"|Z| must not exceed 1, got Z={Z}")


def energy(Z, Theta, p: SystemParams):
    """Vectorised H = lambda_rho Z^2 / 2 + Delta Z - sqrt(1 - Z^2) cos(Theta)."""
    Z = np.asarray(Z, dtype=float)
    root = np.sqrt(np.clip(1.0 - Z * Z, 0.0, None))
    return 0.5 * p.lambda_rho * Z * Z + p.delta * Z - root * np.cos(Theta)


def hamiltonian(state: State, p: SystemParams) -> float:
    """Conserved energy of the two-mode model."""
    _check_z(state.Z)
    return float(energy(state.Z, state.Theta, p))


def rhs(state: State, p: SystemParams) -> Derivatives:
    """Hamilton equations (dZ/ds, dTheta/ds) = (-dH/dTheta, dH/dZ).

    At |Z| = 1 the phase equation is singular; the result then carries
    ``singular=True`` and a NaN phase velocity.
    """
    _check_z(state.Z)
    root = math.sqrt(1.0 - state.Z * state.Z)
    dZ = -root * math.sin(state.Theta)
    if root == 0.0:
        return Derivatives(dZ, math.nan, True)
    dTheta = p.delta + p.lambda_rho * state.Z + state.Z * math.cos(state.Theta) / root
    return Derivatives(dZ, dTheta)


def josephson_current(state: State, N_T=1.0, g=1.0, dimensionless=False) -> float:
    """Inter-ring current I = I0 sqrt(1 - Z^2) sin(Theta), I0 = g N_T / hbar.

    With ``dimensionless=True`` the ratio I / I0 is returned.
    """
    _check_z(state.Z)
    ratio = math.sqrt(1.0 - state.Z * state.Z) * math.sin(state.Theta)
    return ratio if dimensionless else g * N_T * ratio


def current_series(traj: Trajectory) -> np.ndarray:
    """I / I0 along a trajectory."""
    return np.sqrt(np.clip(1.0 - traj.Z**2, 0.0, None)) * np.sin(traj.Theta)


def _sample_grid(s_max, sample_ds):
    n = int(math.floor(s_max / sample_ds + 1e-9))
    grid = sample_ds * np.arange(n + 1)
    if s_max - grid[-1] > 1e-12 * max(1.0, s_max):
        grid = np.append(grid, s_max)
    return grid


def _wrap(theta):
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def _solver_tolerances(rel_tol, abs_tol, factor):
    return max(rel_tol * factor, settings.SOLVER_TOL_FLOOR), abs_tol * factor


def _run_chunks(field, events_for, y0, grid, s_max, rtol, atol):
    """Integrate chunk by chunk, re-wrapping the phase at every boundary.

    Returns the sampled (s, Z, Theta), the stop event index (or None) and
    solver counters. Theta is unwrapped back onto the running phase.
    """
    s_out, z_out, th_out = [], [], []
    y = np.array(y0, dtype=float)
    offset = 0.0
    start = 0.0
    next_index = 0
    stopped_by = None
    nfev = chunks = 0

    while start < s_max and next_index < len(grid):
        stop = min(start + settings.PHASE_WRAP_INTERVAL, s_max)
        events = events_for(offset)
        sol = solve_ivp(field, (start, stop), y, method="DOP853", rtol=rtol, atol=atol, dense_output=True, events=events)
        nfev += sol.nfev
        chunks += 1
        if sol.status == -1:
            raise IntegrationError(f"Integration failed at s={sol.t[-1]:.6g}: {sol.message}")

        end = sol.t[-1]
        last = next_index + int(np.searchsorted(grid[next_index:], end, side="right"))
        if last > next_index:
            values = sol.sol(grid[next_index:last])
            s_out.append(grid[next_index:last])
            z_out.append(values[0])
            th_out.append(values[1] + offset)
            next_index = last

        if sol.status == 1:
            if end > (s_out[-1][-1] if s_out else -1.0):
                s_out.append(np.array([end]))
                z_out.append(np.array([sol.y[0, -1]]))
                th_out.append(np.array([sol.y[1, -1] + offset]))
            stopped_by = next(i for i, t in enumerate(sol.t_events) if len(t))
            break

        theta_end = sol.y[1, -1]
        wrapped = _wrap(theta_end)
        offset += theta_end - wrapped
        y = np.array([sol.y[0, -1], wrapped])
        start = stop

    return np.concatenate(s_out), np.concatenate(z_out), np.concatenate(th_out), stopped_by, nfev, chunks


def integrate(
    p: SystemParams,
    z0: float,
    theta0: float,
    s_max: float = settings.DEFAULT_S_MAX,
    rel_tol: float = settings.DEFAULT_REL_TOL,
    abs_tol: float = settings.DEFAULT_ABS_TOL,
    sample_ds: float = settings.DEFAULT_SAMPLE_DS,
    theta_span: Optional[float] = None,
) -> Trajectory:
    """Integrate the two-mode equations with DOP853 and sample the dense output.

    Args:
        p (SystemParams): Dynamical parameters.
        z0, theta0 (float): Initial imbalance and phase.
        s_max (float): End of the time window.
        rel_tol, abs_tol (float): Accuracy targets, each in (0, 1e-3]. DOP853 runs
            SOLVER_TOL_FACTOR tighter, and tighter still while the energy
            drift exceeds ENERGY_DRIFT_FACTOR x rel_tol.
        sample_ds (float): Output spacing in s_tilde.
        theta_span (float, optional): Stop once |Theta - theta0| reaches this value.

    Returns:
        Trajectory: Samples on the requested grid; ``singular`` is set when the
        run was cut short because |Z| reached 1.

    Raises:
        DomainError: Invalid initial condition, window or tolerances.
        IntegrationError: The solver failed (step-size underflow).
    """
    _check_z(z0)
    if not (s_max > 0 and math.isfinite(s_max)):
        raise DomainError(f"s_max must be positive and finite, got {s_max}")
    for name, tol in (("rel_tol", rel_tol), ("abs_tol", abs_tol)):
        if not 0 < tol <= settings.MAX_TOLERANCE:
            raise DomainError(f"{name} must lie in (0, {settings.MAX_TOLERANCE}], got {tol}")
    if not sample_ds > 0:
        raise DomainError(f"sample_ds must be positive, got {sample_ds}")

    limit = 1.0 - settings.SINGULAR_MARGIN
    meta = {"method": "DOP853", "rel_tol": rel_tol, "abs_tol": abs_tol, "sample_ds": sample_ds, "nfev": 0, "chunks": 0}
    if abs(z0) >= limit:
        logger.warning(f"Initial imbalance z0={z0} sits on the singular boundary |Z| = 1.")
        Z = np.array([float(z0)])
        Theta = np.array([float(theta0)])
        return Trajectory(np.zeros(1), Z, Theta, energy(Z, Theta, p), p, meta, singular=True)

    lr, drive = p.lambda_rho, p.delta

    def field(_, y):
        Z, Theta = y
        root = math.sqrt(max(1.0 - Z * Z, settings.SINGULAR_MARGIN))
        return [-root * math.sin(Theta), drive + lr * Z + Z * math.cos(Theta) / root]

    def hits_boundary(_, y):
        return limit - abs(y[0])

    hits_boundary.terminal = True
    hits_boundary.direction = -1

    def events_for(offset):
        if theta_span is None:
            return [hits_boundary]

        def spans_window(_, y):
            return theta_span - abs(y[1] + offset - theta0)

        spans_window.terminal = True
        return [hits_boundary, spans_window]

    grid = _sample_grid(s_max, sample_ds)
    bound = settings.ENERGY_DRIFT_FACTOR * rel_tol
    rtol, atol = _solver_tolerances(rel_tol, abs_tol, settings.SOLVER_TOL_FACTOR)
    while True:
        s_tilde, Z, Theta, stopped_by, nfev, chunks = _run_chunks(field, events_for, (z0, theta0), grid, s_max, rtol, atol)
        meta["nfev"] += nfev
        meta["chunks"] += chunks
        H = energy(Z, Theta, p)
        drift = float(np.max(np.abs(H - H[0])))
        if drift <= bound or rtol <= settings.SOLVER_TOL_FLOOR:
            break
        logger.info(f"Energy drift {drift:.3g} above {bound:.3g}; repeating with tighter solver tolerances.")
        rtol, atol = _solver_tolerances(rtol, atol, settings.SOLVER_RETRY_FACTOR)

    singular = stopped_by == 0
    if singular:
        logger.warning(f"Trajectory reached |Z| = 1 at s={s_tilde[-1]:.6g}; output truncated.")
    meta["solver_rtol"] = rtol
    meta["solver_atol"] = atol
    meta["max_energy_drift"] = drift
    meta["energy_drift_ok"] = drift <= bound
    if not meta["energy_drift_ok"]:
        logger.warning(f"Energy drift {drift:.3g} exceeds {settings.ENERGY_DRIFT_FACTOR} x rel_tol.")
    logger.debug(f"Integrated to s={s_tilde[-1]:.6g} with {meta['nfev']} evaluations in {meta['chunks']} chunks.")
    return Trajectory(s_tilde, Z, Theta, H, p, meta, singular=singular)
