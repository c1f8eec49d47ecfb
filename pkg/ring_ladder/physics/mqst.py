"""Self-trapping analysis: critical imbalance, classical-particle picture,
allowed regions, phase portraits and detection of self-trapping on sampled
trajectories.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .. import settings
from ..errors import DomainError, InsufficientDataError, OutOfAllowedRegionError
from ..items import AllowedRegions, PortraitCurve, State, SystemParams, Topology, Trajectory
from .analytic import quartic
from .meanfield import hamiltonian, integrate

logger = logging.getLogger(__name__)

# Roots of f closer than this are one double root.
DOUBLE_ROOT_GAP = 1e-6


def critical_imbalance(lambda_rho, theta0=0.0) -> Optional[float]:
    """Positive critical imbalance Zc of the undriven system, or None below lr = 1.

    Zc^2 = 2 [(lr - c^2) + |c| sqrt((lr - 1)^2 + c^2 - 1)] / lr^2 with c = cos(theta0),
    which is 2 sqrt(lr - 1) / lr for theta0 = 0.
    """
    lr = lambda_rho
    # No self-trapping threshold below unit coupling.
    if lr < 1.0:
        return None
    c2 = math.cos(theta0) ** 2
    radicand = (lr - 1.0) ** 2 + c2 - 1.0
    if radicand < 0:
        return None
    x = 2.0 * ((lr - c2) + math.sqrt(c2) * math.sqrt(radicand)) / lr**2
    if x < 0:
        return None
    return min(1.0, math.sqrt(x))


def critical_imbalances(lambda_rho, theta0=0.0):
    zc = critical_imbalance(lambda_rho, theta0)
    return None if zc is None else (-zc, zc)


def classical_potential(Z, p: SystemParams, H0):
    """Potential U(Z) and energy E = 1 - H0^2 of the equivalent classical particle.

    E - U(Z) = (lr / 2)^2 f(Z), i.e. (dZ/ds)^2 + U(Z) = E.
    """
    Z = np.asarray(Z, dtype=float)
    lr, drive = p.lambda_rho, p.delta
    U = Z * Z * (lr * lr * Z * Z / 4.0 + 1.0 + drive * drive - H0 * lr) + Z * (lr * drive * Z * Z - 2.0 * H0 * drive)
    return U, 1.0 - H0 * H0


def potential_curve(p: SystemParams, H0, z_grid) -> dict:
    """Tabulate U(Z), E and f(Z) for plotting."""
    z_grid = np.asarray(z_grid, dtype=float)
    U, E = classical_potential(z_grid, p, H0)
    f = quartic(p, H0).f_at(z_grid) if p.lambda_rho > 0 else (E - U)
    return {"Z": z_grid, "U": U, "E": np.full_like(z_grid, E), "f": f}


def _double_roots(roots, q):
    doubles = []
    for a, b in zip(roots, roots[1:]):
        if b - a < DOUBLE_ROOT_GAP:
            doubles.append(0.5 * (a + b))
    for r in roots:
        if abs(q.f_prime(r)) < 1e-8 and all(abs(r - d) > DOUBLE_ROOT_GAP for d in doubles):
            doubles.append(r)
    return doubles


def allowed_regions(p: SystemParams, H0) -> AllowedRegions:
    """Intervals of [-1, 1] where f(Z) >= 0; intervals meeting at a double root are merged."""
    q = quartic(p, H0)
    roots = q.real_roots()
    intervals = []
    for a, b in zip(roots, roots[1:]):
        if b - a < DOUBLE_ROOT_GAP:
            continue
        if q.f_at(0.5 * (a + b)) > 0:
            if intervals and a - intervals[-1][1] < DOUBLE_ROOT_GAP:
                intervals[-1] = (intervals[-1][0], b)
            else:
                intervals.append((a, b))
    turning = tuple(x for pair in intervals for x in pair)
    return AllowedRegions(intervals=tuple(intervals), turning_points=turning)


def _cos_phase(Z, p, H0):
    Z = np.asarray(Z, dtype=float)
    return (0.5 * p.lambda_rho * Z * Z + p.delta * Z - H0) / np.sqrt(1.0 - Z * Z)


def phase_of_Z(Z, p: SystemParams, H0, branch=1):
    """Phase difference on the energy level H0 at imbalance Z.

    cos(Theta) = (lr Z^2 / 2 + Delta Z - H0) / sqrt(1 - Z^2); ``branch=1`` returns
    the principal value in [0, pi], ``branch=-1`` its mirror image.

    Raises:
        OutOfAllowedRegionError: Z lies where f(Z) < 0.
    """
    if np.any(np.abs(np.asarray(Z)) >= 1.0):
        raise DomainError("phase reconstruction needs |Z| < 1")
    c = _cos_phase(Z, p, H0)
    if np.any(np.abs(c) > 1.0 + 1e-9):
        raise OutOfAllowedRegionError(f"Z outside the allowed region of H0={H0}")
    theta = np.arccos(np.clip(c, -1.0, 1.0))
    theta = branch * theta
    return float(theta) if np.ndim(theta) == 0 else theta


def _closed_curve(p, H0, lo, hi, n_points, centre_pi):
    j = np.arange(n_points)
    z = 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(math.pi * j / (n_points - 1))
    z = np.clip(z, lo, hi)
    theta = np.arccos(np.clip(_cos_phase(z, p, H0), -1.0, 1.0))
    if centre_pi:
        upper, lower = theta, 2.0 * math.pi - theta
    else:
        upper, lower = theta, -theta
    pts_theta = np.concatenate([upper, lower[::-1][1:]])
    pts_z = np.concatenate([z, z[::-1][1:]])
    return np.column_stack([pts_theta / math.pi, pts_z])


def portrait(
    p: SystemParams,
    z0_list,
    theta0=0.0,
    n_points=settings.PORTRAIT_POINTS,
    theta_window=settings.PORTRAIT_THETA_WINDOW,
):
    """Phase-space curves (Theta / pi, Z) for each initial imbalance.

    Librating orbits are assembled from ``phase_of_Z``; running-phase orbits
    are integrated until the phase has advanced by ``theta_window`` pi.
    """
    if p.lambda_rho <= 0:
        raise DomainError("phase portraits need lambda_rho > 0")
    curves = []
    for z0 in z0_list:
        H0 = hamiltonian(State(z0, theta0), p)
        regions = allowed_regions(p, H0)
        lo, hi = regions.containing(z0)
        q = quartic(p, H0)
        doubles = [d for d in _double_roots(q.real_roots(), q) if lo - DOUBLE_ROOT_GAP <= d <= hi + DOUBLE_ROOT_GAP]
        c_lo, c_hi = float(_cos_phase(lo, p, H0)), float(_cos_phase(hi, p, H0))

        if doubles:
            points = _closed_curve(p, H0, lo, hi, n_points, centre_pi=c_lo < 0 and c_hi < 0)
            topology = Topology.SEPARATRIX
        elif c_lo * c_hi > 0:
            points = _closed_curve(p, H0, lo, hi, n_points, centre_pi=c_lo < 0)
            topology = Topology.CLOSED
        else:
            rate = abs(p.delta) + p.lambda_rho + 1.0
            window = theta_window * math.pi
            traj = integrate(p, z0, theta0, s_max=max(50.0, 40.0 * window / rate), theta_span=window)
            points = np.column_stack([traj.Theta / math.pi, traj.Z])
            topology = Topology.OPEN
        logger.info(f"Portrait curve z0={z0}: {topology.value} with {len(points)} points")
        curves.append(PortraitCurve(z0=z0, points=points, topology=topology))
    return curves


def _upward_crossings(s, values):
    spline = CubicSpline(s, values)
    roots = spline.roots(extrapolate=False)
    return np.array([r for r in roots if spline(r, 1) > 0])


def measure_period(traj: Trajectory) -> float:
    """Mean period from successive upward crossings of Z through its mean."""
    mean = float(np.mean(traj.Z))
    crossings = _upward_crossings(traj.s_tilde, traj.Z - mean)
    if len(crossings) < 2:
        raise InsufficientDataError(f"only {len(crossings)} upward crossings in a span of {traj.span:.6g}")
    return float((crossings[-1] - crossings[0]) / (len(crossings) - 1))


def detect_mqst(traj: Trajectory, threshold=settings.MQST_THRESHOLD, expected_period=None):
    """Time-averaged imbalance over whole periods and the self-trapping flag.

    Returns:
        tuple: (mean_Z, mqst_flag) with mqst_flag = |mean_Z| > threshold.

    Raises:
        InsufficientDataError: fewer than three periods and a span below the aperiodic minimum.
    """
    s, Z = traj.s_tilde, traj.Z
    if len(s) < 4:
        raise InsufficientDataError("a trajectory needs at least four samples")
    spline = CubicSpline(s, Z)
    crossings = _upward_crossings(s, Z - float(np.mean(Z)))
    needed = settings.MIN_PERIODS_FOR_AVERAGE

    if len(crossings) >= needed + 1:
        a, b = crossings[0], crossings[-1]
    elif expected_period and math.isfinite(expected_period) and traj.span >= needed * expected_period:
        a = s[0]
        b = s[0] + math.floor(traj.span / expected_period) * expected_period
    elif traj.span >= settings.APERIODIC_MIN_SPAN:
        a, b = s[0], s[-1]
    else:
        raise InsufficientDataError(
            f"span {traj.span:.6g} covers fewer than {needed} periods and is shorter than {settings.APERIODIC_MIN_SPAN}"
        )
    mean = float(spline.integrate(a, b) / (b - a))
    return mean, abs(mean) > threshold
