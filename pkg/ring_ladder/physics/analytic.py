"""Closed-form solutions of the two-mode equations.

The imbalance obeys (dZ/ds)^2 = (lambda_rho / 2)^2 f(Z) with the quartic

    f(Z) = (2 / lr)^2 (1 - Z^2) - (Z^2 + 2 Delta Z / lr - 2 H0 / lr)^2
         = -Z^4 + 4 a1 Z^3 + 6 a2 Z^2 + 4 a3 Z + a4.

Depending on the parameters the solution is a sinusoid (lr = 0), a Jacobi
cn / dn / sech orbit (Delta = 0) or a Weierstrass orbit built on a real root
Z1 of f (Delta != 0):

    Z(s) = Z1 + (f'(Z1) / 4) / (wp(lr s / 2 + offset) - f''(Z1) / 24).

``classify`` picks the branch and precomputes everything the solution needs;
``solve`` evaluates it on an array of times.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .. import settings
from ..errors import DomainError, RingLadderError
from ..items import Branch, RegimeReport, State, SystemParams
from .elliptic import (
    depressed_cubic_roots,
    ellint_F,
    ellint_K,
    jacobi_sn_cn_dn,
    weierstrass_half_period,
    weierstrass_p_fraction,
)
from .meanfield import hamiltonian

logger = logging.getLogger(__name__)

# |k - 1| below this counts as the separatrix.
SEPARATRIX_K_TOL = 1e-12
# Roots of f with a larger imaginary part are complex.
ROOT_IMAG_TOL = 1e-6
# D = 1 - H0^2 / (1 + Delta^2) below this is the fixed point; rounding leaves D near 1e-16.
LINEAR_D_TOL = 1e-14

MODULUS_CHOICES = ("corrected", "printed")


@dataclass(frozen=True)
class QuarticData:
    """The characteristic quartic f(Z) for one energy level."""

    lambda_rho: float
    delta: float
    H0: float
    coefficients: tuple
    a1: float
    a2: float
    a3: float
    a4: float

    def f_at(self, Z):
        return np.polyval(self.coefficients, Z)

    def f_prime(self, Z):
        return np.polyval(np.polyder(self.coefficients), Z)

    def f_double_prime(self, Z):
        return np.polyval(np.polyder(self.coefficients, 2), Z)

    def f_unexpanded(self, Z):
        """f from its defining form, before expanding the square."""
        Z = np.asarray(Z, dtype=float)
        lr = self.lambda_rho
        return (2.0 / lr) ** 2 * ((1.0 - Z * Z) - (lr * Z * Z / 2.0 + self.delta * Z - self.H0) ** 2)

    @property
    def g2(self) -> float:
        return -self.a4 - 4.0 * self.a1 * self.a3 + 3.0 * self.a2**2

    @property
    def g3(self) -> float:
        a1, a2, a3, a4 = self.a1, self.a2, self.a3, self.a4
        return -a2 * a4 + 2.0 * a1 * a2 * a3 - a2**3 + a3**2 - a1**2 * a4

    def invariants(self, degenerate_tol=None):
        return depressed_cubic_roots(self.g2, self.g3, degenerate_tol)

    def real_roots(self) -> tuple:
        """Real roots of f in [-1, 1], ascending, from companion-matrix eigenvalues plus Newton polish."""
        found = []
        for root in np.roots(self.coefficients):
            if abs(root.imag) > ROOT_IMAG_TOL * max(1.0, abs(root.real)):
                continue
            z = self._polish(root.real)
            if -1.0 - 1e-9 <= z <= 1.0 + 1e-9:
                found.append(min(1.0, max(-1.0, z)))
        return tuple(sorted(found))

    def _polish(self, z):
        value = abs(self.f_at(z))
        for _ in range(3):
            slope = self.f_prime(z)
            if slope == 0.0:
                break
            trial = z - self.f_at(z) / slope
            trial_value = abs(self.f_at(trial))
            if trial_value >= value:
                break
            z, value = trial, trial_value
        return float(z)


def quartic(p: SystemParams, H0: float) -> QuarticData:
    """Characteristic quartic of the energy level H0.

    Raises:
        DomainError: lambda_rho = 0 (the dynamics is linear, see ``solve_linear``).
    """
    lr = p.lambda_rho
    if lr <= 0:
        raise DomainError("the quartic needs lambda_rho > 0; use solve_linear for the non-interacting case")
    b = 2.0 * p.delta / lr
    c = -2.0 * H0 / lr
    w = (2.0 / lr) ** 2
    coefficients = (-1.0, -2.0 * b, -(b * b + 2.0 * c + w), -2.0 * b * c, w - c * c)
    return QuarticData(
        lambda_rho=lr,
        delta=p.delta,
        H0=H0,
        coefficients=coefficients,
        a1=-p.delta / lr,
        a2=(2.0 / 3.0) * (lr * H0 - (p.delta**2 + 1.0)) / lr**2,
        a3=2.0 * H0 * p.delta / lr**2,
        a4=4.0 * (1.0 - H0 * H0) / lr**2,
    )


def _time_average(q: QuarticData, lo: float, hi: float):
    """(integral of dZ / sqrt f, time-averaged Z) over the allowed interval [lo, hi].

    With Z = mid + (w / 2) sin(phi) the integrable endpoint singularities drop out.
    """
    quotient, _ = np.polydiv(np.asarray(q.coefficients), np.poly([lo, hi]))
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def weight(phi):
        g = -np.polyval(quotient, mid + half * math.sin(phi))
        return 1.0 / math.sqrt(max(g, 1e-300))

    total, _ = quad(weight, -0.5 * math.pi, 0.5 * math.pi, epsabs=1e-13, epsrel=1e-12, limit=200)
    first, _ = quad(lambda phi: (mid + half * math.sin(phi)) * weight(phi), -0.5 * math.pi, 0.5 * math.pi, epsabs=1e-13, epsrel=1e-12, limit=200)
    return total, first / total


def _sign(x):
    return -1.0 if x < 0 else 1.0


def _sin_or_zero(theta):
    # sin(pi) is 1.2e-16, not 0; starts that close to a turning point are turning points.
    s = math.sin(theta)
    return 0.0 if abs(s) < 1e-12 else s


def _report_linear(p, z0, theta0, H0) -> RegimeReport:
    A = math.sqrt(1.0 + p.delta**2)
    B = p.delta * H0 / A**2
    D = 1.0 - H0 * H0 / A**2
    C = math.sqrt(max(D, 0.0))
    if D < LINEAR_D_TOL:
        return RegimeReport(
            branch=Branch.LINEAR_D0, lambda_rho=0.0, delta=p.delta, z0=z0, theta0=theta0, H0=H0,
            period=math.inf, mean_Z=z0, mqst=abs(z0) > settings.MQST_THRESHOLD, C=C, D=D,
            midpoint_Z=z0, turning_points=(z0, z0),
        )
    offset = math.atan2((z0 - B) * A, math.sqrt(1.0 - z0 * z0) * math.sin(theta0))
    return RegimeReport(
        branch=Branch.LINEAR_Dpos, lambda_rho=0.0, delta=p.delta, z0=z0, theta0=theta0, H0=H0,
        period=2.0 * math.pi / A, mean_Z=B, mqst=abs(B) > settings.MQST_THRESHOLD, C=C, D=D,
        midpoint_Z=B, amplitude=C / A, turning_points=(B - C / A, B + C / A), phase_offset=offset,
    )


def delta0_modulus(lr, H0, modulus="corrected"):
    """Elliptic parameter k of the Delta = 0 orbits.

    ``modulus="printed"`` drops the square root in the denominator; it exists
    only as a negative control and does not describe the dynamics.
    """
    R2 = lr * lr + 1.0 - 2.0 * H0 * lr
    if modulus == "printed":
        return 0.5 * (1.0 + (H0 * lr - 1.0) / R2)
    return 0.5 * (1.0 + (H0 * lr - 1.0) / math.sqrt(R2))


def _report_delta0(p, z0, theta0, H0, modulus, perturbative) -> RegimeReport:
    lr = p.lambda_rho
    R = math.sqrt(max(lr * lr + 1.0 - 2.0 * H0 * lr, 0.0))
    C2 = (2.0 / lr**2) * (H0 * lr - 1.0 + R)
    alpha2 = (2.0 / lr**2) * (R - (H0 * lr - 1.0))
    C = math.sqrt(max(C2, 0.0))
    alpha = math.sqrt(abs(alpha2))
    zeta = math.sqrt(2.0 * R)
    common = dict(lambda_rho=lr, delta=0.0, z0=z0, theta0=theta0, H0=H0, C=C, alpha=alpha, zeta=zeta)

    if C < settings.FROZEN_AMPLITUDE or R < settings.FROZEN_AMPLITUDE:
        return RegimeReport(branch=Branch.FROZEN_INF, period=math.inf, mean_Z=z0, mqst=abs(z0) > settings.MQST_THRESHOLD,
                            midpoint_Z=z0, turning_points=(z0, z0), **common)

    k = delta0_modulus(lr, H0, modulus)
    s_theta = _sin_or_zero(theta0)
    ratio = min(1.0, abs(z0) / C)
    sigma = _sign(z0)

    if abs(k - 1.0) <= SEPARATRIX_K_TOL:
        if z0 == 0.0:
            offset = math.inf
        else:
            offset = math.acosh(1.0 / ratio) * sigma * _sign(s_theta) if s_theta != 0 else 0.0
        return RegimeReport(branch=Branch.DELTA0_K_EQ1, period=math.inf, mean_Z=0.0, mqst=False, k=1.0,
                            midpoint_Z=0.5 * sigma * C, amplitude=C, turning_points=tuple(sorted((0.0, sigma * C))),
                            phase_offset=offset, sign=sigma, **common)

    if k < 1.0:
        nu = C * lr / (2.0 * math.sqrt(k))
        offset = ellint_F(math.acos(max(-1.0, min(1.0, z0 / C))), k) * (-1.0 if s_theta < 0 else 1.0)
        period = 4.0 * ellint_K(k) / nu
        branch = Branch.DELTA0_K_LT1
        if perturbative and lr <= settings.SMALL_LR_MAX and s_theta == 0.0 and math.cos(theta0) > 0:
            branch = Branch.SMALL_LR
        return RegimeReport(branch=branch, period=period, mean_Z=0.0, mqst=False, k=k, midpoint_Z=0.0,
                            amplitude=C, turning_points=(-C, C), phase_offset=offset, **common)

    m = 1.0 / k
    sn2 = (1.0 - ratio * ratio) / m
    offset = ellint_F(math.asin(math.sqrt(min(1.0, max(0.0, sn2)))), m) * sigma * (-1.0 if s_theta < 0 else 1.0)
    K = ellint_K(m)
    period = 4.0 * K / (C * lr)
    mean = sigma * math.pi * C / (2.0 * K)
    low = C * math.sqrt(max(0.0, 1.0 - m))
    return RegimeReport(branch=Branch.DELTA0_K_GT1, period=period, mean_Z=mean, mqst=True, k=k,
                        midpoint_Z=sigma * 0.5 * (C + low), amplitude=0.5 * (C - low),
                        turning_points=tuple(sorted((sigma * low, sigma * C))), phase_offset=offset, sign=sigma, **common)


def _anchor(q: QuarticData, z0: float, theta0: float):
    """Reference root Z1 of f and the offset u0 = integral from Z1 to z0 of dZ / sqrt(f).

    Returns (Z1, signed offset) or None for a stationary start.
    """
    s_theta = _sin_or_zero(theta0)
    scale = max(1.0, max(abs(c) for c in q.coefficients))
    if s_theta == 0.0:
        if abs(q.f_prime(z0)) <= 1e-14 * scale:
            return None
        return z0, 0.0

    roots = q.real_roots()
    below = [r for r in roots if r < z0]
    above = [r for r in roots if r > z0]
    if not below or not above:
        raise RingLadderError(f"no turning points bracket z0={z0}; f(z0)={q.f_at(z0)}")
    candidates = sorted((below[-1], above[0]), key=lambda r: abs(r - z0))
    simple = [r for r in candidates if abs(q.f_prime(r)) > 1e-9 * scale]
    if not simple:
        return None
    z1 = simple[0]

    step = z0 - z1
    cubic, _ = np.polydiv(np.asarray(q.coefficients), np.array([1.0, -z1]))

    def integrand(t):
        return 2.0 * abs(step) / math.sqrt(max(step * np.polyval(cubic, z1 + step * t * t), 1e-300))

    u0, _ = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    sign = _sign(step) * _sign(-s_theta)
    return z1, sign * u0


def _report_general(p, z0, theta0, H0, delta_tol) -> RegimeReport:
    q = quartic(p, H0)
    inv = q.invariants(delta_tol)
    common = dict(lambda_rho=p.lambda_rho, delta=p.delta, z0=z0, theta0=theta0, H0=H0, inv=inv)
    frozen = dict(branch=Branch.FROZEN_INF, period=math.inf, mean_Z=z0, mqst=abs(z0) > settings.MQST_THRESHOLD,
                  midpoint_Z=z0, turning_points=(z0, z0), **common)

    anchor = _anchor(q, z0, theta0)
    if anchor is None:
        return RegimeReport(**frozen)
    z1, offset = anchor
    lift = q.f_prime(z1) / 4.0
    shift = q.f_double_prime(z1) / 24.0

    if inv.delta_sign > 0:
        branch, wp_min = Branch.GEN_DELTA_POS, inv.roots[0].real
    elif inv.delta_sign < 0:
        branch, wp_min = Branch.GEN_DELTA_NEG, inv.roots[1].real
    elif inv.g3 > 0:
        branch, wp_min = Branch.GEN_DELTA_ZERO_OSC, 2.0 * math.sqrt(max(inv.g2, 0.0) / 12.0)
    else:
        branch, wp_min = Branch.GEN_DELTA_ZERO_DECAY, math.sqrt(max(inv.g2, 0.0) / 12.0)

    gap = wp_min - shift
    if gap == 0.0 or abs(lift / gap) < settings.FROZEN_AMPLITUDE:
        return RegimeReport(**frozen)
    other = z1 + lift / gap
    lo, hi = sorted((z1, other))
    midpoint = 0.5 * (z1 + other)
    common.update(midpoint_Z=midpoint, amplitude=0.5 * (hi - lo), turning_points=(lo, hi), z1=z1, phase_offset=offset)

    if branch is Branch.GEN_DELTA_ZERO_DECAY:
        # Z creeps towards the repeated root, which is the far turning point.
        return RegimeReport(branch=branch, period=math.inf, mean_Z=other, mqst=abs(other) > settings.MQST_THRESHOLD, **common)

    period = 4.0 * weierstrass_half_period(inv) / p.lambda_rho
    _, mean = _time_average(q, lo, hi)
    return RegimeReport(branch=branch, period=period, mean_Z=mean, mqst=abs(mean) > settings.MQST_THRESHOLD, **common)


def classify(
    p: SystemParams,
    z0: float,
    theta0: float = 0.0,
    modulus: str = "corrected",
    perturbative: bool = False,
    delta_tol: Optional[float] = None,
) -> RegimeReport:
    """Classify an initial condition and precompute its closed-form solution.

    Args:
        p (SystemParams): Dynamical parameters.
        z0, theta0 (float): Initial imbalance and phase difference.
        modulus (str): "corrected" (default) or the "printed" negative control.
        perturbative (bool): Report weak-coupling Delta = 0 orbits as SMALL_LR.
        delta_tol (float, optional): Relative tolerance for a vanishing discriminant.

    Returns:
        RegimeReport
    """
    if modulus not in MODULUS_CHOICES:
        raise DomainError(f"modulus must be one of {MODULUS_CHOICES}, got {modulus!r}")
    H0 = hamiltonian(State(z0, theta0), p)
    if p.lambda_rho == 0.0:
        report = _report_linear(p, z0, theta0, H0)
    elif p.delta == 0.0:
        report = _report_delta0(p, z0, theta0, H0, modulus, perturbative)
    else:
        report = _report_general(p, z0, theta0, H0, delta_tol)
    logger.debug(f"Classified lr={p.lambda_rho}, delta={p.delta}, z0={z0}, theta0={theta0} as {report.branch.value}")
    return report


def _weierstrass_orbit(report: RegimeReport, p: SystemParams, s):
    q = quartic(p, report.H0)
    lift = q.f_prime(report.z1) / 4.0
    shift = q.f_double_prime(report.z1) / 24.0
    v = 0.5 * p.lambda_rho * s + report.phase_offset
    num, den = weierstrass_p_fraction(v, report.inv)
    return report.z1 + lift * den / (num - shift * den)


def solve(report: RegimeReport, p: SystemParams, s):
    """Evaluate the closed-form Z at the times ``s`` for a classified initial condition."""
    s = np.asarray(s, dtype=float)
    lr = p.lambda_rho
    branch = report.branch
    if branch in (Branch.FROZEN_INF, Branch.LINEAR_D0):
        Z = np.full_like(s, report.z0)
    elif branch is Branch.LINEAR_Dpos:
        A = math.sqrt(1.0 + p.delta**2)
        Z = report.mean_Z - (report.C / A) * np.sin(A * s - report.phase_offset)
    elif branch is Branch.SMALL_LR:
        Z = small_lr_solution(p, report.z0, s).z
    elif branch is Branch.DELTA0_K_LT1:
        nu = report.C * lr / (2.0 * math.sqrt(report.k))
        _, cn, _ = jacobi_sn_cn_dn(nu * s + report.phase_offset, report.k)
        Z = report.C * np.asarray(cn)
    elif branch is Branch.DELTA0_K_EQ1:
        if math.isinf(report.phase_offset):
            Z = np.zeros_like(s)
        else:
            Z = report.sign * report.C / np.cosh(0.5 * report.C * lr * s + report.phase_offset)
    elif branch is Branch.DELTA0_K_GT1:
        _, _, dn = jacobi_sn_cn_dn(0.5 * report.C * lr * s + report.phase_offset, 1.0 / report.k)
        Z = report.sign * report.C * np.asarray(dn)
    else:
        Z = _weierstrass_orbit(report, p, s)
    return float(Z) if np.ndim(Z) == 0 else Z


def solve_linear(p: SystemParams, z0, theta0, s):
    """Non-interacting orbit (lambda_rho = 0): Rabi oscillation or fixed point."""
    if p.lambda_rho != 0.0:
        raise DomainError("solve_linear needs lambda_rho = 0")
    return solve(classify(p, z0, theta0), p, s)


def solve_delta0(p: SystemParams, z0, theta0, s, modulus="corrected"):
    """Undriven orbit (Delta = 0) in terms of cn, sech or dn."""
    if not (p.lambda_rho > 0 and p.delta == 0.0):
        raise DomainError("solve_delta0 needs lambda_rho > 0 and Delta = 0")
    return solve(classify(p, z0, theta0, modulus=modulus), p, s)


def solve_general(p: SystemParams, z0, theta0, s, delta_tol=None):
    """Driven orbit (Delta != 0) through the Weierstrass function."""
    if not (p.lambda_rho > 0 and p.delta != 0.0):
        raise DomainError("solve_general needs lambda_rho > 0 and Delta != 0")
    return solve(classify(p, z0, theta0, delta_tol=delta_tol), p, s)


def period(report: RegimeReport, p: Optional[SystemParams] = None) -> float:
    """Period of Z in s_tilde; math.inf for orbits that do not oscillate.

    Raises:
        DomainError: ``p`` is given and is not the system the report was classified for.
    """
    if p is not None and (p.lambda_rho, p.delta) != (report.lambda_rho, report.delta):
        raise DomainError(
            f"report was classified for lambda_rho={report.lambda_rho}, Delta={report.delta}; "
            f"got lambda_rho={p.lambda_rho}, Delta={p.delta}"
        )
    return report.period


def period_by_quadrature(p: SystemParams, z0, theta0=0.0) -> float:
    """Period from tau = (4 / lr) times the integral of dZ / sqrt(f) across the allowed interval."""
    report = classify(p, z0, theta0)
    if p.lambda_rho == 0.0 or not math.isfinite(report.period):
        return report.period
    lo, hi = report.turning_points
    total, _ = _time_average(quartic(p, report.H0), lo, hi)
    return 4.0 * total / p.lambda_rho


@dataclass(frozen=True, eq=False)
class SmallCouplingSolution:
    z: np.ndarray
    k: float
    omega: float
    in_range: bool


def small_lr_frequency(lambda_rho, z0):
    """First-order angular frequency 1 + (lr / 2) sqrt(1 - z0^2) of undriven weak-coupling orbits."""
    return 1.0 + 0.5 * lambda_rho * math.sqrt(1.0 - z0 * z0)


def small_lr_driven_frequency(lambda_rho, delta, z0):
    """First-order angular frequency of driven weak-coupling orbits started at Theta = 0."""
    A2 = 1.0 + delta * delta
    return math.sqrt(A2) + (z0 * delta - math.sqrt(1.0 - z0 * z0)) * (2.0 * delta * delta - 1.0) * lambda_rho / (2.0 * A2**1.5)


def small_lr_solution(p: SystemParams, z0, s, s0=0.0) -> SmallCouplingSolution:
    """Weak-coupling orbit at rest (Theta = 0) at s0, first order in the elliptic parameter.

    Z ~ z0 [cos(w x) + (k / 4)(w x - sin(2 w x) / 2) sin(w x)], x = s - s0,
    with k = (lr z0)^2 / (4 (1 + lr q)) and w = sqrt(1 + lr q), q = sqrt(1 - z0^2).
    w is the exact cn frequency; its expansion to first order in lr is
    small_lr_frequency. lr = 0 gives the Rabi orbit z0 cos(x).
    """
    if p.delta != 0.0:
        raise DomainError("the weak-coupling form needs Delta = 0")
    lr = p.lambda_rho
    in_range = lr <= settings.SMALL_LR_MAX
    if not in_range:
        logger.warning(f"lambda_rho={lr} exceeds {settings.SMALL_LR_MAX}; the weak-coupling form is unreliable.")
    root = math.sqrt(1.0 - z0 * z0)
    k = (lr * z0) ** 2 / (4.0 * (1.0 + lr * root))
    omega = math.sqrt(1.0 + lr * root)
    x = omega * (np.asarray(s, dtype=float) - s0)
    z = z0 * (np.cos(x) + 0.25 * k * (x - 0.5 * np.sin(2.0 * x)) * np.sin(x))
    return SmallCouplingSolution(z=z, k=k, omega=omega, in_range=in_range)


def find_degenerate_z0(p: SystemParams, lo, hi, theta0=0.0, delta_tol=None):
    """Initial imbalance in [lo, hi] whose energy level has a vanishing discriminant."""

    def relative_discriminant(z):
        inv = quartic(p, hamiltonian(State(z, theta0), p)).invariants(delta_tol)
        return inv.delta / max(abs(inv.g2) ** 3, 27.0 * inv.g3**2)

    f_lo, f_hi = relative_discriminant(lo), relative_discriminant(hi)
    if f_lo * f_hi > 0:
        raise DomainError(f"the discriminant does not change sign on [{lo}, {hi}]")
    return brentq(relative_discriminant, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
