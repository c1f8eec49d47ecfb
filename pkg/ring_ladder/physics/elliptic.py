"""Elliptic integrals and elliptic functions.

Everything here takes the *parameter* m (the factor in ``1 - m sin^2``), not
the modulus. The Jacobi functions use the descending Landen / AGM scheme,
complete integrals the arithmetic-geometric mean, incomplete integrals
Carlson's symmetric form R_F, and the Weierstrass function is reduced to
Jacobi functions through the roots of its cubic.

All functions are pure and accept numpy arrays for the argument ``u``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .. import settings
from ..errors import DomainError, EllipticDivergenceError, WeierstrassPoleError

logger = logging.getLogger(__name__)

AGM_MAX_ITER = 32
AGM_TOL = 1e-15
# Within this distance of m = 1 the Jacobi functions are replaced by tanh/sech.
HYPERBOLIC_BAND = 1e-12
CARLSON_ERRTOL = 1e-3


def _check_parameter(m, allow_one=True):
    if not math.isfinite(m):
        raise DomainError(f"elliptic parameter must be finite, got {m}")
    if m < 0:
        raise DomainError(f"elliptic parameter must be >= 0, got {m}")
    if m > 1:
        raise DomainError(f"elliptic parameter must be <= 1, got {m}")
    if m == 1 and not allow_one:
        raise EllipticDivergenceError("K(m) diverges logarithmically at m = 1")


def agm(a, b):
    """Arithmetic-geometric mean of two non-negative numbers."""
    for _ in range(AGM_MAX_ITER):
        if abs(a - b) <= AGM_TOL * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def ellint_K(m):
    """Complete elliptic integral of the first kind, K(m) = pi / (2 agm(1, sqrt(1 - m)))."""
    _check_parameter(m, allow_one=False)
    return math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - m)))


def _carlson_rf(x, y, z):
    # Duplication until the arguments agree to CARLSON_ERRTOL, then the
    # fifth-order series.
    for _ in range(100):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        ave = (x + y + z) / 3.0
        dx, dy, dz = (ave - x) / ave, (ave - y) / ave, (ave - z) / ave
        if max(abs(dx), abs(dy), abs(dz)) < CARLSON_ERRTOL:
            break
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / math.sqrt(ave)


def ellint_F(phi, m):
    """Incomplete elliptic integral of the first kind F(phi | m) for any real phi.

    The amplitude is reduced to [-pi/2, pi/2] using F(phi + j pi) = F(phi) + 2 j K(m).

    Raises:
        DomainError: m outside [0, 1] or phi not finite.
        EllipticDivergenceError: m = 1 and |phi| >= pi/2.
    """
    if not math.isfinite(phi):
        raise DomainError(f"amplitude must be finite, got {phi}")
    _check_parameter(m)
    j = round(phi / math.pi)
    r = phi - j * math.pi
    if m == 1.0:
        if j != 0 or abs(r) >= 0.5 * math.pi:
            raise EllipticDivergenceError("F(phi | 1) diverges at |phi| = pi/2")
        return math.atanh(math.sin(r))
    s = math.sin(r)
    c = math.cos(r)
    value = s * _carlson_rf(c * c, 1.0 - m * s * s, 1.0) if s != 0.0 else 0.0
    if j:
        value += 2 * j * ellint_K(m)
    return value


def jacobi_sn_cn_dn(u, m):
    """Jacobi elliptic functions (sn, cn, dn) at argument u and parameter m.

    Uses the descending Landen transformation (DLMF 22.20(ii)). Parameters
    above 1 go through the reciprocal-parameter transformation.

    Args:
        u: Real argument, scalar or numpy array.
        m: Parameter, m >= 0.

    Returns:
        tuple: (sn, cn, dn) with the shape of ``u``.
    """
    if not math.isfinite(m) or m < 0:
        raise DomainError(f"elliptic parameter must be finite and >= 0, got {m}")
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("Jacobi functions need a finite argument")

    if m > 1.0 + HYPERBOLIC_BAND:
        root = math.sqrt(m)
        sn, cn, dn = jacobi_sn_cn_dn(u * root, 1.0 / m)
        sn, cn, dn = np.asarray(sn) / root, np.asarray(dn), np.asarray(cn)
    elif abs(1.0 - m) <= HYPERBOLIC_BAND:
        sn = np.tanh(u)
        cn = 1.0 / np.cosh(u)
        dn = cn.copy()
    elif m == 0.0:
        sn, cn, dn = np.sin(u), np.cos(u), np.ones_like(u)
    else:
        a = [1.0]
        c = [math.sqrt(m)]
        b = math.sqrt(1.0 - m)
        for _ in range(AGM_MAX_ITER):
            if abs(c[-1]) <= AGM_TOL * a[-1]:
                break
            a_prev = a[-1]
            a.append(0.5 * (a_prev + b))
            c.append(0.5 * (a_prev - b))
            b = math.sqrt(a_prev * b)
        n_steps = len(a) - 1
        phi = (2.0**n_steps) * a[-1] * u
        for n in range(n_steps, 0, -1):
            phi = 0.5 * (phi + np.arcsin(c[n] / a[n] * np.sin(phi)))
        sn = np.sin(phi)
        cn = np.cos(phi)
        dn = np.sqrt(1.0 - m * sn * sn)

    if scalar:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


@dataclass(frozen=True)
class WeierstrassInvariants:
    """Invariants of 4y^3 - g2 y - g3 together with its discriminant and roots.

    ``roots`` are complex numbers. When all three are real they are sorted
    descending; otherwise e2 is the real root and e1 = conj(e3) with Im e1 > 0.
    ``degenerate`` is True when the discriminant is zero within tolerance.
    """

    g2: float
    g3: float
    delta: float
    roots: tuple
    degenerate: bool = False

    @property
    def delta_sign(self) -> int:
        if self.degenerate:
            return 0
        return 1 if self.delta > 0 else -1

    @property
    def real_roots(self) -> tuple:
        return tuple(r.real for r in self.roots if r.imag == 0.0)


def _cubic(y, g2, g3):
    return 4.0 * y**3 - g2 * y - g3


def _polish(y, g2, g3, steps=2):
    for _ in range(steps):
        slope = 12.0 * y * y - g2
        if slope == 0.0:
            break
        y = y - _cubic(y, g2, g3) / slope
    return y


def depressed_cubic_roots(g2, g3, degenerate_tol=None):
    """Roots of 4y^3 - g2 y - g3 = 0 and the discriminant g2^3 - 27 g3^2.

    A discriminant with |delta| <= degenerate_tol * max(|g2|^3, 27 g3^2) is
    treated as zero and the repeated root is returned exactly.
    """
    if not (math.isfinite(g2) and math.isfinite(g3)):
        raise DomainError(f"invariants must be finite, got g2={g2}, g3={g3}")
    tol = settings.DELTA_REL_TOL if degenerate_tol is None else degenerate_tol
    delta = g2**3 - 27.0 * g3**2
    scale = max(abs(g2) ** 3, 27.0 * g3**2)

    if scale == 0.0:
        return WeierstrassInvariants(g2, g3, delta, (0j, 0j, 0j), degenerate=True)

    if abs(delta) <= tol * scale:
        c = math.sqrt(max(g2, 0.0) / 12.0)
        if g3 > 0:
            roots = (complex(2 * c), complex(-c), complex(-c))
        else:
            roots = (complex(c), complex(c), complex(-2 * c))
        return WeierstrassInvariants(g2, g3, delta, roots, degenerate=True)

    if delta > 0:
        r = 2.0 * math.sqrt(g2 / 12.0)
        arg = math.sqrt(27.0) * g3 / g2**1.5
        theta = math.acos(min(1.0, max(-1.0, arg)))
        ys = [r * math.cos(theta / 3.0 - 2.0 * math.pi * j / 3.0) for j in (0, 1, -1)]
        ys = sorted((_polish(y, g2, g3) for y in ys), reverse=True)
        return WeierstrassInvariants(g2, g3, delta, tuple(complex(y) for y in ys))

    # One real root (Cardano, written to avoid cancellation) and a complex pair.
    p = -g2 / 4.0
    q = -g3 / 4.0
    disc = math.sqrt(q * q / 4.0 + p**3 / 27.0)
    big = -math.copysign(1.0, q) * np.cbrt(abs(q) / 2.0 + disc)
    e2 = big - p / (3.0 * big) if big != 0.0 else 0.0
    e2 = _polish(float(e2), g2, g3)
    imag = 0.5 * math.sqrt(max(3.0 * e2 * e2 - g2, 0.0))
    e1 = complex(-0.5 * e2, imag)
    return WeierstrassInvariants(g2, g3, delta, (e1, complex(e2), e1.conjugate()))


def _degenerate_scale(inv):
    return math.sqrt(max(inv.g2, 0.0) / 12.0)


def weierstrass_p_fraction(u, inv):
    """Weierstrass function as a fraction, wp(u) = num / den.

    ``den`` vanishes exactly at the poles, so callers can form expressions
    like 1 / (wp - b) = den / (num - b den) without dividing by zero.
    """
    u = np.asarray(u, dtype=float)
    if inv.delta_sign > 0:
        e1, e2, e3 = (r.real for r in inv.roots)
        spread = e1 - e3
        sn, _, _ = jacobi_sn_cn_dn(u * math.sqrt(spread), (e2 - e3) / spread)
        sn2 = np.asarray(sn) ** 2
        return e3 * sn2 + spread, sn2
    if inv.delta_sign < 0:
        e2 = inv.roots[1].real
        h2 = math.sqrt(3.0 * e2 * e2 - inv.g2 / 4.0)
        m2 = min(1.0, max(0.0, 0.5 - 3.0 * e2 / (4.0 * h2)))
        sn, cn, _ = jacobi_sn_cn_dn(2.0 * u * math.sqrt(h2), m2)
        sn2 = np.asarray(sn) ** 2
        cn = np.asarray(cn)
        # 1 - cn = sn^2 / (1 + cn) keeps the pole exact for cn near 1.
        near_pole = cn >= 0.0
        num = np.where(near_pole, e2 * sn2 + h2 * (1.0 + cn) ** 2, e2 * (1.0 - cn) + h2 * (1.0 + cn))
        den = np.where(near_pole, sn2, 1.0 - cn)
        return num, den
    if inv.g2 == 0.0 and inv.g3 == 0.0:
        return np.ones_like(u), u * u
    c = _degenerate_scale(inv)
    x = math.sqrt(3.0 * c) * u
    if inv.g3 > 0:
        s2 = np.sin(x) ** 2
        return 3.0 * c - c * s2, s2
    s2 = np.sinh(x) ** 2
    return 3.0 * c + c * s2, s2


def weierstrass_p(u, inv):
    """Weierstrass elliptic function wp(u; g2, g3) for real u.

    Raises:
        WeierstrassPoleError: u is a pole (u = 0 or a lattice point).
    """
    num, den = weierstrass_p_fraction(u, inv)
    if np.any(np.asarray(u) == 0.0) or np.any(den == 0.0):
        raise WeierstrassPoleError("wp has a double pole at the lattice points")
    value = num / den
    return float(value) if np.ndim(value) == 0 else value


def weierstrass_half_period(inv):
    """Real half-period omega of wp; infinite when the lattice degenerates."""
    if inv.delta_sign > 0:
        e1, e2, e3 = (r.real for r in inv.roots)
        return ellint_K((e2 - e3) / (e1 - e3)) / math.sqrt(e1 - e3)
    if inv.delta_sign < 0:
        e2 = inv.roots[1].real
        h2 = math.sqrt(3.0 * e2 * e2 - inv.g2 / 4.0)
        return ellint_K(min(1.0, max(0.0, 0.5 - 3.0 * e2 / (4.0 * h2)))) / math.sqrt(h2)
    if inv.g3 > 0:
        return math.pi / (2.0 * math.sqrt(3.0 * _degenerate_scale(inv)))
    return math.inf
