"""Flux-qubit picture of the coupled rings.

Integrating out the intra-ring phonons leaves two angles (theta_a, theta_b)
moving in

    U = sum_a [E_J (theta_a - Phi_a)^2 / (2 (N - 1)) - E_J cos theta_a]
        - E_J' cos(theta_a - theta_b - (N - 2) / N (Phi_a - Phi_b)),

coupled to a bath of N/2 - 1 modes. Energies are in units of the caller's
choice; Matsubara frequencies are bosonic, w_l = 2 pi l / beta.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq, minimize, root

from .. import settings
from ..errors import DegenerateLandscapeError, DomainError
from ..items import Barrier, Landscape, Minimum, QubitParams

logger = logging.getLogger(__name__)

# Minima closer than this are the same point.
MINIMUM_MERGE_TOL = 1e-6
STRING_STEP = 0.05
STRING_TOL = 1e-10
# Lattice seeds per axis on top of the grid minima.
MULTISTART_POINTS = 6


def _coupling_shift(q: QubitParams) -> float:
    return (q.N - 2) / q.N * q.phi_diff


def effective_potential(theta_a, theta_b, q: QubitParams, confinement=True):
    """U(theta_a, theta_b); ``confinement=False`` drops the quadratic term."""
    theta_a = np.asarray(theta_a, dtype=float)
    theta_b = np.asarray(theta_b, dtype=float)
    U = -q.E_J * (np.cos(theta_a) + np.cos(theta_b)) - q.E_Jp * np.cos(theta_a - theta_b - _coupling_shift(q))
    if confinement:
        U = U + q.E_J * ((theta_a - q.Phi_a) ** 2 + (theta_b - q.Phi_b) ** 2) / (2.0 * (q.N - 1))
    return float(U) if np.ndim(U) == 0 else U


def potential_gradient(theta, q: QubitParams) -> np.ndarray:
    a, b = theta
    inv = 1.0 / (q.N - 1)
    pull = q.E_Jp * math.sin(a - b - _coupling_shift(q))
    return np.array(
        [
            q.E_J * ((a - q.Phi_a) * inv + math.sin(a)) + pull,
            q.E_J * ((b - q.Phi_b) * inv + math.sin(b)) - pull,
        ]
    )


def potential_hessian(theta, q: QubitParams) -> np.ndarray:
    a, b = theta
    inv = 1.0 / (q.N - 1)
    c = q.E_Jp * math.cos(a - b - _coupling_shift(q))
    return np.array(
        [
            [q.E_J * (inv + math.cos(a)) + c, -c],
            [-c, q.E_J * (inv + math.cos(b)) + c],
        ]
    )


def _energy(theta, q):
    return effective_potential(theta[0], theta[1], q)


def _polish(seed, q):
    res = minimize(
        _energy,
        np.asarray(seed, dtype=float),
        args=(q,),
        method="trust-exact",
        jac=potential_gradient,
        hess=potential_hessian,
        options={"gtol": 1e-12},
    )
    return res.x


def _grid_minima(U):
    """Indices of interior grid points not above any of their eight neighbours."""
    centre = U[1:-1, 1:-1]
    mask = np.ones_like(centre, dtype=bool)
    n0, n1 = U.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            mask &= centre <= U[1 + di : n0 - 1 + di, 1 + dj : n1 - 1 + dj]
    i, j = np.nonzero(mask)
    return list(zip(i + 1, j + 1))


def _seeds(U, axis):
    """Starting points for the local minimiser: grid minima, then a coarse lattice.

    The lattice catches minima that fall between grid points with tied values.
    """
    seeds = [(axis[i], axis[j]) for i, j in _grid_minima(U)]
    lattice = np.linspace(-math.pi, math.pi, MULTISTART_POINTS + 2)[1:-1]
    seeds.extend((a, b) for a in lattice for b in lattice)
    return seeds


def _as_minimum(theta, q):
    eig = np.linalg.eigvalsh(potential_hessian(theta, q))
    return Minimum(
        theta_a=float(theta[0]),
        theta_b=float(theta[1]),
        U=float(_energy(theta, q)),
        hessian_eigenvalues=tuple(float(e) for e in eig),
    )


def _string_path(start, end, q, n_images, max_iter):
    """Relax a string of images between two minima onto the minimum-energy path."""
    path = np.linspace(start, end, n_images)
    alpha = np.linspace(0.0, 1.0, n_images)
    for iteration in range(max_iter):
        forces = np.array([potential_gradient(x, q) for x in path[1:-1]])
        moved = path.copy()
        moved[1:-1] -= STRING_STEP * forces / q.E_J
        seg = np.linalg.norm(np.diff(moved, axis=0), axis=1)
        arc = np.concatenate([[0.0], np.cumsum(seg)])
        arc /= arc[-1]
        moved = np.column_stack([np.interp(alpha, arc, moved[:, 0]), np.interp(alpha, arc, moved[:, 1])])
        change = float(np.max(np.abs(moved - path)))
        path = moved
        if change < STRING_TOL:
            break
    logger.debug(f"String relaxed in {iteration + 1} iterations, last change {change:.3g}")
    return path


def saddle_between(first: Minimum, second: Minimum, q: QubitParams, i=0, j=1, n_images=settings.STRING_IMAGES):
    """Barrier between two minima: string method followed by a Newton solve of grad U = 0.

    The height is measured from the lower of the two minima.
    """
    start = np.array([first.theta_a, first.theta_b])
    end = np.array([second.theta_a, second.theta_b])
    path = _string_path(start, end, q, n_images, settings.STRING_MAX_ITER)
    energies = np.array([_energy(x, q) for x in path])
    top = path[int(np.argmax(energies[1:-1])) + 1]
    sol = root(potential_gradient, top, args=(q,), jac=potential_hessian, method="hybr", tol=1e-14)
    saddle = sol.x if sol.success else top
    force = float(np.max(np.abs(potential_gradient(saddle, q))))
    eig = np.linalg.eigvalsh(potential_hessian(saddle, q))
    converged = bool(sol.success and force < settings.SADDLE_FORCE_TOL * q.E_J and eig[0] < 0 < eig[1])
    if not converged:
        logger.warning(f"Saddle between minima {i} and {j} did not converge (max force {force:.3g}).")
        saddle = top
    height = float(_energy(saddle, q)) - min(first.U, second.U)
    return Barrier(first=i, second=j, height=height, saddle=(float(saddle[0]), float(saddle[1])), converged=converged)


def find_minima(q: QubitParams, grid_resolution=settings.DEFAULT_GRID_RESOLUTION) -> Landscape:
    """Sample U over [-pi, pi]^2, polish every seed and connect neighbouring minima.

    Raises:
        DomainError: grid_resolution below 64.
        DegenerateLandscapeError: no minimum inside the cell.
    """
    if grid_resolution < 64:
        raise DomainError(f"grid_resolution must be at least 64, got {grid_resolution}")
    axis = np.linspace(-math.pi, math.pi, int(grid_resolution))
    ta, tb = np.meshgrid(axis, axis, indexing="ij")
    U = effective_potential(ta, tb, q)

    found = []
    for seed in _seeds(U, axis):
        theta = _polish(seed, q)
        if np.any(np.abs(theta) > math.pi):
            continue
        if any(np.hypot(theta[0] - m[0], theta[1] - m[1]) < MINIMUM_MERGE_TOL for m in found):
            continue
        found.append(theta)
    minima = [_as_minimum(theta, q) for theta in found]
    minima = [m for m in minima if min(m.hessian_eigenvalues) > 0]
    if not minima:
        raise DegenerateLandscapeError(f"no minima in the fundamental cell for {q}")
    minima.sort(key=lambda m: (-m.theta_a, m.theta_b))

    barriers = tuple(saddle_between(minima[i], minima[i + 1], q, i, i + 1) for i in range(len(minima) - 1))

    shifted = _as_minimum(_polish((minima[0].theta_a + 2 * math.pi, minima[0].theta_b + 2 * math.pi), q), q)
    intercell = saddle_between(minima[0], shifted, q, 0, 0)
    logger.info(f"Landscape: {len(minima)} minima, {len(barriers)} barriers, inter-cell barrier {intercell.height:.6g}")
    return Landscape(
        theta_a=ta,
        theta_b=tb,
        U=U,
        minima=tuple(minima),
        barriers=barriers,
        intercell_barrier=intercell.height,
    )


def with_flux_difference(q: QubitParams, phi_diff) -> QubitParams:
    """Same parameters with Phi_a = -Phi_b = phi_diff / 2."""
    return replace(q, Phi_a=0.5 * phi_diff, Phi_b=-0.5 * phi_diff)


def well_asymmetry(q: QubitParams, seeds=((1.0, -1.0), (-1.0, 1.0))):
    """U of the well reached from the first seed minus U of the well reached from the second.

    None when both seeds relax into the same minimum.
    """
    first, second = (_polish(seed, q) for seed in seeds)
    if np.hypot(*(first - second)) < 1e-4:
        return None
    return float(_energy(first, q) - _energy(second, q))


def degeneracy_bias(q: QubitParams, lo=math.pi, hi=math.pi + 1.5, steps=60) -> float:
    """Flux difference Phi_a - Phi_b at which the two wells have equal energy.

    The finite-N confinement term moves the point away from pi; it tends to pi
    as N grows.
    """
    grid = np.linspace(lo, hi, steps + 1)
    values = [well_asymmetry(with_flux_difference(q, d)) for d in grid]
    for a, b, fa, fb in zip(grid, grid[1:], values, values[1:]):
        if fa is None or fb is None:
            continue
        if fa == 0.0:
            return float(a)
        if fa * fb < 0:
            return brentq(lambda d: well_asymmetry(with_flux_difference(q, d)), a, b, xtol=1e-14)
    raise DegenerateLandscapeError(f"the wells do not cross in energy for Phi_a - Phi_b in [{lo}, {hi}]")


def coupling_constant(k, N):
    """zeta_k = 4 sin(2 pi k / (N - 1)) / sqrt(N - 1), defined for any integer k."""
    return 4.0 / math.sqrt(N - 1) * np.sin(2.0 * math.pi * np.asarray(k, dtype=float) / (N - 1))


def bath_spectrum(q: QubitParams):
    """Bath frequencies omega_k and couplings zeta_k for k = 1 .. (N - 2) / 2."""
    k = np.arange(1, (q.N - 2) // 2 + 1)
    x = 2.0 * math.pi * k / (q.N - 1)
    omega = np.sqrt(2.0 * q.E_J * q.U_int * (1.0 - np.cos(x)))
    return omega, coupling_constant(k, q.N)


def matsubara_frequency(l, beta):
    return 2.0 * math.pi * np.asarray(l, dtype=float) / beta


def admittance(q: QubitParams, omega_l):
    """Y(omega_l) = sum_k zeta_k^2 / (omega_k^2 + omega_l^2)."""
    omega, zeta = bath_spectrum(q)
    w2 = np.asarray(omega_l, dtype=float)[..., None] ** 2
    Y = np.sum(zeta**2 / (omega**2 + w2), axis=-1)
    return float(Y) if np.ndim(Y) == 0 else Y


@dataclass(frozen=True)
class KernelValue:
    real: float
    imag: float
    converged: bool
    ratio: float


def _kernel_sum(q, tau, l_max, regular_only):
    k = np.arange(1, (q.N - 2) // 2 + 1)
    c = np.cos(2.0 * math.pi * k / (q.N - 1))
    a = 2.0 * q.E_J * q.U_int * (1.0 - c)
    w = matsubara_frequency(np.arange(l_max + 1), q.beta)[:, None]
    if regular_only:
        terms = -(1.0 + c) * a / (a + w**2)
    else:
        terms = w**2 * (1.0 + c) / (a + w**2)
    return np.sum(np.sum(terms, axis=1) * np.exp(1j * w[:, 0] * tau))


def kernel_G(q: QubitParams, tau, l_max=None, regular_only=False) -> KernelValue:
    """Truncated kernel G(tau) of the non-local action with a truncation diagnostic.

    ``ratio`` compares the sums up to l_max and 2 l_max; above
    KERNEL_CONVERGENCE_RATIO the truncation is flagged as not converged.
    ``regular_only`` keeps only the part that decays in omega_l.
    """
    if not 0.0 <= tau <= q.beta:
        raise DomainError(f"tau must lie in [0, beta={q.beta}], got {tau}")
    l_max = q.l_max if l_max is None else int(l_max)
    if l_max < 1:
        raise DomainError(f"l_max must be at least 1, got {l_max}")
    G = _kernel_sum(q, tau, l_max, regular_only)
    G2 = _kernel_sum(q, tau, 2 * l_max, regular_only)
    ratio = float(abs(G2 - G) / max(abs(G2), np.finfo(float).tiny))
    converged = ratio <= settings.KERNEL_CONVERGENCE_RATIO
    if not converged:
        logger.warning(f"Kernel truncation at l_max={l_max} has not converged (ratio {ratio:.3g}).")
    return KernelValue(real=float(G.real), imag=float(G.imag), converged=converged, ratio=ratio)
