"""Geometry of the double-ring optical trap and the reduced model parameters.

Internal units have hbar = 1; masses, lengths and energies are whatever
consistent scales the caller picks.
"""

import logging
import math

import numpy as np

from ..errors import DomainError
from ..items import MicroParams, OpticalSetup, SystemParams

logger = logging.getLogger(__name__)

HBAR = 1.0
# V0 / E_r below this value makes the tight-binding tunnelling estimate unreliable.
TUNNELLING_VALIDITY_RATIO = 5.0


def laguerre_gauss_profile(r, l, r0):
    """Radial profile f_l(r) of the p = 0 Laguerre-Gauss mode, eps = sqrt(2) r / r0."""
    eps = math.sqrt(2.0) * np.asarray(r, dtype=float) / r0
    norm = math.sqrt(2.0 / (math.pi * math.factorial(l)))
    return norm * eps**l * np.exp(-eps * eps)


def profile_peak_radius(l, r0):
    """Radius at which the p = 0 profile is largest."""
    return r0 * math.sqrt(l) / 2.0


def gaussian_wavevector(setup: OpticalSetup) -> float:
    """Effective wave vector k_G = 2 pi D / (lambda f) of the interfering Gaussian beams."""
    return 2.0 * math.pi * setup.beam_sep_D / (setup.wavelength_lambda * setup.focal_f)


def lattice_potential(r, phi, z, setup: OpticalSetup):
    """Optical potential of the ring stack at cylindrical coordinates (r, phi, z)."""
    f_l = laguerre_gauss_profile(r, setup.l, setup.r0)
    lg = np.cos(setup.k_LG * np.asarray(z, dtype=float))
    gs = np.cos(gaussian_wavevector(setup) * np.asarray(z, dtype=float))
    return 4.0 * setup.E0_sq * (
        f_l**2 * lg**2 + gs**2 + 2.0 * f_l * lg * gs * np.cos(setup.l * np.asarray(phi, dtype=float))
    )


def ring_spacing(setup: OpticalSetup) -> float:
    """Distance between neighbouring rings along z, d = lambda f / D."""
    if setup.beam_sep_D == 0:
        raise DomainError("beam separation D must be non-zero")
    return setup.wavelength_lambda * setup.focal_f / setup.beam_sep_D


def recoil_energy(d, m):
    """Recoil energy of the z-lattice, E_r = hbar^2 k^2 / 2m with k = pi / d."""
    k = math.pi / d
    return HBAR**2 * k * k / (2.0 * m)


def tunnelling_validity(V0, d, m):
    """Return V0 / E_r and whether the deep-lattice condition holds."""
    ratio = V0 / recoil_energy(d, m)
    return ratio, ratio >= TUNNELLING_VALIDITY_RATIO


def inter_ring_tunneling(V0, d, m):
    """Tunnelling amplitude g between neighbouring rings in the deep-lattice limit.

    Args:
        V0 (float): Lattice depth 4 E0^2.
        d (float): Ring spacing.
        m (float): Atomic mass.

    Returns:
        float: g in the caller's energy unit.
    """
    for name, value in (("V0", V0), ("d", d), ("m", m)):
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")
    ratio, valid = tunnelling_validity(V0, d, m)
    if not valid:
        logger.warning(
            f"V0/E_r = {ratio:.3g} is below {TUNNELLING_VALIDITY_RATIO}; the tunnelling estimate is unreliable."
        )
    prefactor = 4.0 * math.sqrt(HBAR / math.sqrt(2.0 * m)) * V0**0.75 / math.sqrt(d)
    return prefactor * math.exp(-math.sqrt(2.0 * m * V0) * d / (math.pi * HBAR))


def well_depth_scale(l):
    """Relative depth of the azimuthal wells, sqrt(1 / l!)."""
    return math.sqrt(1.0 / math.factorial(l))


def reduce_params(micro: MicroParams) -> SystemParams:
    """Map ladder parameters onto (lambda*rho, Delta, 2g)."""
    if micro.g == 0:
        raise DomainError("inter-ring tunnelling g must be non-zero")
    n = micro.N
    drive = (
        2.0 * micro.t * (math.cos(micro.Phi_a / n) - math.cos(micro.Phi_b / n)) + micro.mu_b - micro.mu_a
    ) / (2.0 * micro.g)
    lam = micro.U / (2.0 * micro.g)
    rho = micro.N_T / n
    return SystemParams(lambda_rho=lam * rho, delta=drive, omega0=2.0 * micro.g, provenance=micro)


def josephson_current_scale(g, N_T):
    """I0 = g N_T / hbar."""
    return g * N_T / HBAR


def physical_time(s_tilde, g):
    """Convert dimensionless time s_tilde = 2 g s / hbar back to s."""
    return HBAR * np.asarray(s_tilde, dtype=float) / (2.0 * g)


def physical_frequency(omega_tilde, g):
    """Angular frequency in physical units for a frequency measured in s_tilde."""
    return 2.0 * g * omega_tilde / HBAR


def setup_summary(setup: OpticalSetup) -> dict:
    """Derived quantities of a trap geometry, as emitted by ``setup-params``."""
    V0 = 4.0 * setup.E0_sq
    d = ring_spacing(setup)
    ratio, valid = tunnelling_validity(V0, d, setup.mass_m)
    return {
        "V0": V0,
        "ring_spacing": d,
        "k_G": gaussian_wavevector(setup),
        "recoil_energy": recoil_energy(d, setup.mass_m),
        "V0_over_Er": ratio,
        "deep_lattice": valid,
        "g": inter_ring_tunneling(V0, d, setup.mass_m),
        "sites_per_ring": setup.l,
        "well_depth_scale": well_depth_scale(setup.l),
        "profile_peak_radius": profile_peak_radius(setup.l, setup.r0),
    }
