# Define here the records passed between the physics modules, the sweep
# driver and the output pipelines.
#
# Records are frozen dataclasses. Constructors check the invariants that every
# consumer relies on and raise DomainError otherwise.

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

from .errors import DomainError


class Branch(str, Enum):
    LINEAR_D0 = "LINEAR_D0"
    LINEAR_Dpos = "LINEAR_Dpos"
    SMALL_LR = "SMALL_LR"
    DELTA0_K_LT1 = "DELTA0_K_LT1"
    DELTA0_K_EQ1 = "DELTA0_K_EQ1"
    DELTA0_K_GT1 = "DELTA0_K_GT1"
    GEN_DELTA_NEG = "GEN_DELTA_NEG"
    GEN_DELTA_ZERO_OSC = "GEN_DELTA_ZERO_OSC"
    GEN_DELTA_ZERO_DECAY = "GEN_DELTA_ZERO_DECAY"
    GEN_DELTA_POS = "GEN_DELTA_POS"
    FROZEN_INF = "FROZEN_INF"


# Branches whose Z(s) approaches a fixed point instead of oscillating.
APERIODIC_BRANCHES = frozenset(
    {Branch.DELTA0_K_EQ1, Branch.GEN_DELTA_ZERO_DECAY, Branch.FROZEN_INF, Branch.LINEAR_D0}
)


class Topology(str, Enum):
    CLOSED = "CLOSED"
    OPEN = "OPEN"
    SEPARATRIX = "SEPARATRIX"


@dataclass(frozen=True)
class MicroParams:
    """Bose-Hubbard ladder parameters (energies in units with hbar = 1)."""

    t: float
    g: float
    U: float
    mu_a: float = 0.0
    mu_b: float = 0.0
    Phi_a: float = 0.0
    Phi_b: float = 0.0
    N: int = 2
    N_T: float = 1.0

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"intra-ring tunnelling t must be positive, got {self.t}")
        if not self.g > 0:
            raise DomainError(f"inter-ring tunnelling g must be positive, got {self.g}")
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"sites per ring N must be an integer >= 2, got {self.N}")
        if not self.N_T > 0:
            raise DomainError(f"total particle number N_T must be positive, got {self.N_T}")


@dataclass(frozen=True)
class SystemParams:
    """Reduced dynamical parameters: interaction lambda*rho, drive Delta, Rabi scale 2g."""

    lambda_rho: float
    delta: float = 0.0
    omega0: float = 1.0
    provenance: Optional[MicroParams] = None

    def __post_init__(self):
        if not (self.lambda_rho >= 0 and math.isfinite(self.lambda_rho)):
            raise DomainError(f"lambda_rho must be finite and >= 0, got {self.lambda_rho}")
        if not math.isfinite(self.delta):
            raise DomainError(f"delta must be finite, got {self.delta}")


@dataclass(frozen=True)
class OpticalSetup:
    """Laguerre-Gauss plus two-Gaussian-beam geometry of the double ring trap."""

    E0_sq: float
    l: int
    k_LG: float
    wavelength_lambda: float
    focal_f: float
    beam_sep_D: float
    mass_m: float
    r0: float

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 2:
            raise DomainError(f"azimuthal index l must be an integer >= 2, got {self.l}")
        for name in ("E0_sq", "k_LG", "wavelength_lambda", "focal_f", "beam_sep_D", "mass_m", "r0"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be finite and positive, got {value}")


@dataclass(frozen=True)
class State:
    Z: float
    Theta: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution of the two-mode equations.

    ``singular`` is set when the run stopped early because |Z| reached 1.
    """

    s_tilde: np.ndarray
    Z: np.ndarray
    Theta: np.ndarray
    H: np.ndarray
    params: SystemParams
    meta: dict = field(default_factory=dict)
    singular: bool = False

    @property
    def H0(self) -> float:
        return float(self.H[0])

    @property
    def H_drift(self) -> np.ndarray:
        return self.H - self.H[0]

    @property
    def span(self) -> float:
        return float(self.s_tilde[-1] - self.s_tilde[0])

    def __len__(self):
        return len(self.s_tilde)


@dataclass(frozen=True, eq=False)
class RegimeReport:
    """Classification of one initial condition and the data its closed-form solution needs."""

    branch: Branch
    lambda_rho: float
    delta: float
    z0: float
    theta0: float
    H0: float
    period: float
    mean_Z: float
    mqst: bool
    k: Optional[float] = None
    C: Optional[float] = None
    alpha: Optional[float] = None
    zeta: Optional[float] = None
    inv: Optional[Any] = None
    D: Optional[float] = None
    midpoint_Z: Optional[float] = None
    amplitude: float = 0.0
    turning_points: tuple = ()
    # Solution anchors: reference root Z1 and the argument offset of the
    # elliptic function so that Z(0) = z0.
    z1: Optional[float] = None
    phase_offset: float = 0.0
    sign: float = 1.0

    @property
    def frequency(self) -> float:
        if not math.isfinite(self.period) or self.period <= 0:
            return 0.0
        return 2 * math.pi / self.period

    @property
    def k_tilde(self) -> Optional[float]:
        if self.k is None:
            return None
        return self.k if self.k <= 1 else 1 / self.k

    def to_record(self) -> dict:
        """Flat key/value view used by the JSON and CSV writers."""
        record = {
            "branch": self.branch.value,
            "lambda_rho": self.lambda_rho,
            "delta": self.delta,
            "z0": self.z0,
            "theta0": self.theta0,
            "H0": self.H0,
            "k": self.k,
            "k_tilde": self.k_tilde,
            "C": self.C,
            "alpha": self.alpha,
            "zeta": self.zeta,
            "D": self.D,
            "g2": None,
            "g3": None,
            "discriminant": None,
            "roots": None,
            "period": self.period if math.isfinite(self.period) else None,
            "period_infinite": not math.isfinite(self.period),
            "frequency": self.frequency,
            "mean_Z": self.mean_Z,
            "midpoint_Z": self.midpoint_Z,
            "amplitude": self.amplitude,
            "turning_points": list(self.turning_points),
            "mqst": self.mqst,
        }
        if self.inv is not None:
            record["g2"] = self.inv.g2
            record["g3"] = self.inv.g3
            record["discriminant"] = self.inv.delta
            record["roots"] = [[r.real, r.imag] for r in self.inv.roots]
        return record


@dataclass(frozen=True)
class AllowedRegions:
    intervals: tuple
    turning_points: tuple

    def containing(self, z: float, tol: float = 1e-9) -> tuple:
        for lo, hi in self.intervals:
            if lo - tol <= z <= hi + tol:
                return (lo, hi)
        raise DomainError(f"Z = {z} lies outside every allowed interval {self.intervals}")


@dataclass(frozen=True, eq=False)
class PortraitCurve:
    """Phase-space curve; ``points`` has columns (Theta/pi, Z)."""

    z0: float
    points: np.ndarray
    topology: Topology


@dataclass(frozen=True)
class QubitParams:
    """Effective two-angle model of the coupled rings.

    E_J and E_Jp are t<n> and g<n>; the mean occupation <n> is folded into them.
    """

    E_J: float = 1.0
    E_Jp: float = 0.8
    Phi_a: float = math.pi / 2
    Phi_b: float = -math.pi / 2
    N: int = 20
    U_int: float = 0.1
    beta: float = 10.0
    l_max: int = 1000

    def __post_init__(self):
        if not self.E_J > 0:
            raise DomainError(f"E_J must be positive, got {self.E_J}")
        if not self.E_Jp >= 0:
            raise DomainError(f"E_Jp must be non-negative, got {self.E_Jp}")
        if int(self.N) != self.N or self.N < 4 or self.N % 2:
            raise DomainError(f"N must be an even integer >= 4, got {self.N}")
        if not self.U_int > 0:
            raise DomainError(f"U_int must be positive, got {self.U_int}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if int(self.l_max) != self.l_max or self.l_max < 1:
            raise DomainError(f"l_max must be an integer >= 1, got {self.l_max}")

    @property
    def phi_diff(self) -> float:
        return self.Phi_a - self.Phi_b


@dataclass(frozen=True)
class Minimum:
    theta_a: float
    theta_b: float
    U: float
    hessian_eigenvalues: tuple


@dataclass(frozen=True)
class Barrier:
    first: int
    second: int
    height: float
    saddle: tuple
    converged: bool


@dataclass(frozen=True, eq=False)
class Landscape:
    theta_a: np.ndarray
    theta_b: np.ndarray
    U: np.ndarray
    minima: tuple
    barriers: tuple
    intercell_barrier: Optional[float] = None

    @property
    def barrier_ratio(self) -> Optional[float]:
        if not self.barriers or not self.intercell_barrier:
            return None
        return self.barriers[0].height / self.intercell_barrier

    def to_record(self) -> dict:
        return {
            "minima": [asdict(m) for m in self.minima],
            "barriers": [asdict(b) for b in self.barriers],
            "intercell_barrier": self.intercell_barrier,
            "barrier_ratio": self.barrier_ratio,
        }
