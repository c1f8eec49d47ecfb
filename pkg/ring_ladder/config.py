"""Run configuration shared by every subcommand.

Values come from, in increasing priority: the defaults below (taken from
``settings``), a JSON config file whose top-level keys mirror the blocks, and
command-line flags. Validation collects every violation and reports each
under the flag that sets it.
"""

import json
import math
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import settings
from .errors import ConfigError


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class SystemBlock(_Block):
    lambda_rho: Optional[float] = Field(None, ge=0)
    delta: float = 0.0
    z0: Optional[float] = Field(None, ge=-1, le=1)
    z0_list: Optional[List[float]] = None
    theta0: float = 0.0

    @field_validator("z0_list")
    @classmethod
    def _within_unit_interval(cls, values):
        if values is not None:
            if not values:
                raise ValueError("needs at least one imbalance")
            for z in values:
                if not -1.0 <= z <= 1.0:
                    raise ValueError(f"every imbalance must lie in [-1, 1], got {z}")
        return values


class IntegrateBlock(_Block):
    s_max: float = Field(settings.DEFAULT_S_MAX, gt=0)
    rel_tol: float = Field(settings.DEFAULT_REL_TOL, gt=0, le=settings.MAX_TOLERANCE)
    abs_tol: float = Field(settings.DEFAULT_ABS_TOL, gt=0, le=settings.MAX_TOLERANCE)
    sample_ds: float = Field(settings.DEFAULT_SAMPLE_DS, gt=0)


class CompareBlock(_Block):
    modulus: Literal["corrected", "printed"] = "corrected"
    delta_tol: Optional[float] = Field(None, gt=0)
    perturbative: bool = False
    max_abs_err: float = Field(settings.COMPARE_MAX_ABS_ERR, gt=0)
    period_rel_err: float = Field(settings.COMPARE_PERIOD_REL_ERR, gt=0)
    mean_abs_err: float = Field(settings.COMPARE_MEAN_ABS_ERR, gt=0)


class SweepBlock(_Block):
    axis: Literal["z0", "lambda_rho", "delta", "theta0"] = "z0"
    start: Optional[float] = None
    stop: Optional[float] = None
    steps: int = Field(11, ge=1)
    jobs: int = Field(settings.DEFAULT_JOBS, ge=1)
    resume: bool = False
    verify: bool = False


class QubitBlock(_Block):
    E_J: float = Field(settings.DEFAULT_E_J, gt=0)
    E_Jp_ratio: float = Field(settings.DEFAULT_E_JP_RATIO, ge=0)
    Phi_diff: float = math.pi
    N: int = Field(settings.DEFAULT_N_SITES, ge=4)
    U_int: float = Field(settings.DEFAULT_U_INT, gt=0)
    beta: float = Field(settings.DEFAULT_BETA, gt=0)
    l_max: int = Field(settings.DEFAULT_L_MAX, ge=1)
    grid_resolution: int = Field(settings.DEFAULT_GRID_RESOLUTION, ge=64)
    at_degeneracy: bool = False

    @field_validator("N")
    @classmethod
    def _even(cls, value):
        if value % 2:
            raise ValueError(f"must be even, got {value}")
        return value


class OpticsBlock(_Block):
    """Trap geometry; lengths in micrometres with hbar = 1 energy units."""

    E0_sq: float = Field(1.0, gt=0)
    l: int = Field(2, ge=2)
    k_LG: float = Field(1.0, gt=0)
    wavelength_lambda: float = Field(0.83, gt=0)
    focal_f: float = Field(40000.0, gt=0)
    beam_sep_D: float = Field(5500.0, gt=0)
    mass_m: float = Field(1.0, gt=0)
    r0: float = Field(10.0, gt=0)


class MicroBlock(_Block):
    t: Optional[float] = Field(None, gt=0)
    g: Optional[float] = Field(None, gt=0)
    U: Optional[float] = Field(None, ge=0)
    mu_a: float = 0.0
    mu_b: float = 0.0
    Phi_a: float = 0.0
    Phi_b: float = 0.0
    N: int = Field(2, ge=2)
    N_T: float = Field(1.0, gt=0)

    @property
    def given(self) -> bool:
        return None not in (self.t, self.g, self.U)


class OutputBlock(_Block):
    path: str = "-"
    format: Literal["csv", "json"] = "csv"
    potential: Optional[str] = None
    grid: Optional[str] = None
    with_current: bool = False


class RunConfig(_Block):
    system: SystemBlock = SystemBlock()
    integrate: IntegrateBlock = IntegrateBlock()
    compare: CompareBlock = CompareBlock()
    sweep: SweepBlock = SweepBlock()
    qubit: QubitBlock = QubitBlock()
    optics: OpticsBlock = OpticsBlock()
    micro: MicroBlock = MicroBlock()
    output: OutputBlock = OutputBlock()


# Flags whose name is not simply "--" + field with dashes.
FLAG_NAMES = {
    ("system", "z0_list"): "--z0",
    ("qubit", "E_Jp_ratio"): "--ej-ratio",
    ("qubit", "E_J"): "--ej",
    ("qubit", "N"): "--n-sites",
    ("qubit", "Phi_diff"): "--phi-diff",
    ("micro", "N"): "--micro-n",
    ("micro", "U"): "--micro-u",
    ("micro", "t"): "--micro-t",
    ("micro", "g"): "--micro-g",
    ("micro", "N_T"): "--n-total",
    ("micro", "Phi_a"): "--micro-phi-a",
    ("micro", "Phi_b"): "--micro-phi-b",
    ("output", "path"): "--output",
    ("sweep", "jobs"): "--jobs",
}

# Fields each subcommand cannot run without.
REQUIRED = {
    "simulate": [("system", "lambda_rho"), ("system", "z0")],
    "classify": [("system", "lambda_rho"), ("system", "z0")],
    "compare": [("system", "lambda_rho"), ("system", "z0")],
    "portrait": [("system", "lambda_rho"), ("system", "z0_list")],
    "sweep": [("sweep", "start"), ("sweep", "stop")],
    "landscape": [],
    "setup-params": [],
}


def flag_name(block, field):
    return FLAG_NAMES.get((block, field), "--" + field.lower().replace("_", "-"))


def _merge(base: dict, overrides: dict) -> dict:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict):
            base_block = merged.get(key)
            merged[key] = _merge(base_block if isinstance(base_block, dict) else {}, value)
        elif value is not None:
            merged[key] = value
    return merged


def _missing(data: dict, command):
    required = list(REQUIRED.get(command, []))
    if command == "sweep":
        axis = data.get("sweep", {}).get("axis", SweepBlock.model_fields["axis"].default)
        required += [("system", name) for name in ("lambda_rho", "z0") if name != axis]
    return [
        f"{flag_name(b, f)}: required by '{command}'"
        for b, f in required
        if not isinstance(data.get(b), dict) or data[b].get(f) is None
    ]


def _violations(error: ValidationError):
    messages = []
    for item in error.errors():
        loc = [str(part) for part in item["loc"]]
        if len(loc) >= 2:
            name = flag_name(loc[0], loc[1])
        elif loc:
            name = "--config"
            if loc[0] in RunConfig.model_fields:
                name = f"--config ({loc[0]})"
        else:
            name = "--config"
        messages.append(f"{name}: {item['msg']}")
    return messages


def load_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError([f"--config: cannot read {path}: {e}"])
    if not isinstance(data, dict):
        raise ConfigError([f"--config: {path} must hold a JSON object"])
    return data


def build_config(command, overrides=None, config_path=None) -> RunConfig:
    """Merge defaults, config file and flag overrides, then validate.

    Raises:
        ConfigError: with one "--flag: message" entry per violation.
    """
    data = load_config_file(config_path) if config_path else {}
    data = _merge(data, overrides or {})
    if command == "portrait":
        system = data.get("system", {})
        if system.get("z0_list") is None and system.get("z0") is not None:
            data = _merge(data, {"system": {"z0_list": [system["z0"]]}})
    violations = _missing(data, command)
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        violations = _violations(e) + violations
    if violations:
        raise ConfigError(violations)
    return config
