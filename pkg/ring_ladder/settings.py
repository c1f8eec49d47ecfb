# Settings for the ring_ladder project
#
# Only the most important settings are collected here. Every value can be
# overridden from the command line or from a JSON config file (see config.py);
# the precedence is flags > config file > the defaults below.

import os

from dotenv import load_dotenv

# Pick up RING_LADDER_* variables from a .env file in the working directory
load_dotenv()

PROJECT_NAME = "ring_ladder"

# --- Integrator defaults ---
# Adaptive embedded Runge-Kutta (scipy DOP853) with dense output.
DEFAULT_REL_TOL = 1e-10
DEFAULT_ABS_TOL = 1e-10
DEFAULT_SAMPLE_DS = 0.01
DEFAULT_S_MAX = 20.0
MAX_TOLERANCE = 1e-3
# Integration stops with a flag once |Z| reaches 1 - SINGULAR_MARGIN.
SINGULAR_MARGIN = 1e-12
# The phase is wrapped back into (-pi, pi] at these intervals of s_tilde.
PHASE_WRAP_INTERVAL = 2.0
# Energy drift allowed per unit of rel_tol.
ENERGY_DRIFT_FACTOR = 100.0
# DOP853 runs this much tighter than the requested tolerances; a run whose
# drift still exceeds the bound is repeated SOLVER_RETRY_FACTOR tighter, down
# to SOLVER_TOL_FLOOR.
SOLVER_TOL_FACTOR = 1e-3
SOLVER_RETRY_FACTOR = 1e-2
# scipy raises rtol below 100 x machine epsilon to that value.
SOLVER_TOL_FLOOR = 2.3e-14

# --- Classification ---
# |delta| <= DELTA_REL_TOL * max(|g2|^3, 27 g3^2) counts as a repeated root.
DELTA_REL_TOL = 1e-10
# Amplitude below which an orbit is reported as frozen.
FROZEN_AMPLITUDE = 1e-12
# Upper end of the small-coupling perturbative formula.
SMALL_LR_MAX = 0.2

# --- Self-trapping analysis ---
MQST_THRESHOLD = 1e-3
MIN_PERIODS_FOR_AVERAGE = 3
APERIODIC_MIN_SPAN = 50.0
PORTRAIT_THETA_WINDOW = 6.0  # in units of pi
PORTRAIT_POINTS = 401

# --- Oracle comparison thresholds ---
COMPARE_MAX_ABS_ERR = 1e-6
COMPARE_PERIOD_REL_ERR = 1e-4
COMPARE_MEAN_ABS_ERR = 1e-4
COMPARE_REL_TOL = 1e-12

# --- Qubit landscape ---
DEFAULT_E_J = 1.0
DEFAULT_E_JP_RATIO = 0.8
DEFAULT_N_SITES = 20
DEFAULT_U_INT = 0.1
DEFAULT_BETA = 10.0
DEFAULT_L_MAX = 1000
DEFAULT_GRID_RESOLUTION = 128
STRING_IMAGES = 32
STRING_MAX_ITER = 2000
# Saddle convergence, in units of E_J.
SADDLE_FORCE_TOL = 1e-8
KERNEL_CONVERGENCE_RATIO = 0.01

# --- Sweeps ---
# Number of worker processes; RING_LADDER_JOBS overrides the core count.
DEFAULT_JOBS = int(os.getenv("RING_LADDER_JOBS", "0")) or (os.cpu_count() or 1)
SWEEP_SAVE_EVERY = 25

# --- Logging ---
LOG_LEVEL = os.getenv("RING_LADDER_LOG_LEVEL", "WARNING").upper()
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
