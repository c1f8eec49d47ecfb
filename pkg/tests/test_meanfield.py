"""
Two-mode equations and their integrator.

Checks rest on conservation of H, the exact Rabi solution of the
non-interacting model and the handling of the |Z| = 1 boundary.
"""

import math

import numpy as np
import pytest

from ring_ladder.errors import DomainError
from ring_ladder.items import State, SystemParams
from ring_ladder.physics.meanfield import (
    current_series,
    energy,
    hamiltonian,
    integrate,
    josephson_current,
    rhs,
)

DRIFT_TOL = 1e-8


class TestHamiltonian:
    def test_value(self):
        p = SystemParams(lambda_rho=10.0, delta=1.0)
        expected = 5.0 * 0.36 + 0.6 - 0.8 * math.cos(0.5)
        assert hamiltonian(State(0.6, 0.5), p) == pytest.approx(expected, rel=1e-15)

    def test_vectorised_energy_matches_scalar(self, driven):
        Z = np.array([-0.9, -0.2, 0.0, 0.4, 0.95])
        Theta = np.array([0.3, -1.0, math.pi, 2.0, 0.0])
        expected = [hamiltonian(State(z, t), driven) for z, t in zip(Z, Theta)]
        np.testing.assert_allclose(energy(Z, Theta, driven), expected, rtol=1e-15)

    def test_rejects_large_imbalance(self, driven):
        with pytest.raises(DomainError):
            hamiltonian(State(1.2, 0.0), driven)


class TestRhs:
    def test_hamilton_equations(self, driven):
        # (dZ, dTheta) = (-dH/dTheta, dH/dZ) by central differences.
        z, t, h = 0.3, 0.7, 1e-6
        d = rhs(State(z, t), driven)
        dH_dtheta = (hamiltonian(State(z, t + h), driven) - hamiltonian(State(z, t - h), driven)) / (2 * h)
        dH_dz = (hamiltonian(State(z + h, t), driven) - hamiltonian(State(z - h, t), driven)) / (2 * h)
        assert d.dZ == pytest.approx(-dH_dtheta, rel=1e-8)
        assert d.dTheta == pytest.approx(dH_dz, rel=1e-8)
        assert not d.singular

    @pytest.mark.parametrize("z", [1.0, -1.0])
    def test_singular_boundary(self, driven, z):
        d = rhs(State(z, 0.4), driven)
        assert d.singular
        assert d.dZ == 0.0
        assert math.isnan(d.dTheta)


class TestIntegrate:
    @pytest.mark.parametrize(
        "lambda_rho, delta, z0, theta0",
        [
            (2.0, 0.0, 0.4, 0.0), (10.0, 0.0, 0.4, 0.0), (10.0, 0.0, 0.8, 0.0), (0.0, 2.0, 0.3, 0.5),
            (10.0, 1.0, 0.6, 0.0), (10.0, 1.0, 0.6, 0.2), (20.0, 0.0, 0.9, 0.0), (10.0, 2.0, 0.5, 1.0),
        ],
    )
    def test_energy_conservation(self, lambda_rho, delta, z0, theta0):
        p = SystemParams(lambda_rho=lambda_rho, delta=delta)
        traj = integrate(p, z0, theta0, s_max=100.0)
        assert traj.meta["max_energy_drift"] <= DRIFT_TOL
        assert traj.meta["energy_drift_ok"]
        assert np.max(np.abs(traj.H_drift)) == traj.meta["max_energy_drift"]

    def test_solver_runs_tighter_than_requested(self, driven):
        traj = integrate(driven, 0.6, 0.2, s_max=2.0, rel_tol=1e-8, abs_tol=1e-8)
        assert traj.meta["rel_tol"] == 1e-8
        assert traj.meta["solver_rtol"] <= 2e-11
        assert traj.meta["solver_atol"] <= 2e-11

    @pytest.mark.parametrize("lambda_rho, delta, z0, theta0", [(10.0, 1.0, 0.6, 0.2), (2.0, 0.0, 0.4, 0.3), (0.0, 2.0, 0.3, 0.5)])
    def test_time_reversal(self, lambda_rho, delta, z0, theta0):
        p = SystemParams(lambda_rho=lambda_rho, delta=delta)
        forward = integrate(p, z0, theta0, s_max=20.0)
        assert forward.s_tilde[-1] == pytest.approx(20.0)
        back = integrate(p, forward.Z[-1], -forward.Theta[-1], s_max=20.0)
        assert back.Z[-1] == pytest.approx(z0, abs=1e-7)
        assert abs(math.remainder(back.Theta[-1] + theta0, 2 * math.pi)) < 1e-7

    def test_rabi_oscillation(self):
        # lambda_rho = Delta = 0: Z'' = -Z, so Z = z0 cos(s) from rest.
        traj = integrate(SystemParams(lambda_rho=0.0), 0.5, 0.0, s_max=30.0)
        np.testing.assert_allclose(traj.Z, 0.5 * np.cos(traj.s_tilde), atol=1e-8)

    def test_sampling_grid(self, undriven):
        traj = integrate(undriven, 0.4, 0.0, s_max=5.0, sample_ds=0.01)
        assert len(traj) == 501
        assert traj.s_tilde[0] == 0.0
        assert traj.s_tilde[-1] == pytest.approx(5.0, abs=1e-12)
        np.testing.assert_allclose(np.diff(traj.s_tilde), 0.01, atol=1e-12)

    def test_ragged_window_keeps_endpoint(self, undriven):
        traj = integrate(undriven, 0.4, 0.0, s_max=1.005, sample_ds=0.01)
        assert traj.s_tilde[-1] == pytest.approx(1.005, abs=1e-12)

    def test_running_phase_is_continuous(self, undriven):
        # Self-trapped orbit: Theta runs away and is reported without 2 pi jumps.
        traj = integrate(undriven, 0.8, 0.0, s_max=20.0)
        assert traj.Theta[-1] > 4.0 * math.pi
        assert np.max(np.abs(np.diff(traj.Theta))) < 0.5

    def test_theta_span_stops_early(self, undriven):
        traj = integrate(undriven, 0.8, 0.0, s_max=100.0, theta_span=6.0 * math.pi)
        assert abs(traj.Theta[-1] - 0.0) == pytest.approx(6.0 * math.pi, abs=1e-6)
        assert traj.s_tilde[-1] < 100.0

    def test_start_on_boundary(self, undriven, caplog):
        traj = integrate(undriven, 1.0, 0.0)
        assert traj.singular
        assert len(traj) == 1
        assert "singular boundary" in caplog.text

    @pytest.mark.parametrize(
        "kwargs",
        [dict(z0=1.5), dict(s_max=0.0), dict(s_max=math.inf), dict(rel_tol=1e-2), dict(abs_tol=0.0), dict(sample_ds=0.0)],
    )
    def test_invalid_arguments(self, undriven, kwargs):
        args = dict(z0=0.4, theta0=0.0)
        args.update(kwargs)
        with pytest.raises(DomainError):
            integrate(undriven, **args)

    def test_deterministic(self, driven):
        first = integrate(driven, 0.6, 0.0, s_max=10.0)
        second = integrate(driven, 0.6, 0.0, s_max=10.0)
        np.testing.assert_array_equal(first.Z, second.Z)
        np.testing.assert_array_equal(first.Theta, second.Theta)


class TestCurrent:
    def test_maximal_current(self):
        assert josephson_current(State(0.0, math.pi / 2), N_T=100.0, g=0.5) == pytest.approx(50.0)
        assert josephson_current(State(0.0, math.pi / 2), dimensionless=True) == pytest.approx(1.0)

    def test_current_is_minus_dZ(self, driven):
        # dZ/ds = -sqrt(1 - Z^2) sin(Theta) = -I / I0.
        traj = integrate(driven, 0.3, 0.4, s_max=2.0)
        for i in (0, 50, 150):
            d = rhs(State(traj.Z[i], traj.Theta[i]), driven)
            assert current_series(traj)[i] == pytest.approx(-d.dZ, rel=1e-12)
