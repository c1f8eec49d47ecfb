"""Critical imbalance, allowed regions, phase portraits and self-trapping detection."""

import math

import numpy as np
import pytest

from ring_ladder.errors import DomainError, InsufficientDataError, OutOfAllowedRegionError
from ring_ladder.items import State, SystemParams, Topology
from ring_ladder.physics import mqst
from ring_ladder.physics.analytic import classify, quartic
from ring_ladder.physics.meanfield import hamiltonian, integrate


class TestCriticalImbalance:
    def test_reference_value(self):
        assert mqst.critical_imbalance(10.0) == pytest.approx(0.6, rel=1e-15)
        assert mqst.critical_imbalances(10.0) == pytest.approx((-0.6, 0.6), rel=1e-15)

    @pytest.mark.parametrize("lr", [2.0, 5.0, 10.0, 50.0])
    def test_zero_phase_form(self, lr):
        assert mqst.critical_imbalance(lr) == pytest.approx(2.0 * math.sqrt(lr - 1.0) / lr, rel=1e-14)

    def test_threshold_at_unit_coupling(self):
        assert mqst.critical_imbalance(1.0) == 0.0

    @pytest.mark.parametrize("lr", [0.0, 0.3, 0.5, 0.9, 0.99, -1.0])
    def test_no_threshold(self, lr):
        assert mqst.critical_imbalance(lr) is None
        assert mqst.critical_imbalances(lr) is None

    @pytest.mark.parametrize("theta0", [0.3, 1.0, math.pi / 2])
    def test_no_threshold_at_any_phase(self, theta0):
        assert mqst.critical_imbalance(0.9, theta0) is None

    def test_quarter_phase(self):
        assert mqst.critical_imbalance(4.0, math.pi / 2) == pytest.approx(math.sqrt(2.0 / 4.0), rel=1e-14)

    @pytest.mark.parametrize("theta0", [0.0, 0.3, 1.0])
    def test_lies_on_the_separatrix_level(self, theta0):
        p = SystemParams(lambda_rho=10.0)
        zc = mqst.critical_imbalance(10.0, theta0)
        assert hamiltonian(State(zc, theta0), p) == pytest.approx(1.0, abs=1e-12)

    def test_bisection_on_the_integrator(self, undriven):
        # Locate the onset of self-trapping from time averages alone.
        lo, hi = 0.5, 0.75
        while hi - lo > 1e-3:
            mid = 0.5 * (lo + hi)
            _, trapped = mqst.detect_mqst(integrate(undriven, mid, 0.0, s_max=60.0))
            lo, hi = (lo, mid) if trapped else (mid, hi)
        assert 0.5 * (lo + hi) == pytest.approx(0.6, abs=1e-3)


class TestClassicalParticle:
    def test_energy_balance(self, driven, rng):
        H0 = hamiltonian(State(0.3, 0.7), driven)
        Z = rng.uniform(-0.99, 0.99, 50)
        U, E = mqst.classical_potential(Z, driven, H0)
        f = quartic(driven, H0).f_at(Z)
        np.testing.assert_allclose(E - U, (driven.lambda_rho / 2) ** 2 * f, atol=1e-12)

    def test_curvature_changes_sign_at_threshold(self, undriven):
        # U''(0) = 2 (1 - H0 lr) for Delta = 0, so the barrier appears once H0 lr > 1.
        h = 1e-4
        for z0, barrier in ((0.4, False), (0.8, True)):
            H0 = hamiltonian(State(z0, 0.0), undriven)
            U, _ = mqst.classical_potential(np.array([-h, 0.0, h]), undriven, H0)
            assert bool(U[0] - 2 * U[1] + U[2] < 0) == barrier

    def test_potential_curve_columns(self, undriven):
        table = mqst.potential_curve(undriven, 0.5, np.linspace(-1, 1, 11))
        assert set(table) == {"Z", "U", "E", "f"}
        assert np.all(table["E"] == 0.75)


class TestAllowedRegions:
    def test_self_trapped_level_splits(self, undriven):
        H0 = hamiltonian(State(0.8, 0.0), undriven)
        regions = mqst.allowed_regions(undriven, H0)
        assert len(regions.intervals) == 2
        (a, b), (c, d) = regions.intervals
        np.testing.assert_allclose([a, b, c, d], [-0.8, -0.6, 0.6, 0.8], atol=1e-9)
        assert regions.containing(0.7) == (c, d)

    def test_oscillating_level(self, undriven):
        H0 = hamiltonian(State(0.4, 0.0), undriven)
        regions = mqst.allowed_regions(undriven, H0)
        assert len(regions.intervals) == 1
        np.testing.assert_allclose(regions.intervals[0], [-0.4, 0.4], atol=1e-9)

    def test_separatrix_merges_at_double_root(self, undriven):
        regions = mqst.allowed_regions(undriven, 1.0)
        assert len(regions.intervals) == 1
        np.testing.assert_allclose(regions.intervals[0], [-0.6, 0.6], atol=1e-9)

    def test_turning_points_are_roots(self, driven):
        H0 = hamiltonian(State(0.3, 0.7), driven)
        q = quartic(driven, H0)
        for z in mqst.allowed_regions(driven, H0).turning_points:
            assert abs(q.f_at(z)) <= 1e-10

    def test_outside_every_interval(self, undriven):
        regions = mqst.allowed_regions(undriven, hamiltonian(State(0.8, 0.0), undriven))
        with pytest.raises(DomainError):
            regions.containing(0.0)


class TestPhaseOfZ:
    def test_recovers_initial_phase(self, driven):
        H0 = hamiltonian(State(0.3, 1.0), driven)
        assert mqst.phase_of_Z(0.3, driven, H0) == pytest.approx(1.0, abs=1e-10)
        assert mqst.phase_of_Z(0.3, driven, H0, branch=-1) == pytest.approx(-1.0, abs=1e-10)

    def test_forbidden_imbalance(self, undriven):
        H0 = hamiltonian(State(0.8, 0.0), undriven)
        with pytest.raises(OutOfAllowedRegionError):
            mqst.phase_of_Z(0.0, undriven, H0)

    def test_unit_imbalance(self, undriven):
        with pytest.raises(DomainError):
            mqst.phase_of_Z(1.0, undriven, 0.0)


class TestPortrait:
    def test_topologies(self, undriven):
        curves = mqst.portrait(undriven, [0.4, 0.6, 0.8])
        assert [c.topology for c in curves] == [Topology.CLOSED, Topology.SEPARATRIX, Topology.OPEN]

    def test_closed_curve_is_a_loop(self, undriven):
        (curve,) = mqst.portrait(undriven, [0.4], n_points=101)
        np.testing.assert_allclose(curve.points[0], curve.points[-1], atol=1e-6)
        assert curve.points[:, 1].min() == pytest.approx(-0.4, abs=1e-9)
        assert curve.points[:, 1].max() == pytest.approx(0.4, abs=1e-9)

    def test_open_curve_spans_the_window(self, undriven):
        (curve,) = mqst.portrait(undriven, [0.8])
        assert abs(curve.points[-1, 0] - curve.points[0, 0]) == pytest.approx(6.0, abs=1e-6)
        assert np.all(curve.points[:, 1] > 0.59)

    def test_closed_curve_follows_the_orbit(self, undriven):
        (curve,) = mqst.portrait(undriven, [0.4], n_points=201)
        traj = integrate(undriven, 0.4, 0.0, s_max=2.3, sample_ds=1e-3)
        wrapped = (traj.Theta + math.pi) % (2 * math.pi) - math.pi
        orbit = np.column_stack([wrapped / math.pi, traj.Z])
        for point in curve.points:
            assert np.min(np.hypot(*(orbit - point).T)) < 5e-3

    def test_drive_breaks_reflection_symmetry(self, driven, undriven):
        def extents(curve):
            return curve.points[:, 1].min(), curve.points[:, 1].max()

        up, down = mqst.portrait(driven, [0.4, -0.4])
        (lo_up, hi_up), (lo_down, hi_down) = extents(up), extents(down)
        assert abs(lo_up + hi_down) > 0.1
        up, down = mqst.portrait(undriven, [0.4, -0.4])
        (lo_up, hi_up), (lo_down, hi_down) = extents(up), extents(down)
        assert lo_up == pytest.approx(-hi_down, abs=1e-9)
        assert hi_up == pytest.approx(-lo_down, abs=1e-9)

    def test_needs_interaction(self, rabi):
        with pytest.raises(DomainError):
            mqst.portrait(rabi, [0.4])


class TestDetection:
    def test_trapped_mean(self, undriven):
        traj = integrate(undriven, 0.8, 0.0, s_max=20.0)
        mean, trapped = mqst.detect_mqst(traj)
        assert trapped
        assert mean == pytest.approx(classify(undriven, 0.8).mean_Z, abs=1e-4)

    def test_oscillating_mean(self, undriven):
        mean, trapped = mqst.detect_mqst(integrate(undriven, 0.4, 0.0, s_max=20.0))
        assert not trapped
        assert abs(mean) < 1e-4

    def test_expected_period_window(self, undriven):
        # Three upward crossings only, but the expected period fits three times.
        report = classify(undriven, 0.4)
        traj = integrate(undriven, 0.4, 0.0, s_max=3.2 * report.period)
        mean, _ = mqst.detect_mqst(traj, expected_period=report.period)
        assert abs(mean) < 1e-4

    def test_short_window(self, undriven):
        with pytest.raises(InsufficientDataError):
            mqst.detect_mqst(integrate(undriven, 0.4, 0.0, s_max=1.0))

    def test_measure_period(self, undriven):
        traj = integrate(undriven, 0.4, 0.0, s_max=20.0)
        assert mqst.measure_period(traj) == pytest.approx(classify(undriven, 0.4).period, rel=1e-6)

    def test_measure_period_needs_two_crossings(self, undriven):
        with pytest.raises(InsufficientDataError):
            mqst.measure_period(integrate(undriven, 0.4, 0.0, s_max=1.0))
