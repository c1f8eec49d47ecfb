"""
Elliptic integrals, Jacobi functions and the Weierstrass function.

Every reference value comes from an independent route: numerical quadrature,
scipy.special, the defining differential equation or the lattice sum.
"""

import math

import numpy as np
import pytest
from scipy import special
from scipy.integrate import quad

from ring_ladder.errors import DomainError, EllipticDivergenceError, WeierstrassPoleError
from ring_ladder.physics.elliptic import (
    agm,
    depressed_cubic_roots,
    ellint_F,
    ellint_K,
    jacobi_sn_cn_dn,
    weierstrass_half_period,
    weierstrass_p,
)

ATOL = 1.0e-12
RTOL = 1.0e-10

# (g2, g3): positive discriminant, negative discriminant, and the two degenerate shapes.
INVARIANTS = {
    "positive": (4.0, 0.0),
    "negative": (1.0, 1.0),
    "degenerate_osc": (3.0, 1.0),
    "degenerate_decay": (3.0, -1.0),
}


def _K_by_quadrature(m):
    value, _ = quad(lambda t: 1.0 / math.sqrt(1.0 - m * math.sin(t) ** 2), 0.0, math.pi / 2, epsabs=1e-14, epsrel=1e-13)
    return value


def _F_by_quadrature(phi, m):
    value, _ = quad(lambda t: 1.0 / math.sqrt(1.0 - m * math.sin(t) ** 2), 0.0, phi, epsabs=1e-14, epsrel=1e-13, limit=200)
    return value


class TestAGM:
    def test_equal_arguments(self):
        assert agm(2.0, 2.0) == pytest.approx(2.0, rel=1e-15)

    def test_known_value(self):
        # Gauss's constant: agm(1, sqrt(2)) = 1.19814023473559220744
        assert agm(1.0, math.sqrt(2.0)) == pytest.approx(1.19814023473559220744, rel=1e-14)


class TestCompleteIntegral:
    def test_zero_parameter(self):
        assert ellint_K(0.0) == pytest.approx(math.pi / 2, rel=1e-15)

    @pytest.mark.parametrize("m", [0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999999])
    def test_against_quadrature(self, m):
        np.testing.assert_allclose(ellint_K(m), _K_by_quadrature(m), rtol=RTOL)

    @pytest.mark.parametrize("m", np.linspace(0.0, 0.999, 23))
    def test_against_scipy(self, m):
        np.testing.assert_allclose(ellint_K(m), special.ellipk(m), rtol=RTOL)

    def test_diverges_at_one(self):
        with pytest.raises(EllipticDivergenceError):
            ellint_K(1.0)

    @pytest.mark.parametrize("m", [-0.1, 1.5, math.nan])
    def test_outside_domain(self, m):
        with pytest.raises(DomainError):
            ellint_K(m)


class TestIncompleteIntegral:
    @pytest.mark.parametrize("m", [0.0, 0.2, 0.5, 0.8, 0.95])
    @pytest.mark.parametrize("phi", [0.1, 0.7, 1.2, math.pi / 2])
    def test_against_quadrature(self, phi, m):
        np.testing.assert_allclose(ellint_F(phi, m), _F_by_quadrature(phi, m), rtol=RTOL, atol=ATOL)

    @pytest.mark.parametrize("m", [0.1, 0.5, 0.9])
    def test_quarter_period(self, m):
        np.testing.assert_allclose(ellint_F(math.pi / 2, m), ellint_K(m), rtol=RTOL)

    def test_odd(self):
        assert ellint_F(-0.8, 0.4) == pytest.approx(-ellint_F(0.8, 0.4), rel=1e-14)

    def test_quasi_periodic(self):
        m, phi = 0.6, 0.9
        np.testing.assert_allclose(ellint_F(phi + math.pi, m), ellint_F(phi, m) + 2.0 * ellint_K(m), rtol=RTOL)

    @pytest.mark.parametrize("m", [0.0, 0.5, 0.9, 0.999])
    def test_increasing_in_amplitude(self, m):
        values = [ellint_F(phi, m) for phi in np.linspace(-2 * math.pi, 2 * math.pi, 401)]
        assert np.all(np.diff(values) > 0)

    def test_inverts_sn(self):
        m, u = 0.7, 0.83
        sn, cn, _ = jacobi_sn_cn_dn(u, m)
        np.testing.assert_allclose(ellint_F(math.atan2(sn, cn), m), u, rtol=RTOL)


class TestJacobi:
    """Identities on random arguments and the limiting cases m = 0, 1."""

    def test_identities_random_points(self, rng):
        us = rng.uniform(-10.0, 10.0, 1000)
        ms = rng.uniform(0.0, 0.999, 1000)
        for u, m in zip(us, ms):
            sn, cn, dn = jacobi_sn_cn_dn(u, m)
            assert sn * sn + cn * cn == pytest.approx(1.0, abs=ATOL)
            assert dn * dn + m * sn * sn == pytest.approx(1.0, abs=ATOL)

    def test_against_scipy(self, rng):
        us = rng.uniform(-10.0, 10.0, 200)
        for m in (0.05, 0.3, 0.6, 0.9, 0.99):
            sn, cn, dn = jacobi_sn_cn_dn(us, m)
            ref_sn, ref_cn, ref_dn, _ = special.ellipj(us, m)
            np.testing.assert_allclose(sn, ref_sn, atol=1e-11)
            np.testing.assert_allclose(cn, ref_cn, atol=1e-11)
            np.testing.assert_allclose(dn, ref_dn, atol=1e-11)

    def test_circular_limit(self):
        u = np.linspace(-5.0, 5.0, 41)
        sn, cn, dn = jacobi_sn_cn_dn(u, 0.0)
        np.testing.assert_allclose(sn, np.sin(u), atol=ATOL)
        np.testing.assert_allclose(cn, np.cos(u), atol=ATOL)
        np.testing.assert_allclose(dn, 1.0, atol=ATOL)

    def test_hyperbolic_limit(self):
        u = np.linspace(-5.0, 5.0, 41)
        sn, cn, dn = jacobi_sn_cn_dn(u, 1.0)
        np.testing.assert_allclose(sn, np.tanh(u), atol=ATOL)
        np.testing.assert_allclose(cn, 1.0 / np.cosh(u), atol=ATOL)
        np.testing.assert_allclose(dn, 1.0 / np.cosh(u), atol=ATOL)

    def test_reciprocal_parameter(self):
        u, m = np.linspace(-3.0, 3.0, 25), 2.5
        sn, cn, dn = jacobi_sn_cn_dn(u, m)
        np.testing.assert_allclose(sn * sn + cn * cn, 1.0, atol=ATOL)
        np.testing.assert_allclose(dn * dn + m * sn * sn, 1.0, atol=ATOL)

    def test_period(self):
        m = 0.4
        K = ellint_K(m)
        u = np.linspace(-2.0, 2.0, 17)
        sn, cn, dn = jacobi_sn_cn_dn(u, m)
        sn4, cn4, dn4 = jacobi_sn_cn_dn(u + 4.0 * K, m)
        np.testing.assert_allclose(sn4, sn, atol=1e-11)
        np.testing.assert_allclose(cn4, cn, atol=1e-11)
        np.testing.assert_allclose(dn4, dn, atol=1e-11)

    def test_scalar_in_scalar_out(self):
        sn, cn, dn = jacobi_sn_cn_dn(0.3, 0.5)
        assert isinstance(sn, float) and isinstance(cn, float) and isinstance(dn, float)

    def test_rejects_negative_parameter(self):
        with pytest.raises(DomainError):
            jacobi_sn_cn_dn(0.3, -0.5)


class TestCubicRoots:
    @pytest.mark.parametrize("name", list(INVARIANTS))
    def test_roots_solve_the_cubic(self, name):
        g2, g3 = INVARIANTS[name]
        inv = depressed_cubic_roots(g2, g3)
        for e in inv.roots:
            assert abs(4 * e**3 - g2 * e - g3) < 1e-12
        assert abs(sum(inv.roots)) < 1e-12

    def test_real_roots_descending(self):
        inv = depressed_cubic_roots(4.0, 0.0)
        e1, e2, e3 = (r.real for r in inv.roots)
        assert inv.delta_sign == 1
        assert e1 > e2 > e3
        np.testing.assert_allclose([e1, e2, e3], [1.0, 0.0, -1.0], atol=ATOL)

    def test_complex_pair(self):
        inv = depressed_cubic_roots(1.0, 1.0)
        assert inv.delta_sign == -1
        assert inv.roots[1].imag == 0.0
        assert inv.roots[0].imag > 0
        assert inv.roots[2] == inv.roots[0].conjugate()

    @pytest.mark.parametrize("g3, expected", [(1.0, (1.0, -0.5, -0.5)), (-1.0, (0.5, 0.5, -1.0))])
    def test_degenerate(self, g3, expected):
        inv = depressed_cubic_roots(3.0, g3)
        assert inv.degenerate and inv.delta_sign == 0
        np.testing.assert_allclose([r.real for r in inv.roots], expected, atol=ATOL)

    def test_degenerate_tolerance(self):
        assert not depressed_cubic_roots(3.0, 1.0 - 1e-6).degenerate
        assert depressed_cubic_roots(3.0, 1.0 - 1e-6, degenerate_tol=1e-4).degenerate

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            depressed_cubic_roots(math.inf, 0.0)


class TestWeierstrass:
    @staticmethod
    def _derivative(u, inv, h=1e-4):
        f = lambda x: weierstrass_p(x, inv)  # noqa: E731
        return (-f(u + 2 * h) + 8 * f(u + h) - 8 * f(u - h) + f(u - 2 * h)) / (12 * h)

    @pytest.mark.parametrize("name", list(INVARIANTS))
    @pytest.mark.parametrize("u", [0.2, 0.45, 0.7])
    def test_differential_equation(self, name, u):
        g2, g3 = INVARIANTS[name]
        inv = depressed_cubic_roots(g2, g3)
        wp = weierstrass_p(u, inv)
        dwp = self._derivative(u, inv)
        rhs = 4 * wp**3 - g2 * wp - g3
        assert abs(dwp * dwp - rhs) <= 1e-8 * max(1.0, abs(4 * wp**3))

    def test_laurent_leading_term(self):
        inv = depressed_cubic_roots(4.0, 0.0)
        u = 1e-3
        # wp = 1/u^2 + g2 u^2 / 20 + ...
        np.testing.assert_allclose(weierstrass_p(u, inv), 1 / u**2 + 4.0 * u**2 / 20, rtol=1e-10)

    def test_lattice_sum(self):
        g2, g3 = INVARIANTS["positive"]
        inv = depressed_cubic_roots(g2, g3)
        e1, e2, e3 = (r.real for r in inv.roots)
        omega = weierstrass_half_period(inv)
        omega_im = ellint_K((e1 - e2) / (e1 - e3)) / math.sqrt(e1 - e3)
        M = 300
        m, n = np.meshgrid(np.arange(-M, M + 1), np.arange(-M, M + 1))
        w = (2 * m * omega + 2j * n * omega_im).ravel()
        w = w[w != 0]
        u = 0.5
        lattice = 1 / u**2 + np.sum(1 / (u - w) ** 2 - 1 / w**2)
        np.testing.assert_allclose(weierstrass_p(u, inv), lattice.real, rtol=1e-4)
        assert abs(lattice.imag) < 1e-4

    @pytest.mark.parametrize("u", [0.3, 0.6, 0.9])
    def test_inverse_integral(self, u):
        inv = depressed_cubic_roots(4.0, 0.0)
        y = weierstrass_p(u, inv)
        value, _ = quad(lambda t: 1 / math.sqrt(4 * t**3 - 4 * t), y, math.inf, epsabs=1e-13, epsrel=1e-12)
        np.testing.assert_allclose(value, u, rtol=1e-8)

    def test_half_period_hits_largest_root(self):
        inv = depressed_cubic_roots(4.0, 0.0)
        omega = weierstrass_half_period(inv)
        np.testing.assert_allclose(weierstrass_p(omega, inv), inv.roots[0].real, atol=1e-10)

    def test_real_period(self):
        inv = depressed_cubic_roots(1.0, 1.0)
        omega = weierstrass_half_period(inv)
        u = np.array([0.3, 0.5, 0.8])
        np.testing.assert_allclose(weierstrass_p(u + 2 * omega, inv), weierstrass_p(u, inv), rtol=1e-9)

    def test_decay_half_period_is_infinite(self):
        assert weierstrass_half_period(depressed_cubic_roots(3.0, -1.0)) == math.inf

    def test_pole(self):
        inv = depressed_cubic_roots(4.0, 0.0)
        with pytest.raises(WeierstrassPoleError):
            weierstrass_p(0.0, inv)
