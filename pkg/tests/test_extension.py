import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gextremal.core import DiscDatum, PointG, disc_modulus
from gextremal.extension import (AnnularRegion, ContactError, FiniteMeasureT2, ImproveError, cauchy_riemann_residual,
                                 f_tau, herglotz_eval, herglotz_extension, improve_map, improvement,
                                 laurent_order, laurent_tail, psi_tau)

from conftest import disc_points, unimodular


class TestFTau:
    def test_flat_branch(self):
        assert f_tau((1, 1), (0, 0.4)) == 0.4

    def test_royal_branch(self):
        assert abs(f_tau((1j, 1), (0.6, 0.09)) - 0.3) < 1e-15

    @given(unimodular(), unimodular())
    def test_origin(self, a, b):
        assert f_tau((a, b), (0, 0)) == 0

    def test_off_variety(self):
        with pytest.raises(ValueError):
            f_tau((1, 1), (0.5, 0.3))

    def test_tau_unimodular(self):
        with pytest.raises(ValueError):
            f_tau((0.5, 1), (0, 0.1))


class TestPsiTau:
    def test_royal(self):
        z = 0.3 - 0.1j
        assert abs(psi_tau((1, 1), (2 * z, z * z)) - z) < 1e-15

    def test_flat(self):
        assert abs(psi_tau((1, 1), (0, 0.25j)) - 0.25j) < 1e-15

    def test_origin(self):
        assert psi_tau((1j, -1), (0, 0)) == 0

    @settings(max_examples=60)
    @given(unimodular(), unimodular(), disc_points(0.99), st.booleans())
    def test_restriction(self, a, b, z, royal):
        s = (2 * z, z * z) if royal else (0, z)
        assert abs(psi_tau((a, b), s) - f_tau((a, b), s)) < 1e-12


class TestHerglotz:
    def test_point_mass(self):
        assert herglotz_eval(FiniteMeasureT2(((1, 1, 1.0),)), (0, 0)) == 1

    def test_measure_validation(self):
        with pytest.raises(ValueError):
            FiniteMeasureT2(((1, 1, 0.5),))
        with pytest.raises(ValueError):
            FiniteMeasureT2(())
        with pytest.raises(ValueError):
            FiniteMeasureT2(((1, 1, -1.0), (1, 1, 2.0)))

    def test_outside_g(self):
        with pytest.raises(ValueError):
            herglotz_eval(FiniteMeasureT2(((1, 1, 1.0),)), (2, 1))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_positive_real_part_and_consistency(self, seed):
        rng = np.random.default_rng(seed)
        mu = FiniteMeasureT2.random(rng, int(rng.integers(1, 9)))
        a, b = 0.95 * np.sqrt(rng.random((2, 200))) * np.exp(2j * np.pi * rng.random((2, 200)))
        g = herglotz_extension(mu, a + b, a * b)
        assert np.all(g.real > 0)
        z = a[:20]
        for s in [(2 * x, x * x) for x in z] + [(0, x) for x in z]:
            assert abs(herglotz_eval(mu, s, on_variety=True) - herglotz_eval(mu, s)) < 1e-12

    def test_vectorised_matches_scalar(self, rng):
        mu = FiniteMeasureT2.random(rng, 5)
        s = PointG(0.3 - 0.2j, 0.1j)
        assert abs(herglotz_extension(mu, s.s1, s.s2) - herglotz_eval(mu, s)) < 1e-14

    def test_holomorphic(self, rng):
        mu = FiniteMeasureT2.random(rng, 6)
        a, b = 0.8 * np.sqrt(rng.random((2, 50))) * np.exp(2j * np.pi * rng.random((2, 50)))
        assert cauchy_riemann_residual(lambda x, y: herglotz_extension(mu, x, y), a + b, a * b) < 1e-6

    def test_cr_detects_conjugate(self):
        assert cauchy_riemann_residual(lambda x, y: np.conj(x), np.array([0.1]), np.array([0.0])) > 0.5

    def test_contact(self):
        with pytest.raises(ContactError):
            herglotz_eval(FiniteMeasureT2(((1, 1, 1.0),)), (0, 1), on_variety=True)


class TestLaurent:
    def test_tail_decreases(self):
        tails = [laurent_tail(0.3, -0.3, n) for n in range(10)]
        assert all(a > b for a, b in zip(tails, tails[1:]))

    def test_tail_bounds_true_sum(self):
        u1, u2 = 0.5 + 0.2j, -0.4
        coeffs = [sum(u1**j * u2 ** (k - j) for j in range(k + 1)) for k in range(400)]
        for N in (0, 3, 10):
            assert sum(abs(c) for c in coeffs[N + 1:]) <= laurent_tail(u1, u2, N) * (1 + 1e-12)

    def test_order_meets_eps(self):
        N = laurent_order(0.3, -0.3, 0.29586)
        assert laurent_tail(0.3, -0.3, N) < 0.29586 <= laurent_tail(0.3, -0.3, N - 1)

    def test_order_needs_disc(self):
        with pytest.raises(ValueError):
            laurent_order(1.0, 0.2, 0.1)


class TestImprove:
    def test_epsilon(self):
        beta = improve_map(AnnularRegion(0, 0.2), DiscDatum(0.3, -0.3))
        assert beta.epsilon == pytest.approx(1 / (2 * 1.3 * 1.3), abs=1e-15)

    def test_modulus_increases(self):
        region, zeta = AnnularRegion(0, 0.2), DiscDatum(0.3, -0.3)
        beta = improve_map(region, zeta)
        old, new, edge = improvement(region, zeta, beta)
        assert old == pytest.approx(0.550459, abs=1e-6)
        assert new > 0.550459
        assert edge <= 1 and beta.R < 1

    def test_boundary_inside_radius(self):
        region = AnnularRegion(0.1 - 0.2j, 0.15)
        beta = improve_map(region, DiscDatum(0.5, -0.4j))
        pts = region.boundary(4096)
        u = beta.premap(pts)
        assert np.max(np.abs(u - beta.t * beta.g(u))) <= beta.R

    def test_infinitesimal_double_zero(self):
        region, zeta = AnnularRegion(0, 0.2), DiscDatum(0.4, 1, True)
        beta = improve_map(region, zeta)
        u1 = beta.premap(0.4)
        assert abs(beta.g(u1)) < 1e-14
        h = 1e-5
        assert abs((beta.g(u1 + h) - beta.g(u1 - h)) / (2 * h)) < 1e-8
        assert disc_modulus(beta.apply(zeta)) > disc_modulus(zeta)

    def test_base_point_in_hole(self):
        with pytest.raises(ValueError):
            improve_map(AnnularRegion(0.3, 0.2), DiscDatum(0.3, -0.3))

    def test_region_validation(self):
        with pytest.raises(ValueError):
            AnnularRegion(0.5, 0.6)
        with pytest.raises(ValueError):
            AnnularRegion(0, 0)

    def test_order_choices(self):
        with pytest.raises(ValueError):
            improve_map(AnnularRegion(0, 0.2), DiscDatum(0.3, -0.3), order="other")
        bound = improve_map(AnnularRegion(0, 0.2), DiscDatum(0.3, -0.3), order="bound")
        assert laurent_tail(0.3, -0.3, bound.order) < bound.epsilon

    def test_failure_carries_diagnostics(self):
        # hole hugging a base point: the Laurent part blows up on the inner circle
        with pytest.raises(ImproveError) as info:
            improve_map(AnnularRegion(0.6, 0.35), DiscDatum(0.05, -0.96), order="bound")
        assert info.value.diagnostics["order"] > 0
