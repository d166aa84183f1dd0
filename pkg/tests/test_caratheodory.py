import numpy as np
import pytest
from hypothesis import given, settings

from gextremal.caratheodory import (DatumType, PoleError, analytic_flat_royal, car_nr_oracle, car_solve,
                                    classify_datum, curvature_transport_check, mtilde, phi, phi_datum, phi_point,
                                    rho, rho_curvature, transport_datum)
from gextremal.core import Datum, DiscDatum, Mobius, disc_modulus, in_g
from gextremal.geodesics import closed_form

from conftest import g_points, mobius_maps, unimodular


def on_family(family, z1, z2, **kw):
    return Datum.discrete(closed_form(family, z1, **kw), closed_form(family, z2, **kw))


class TestPhi:
    @given(unimodular())
    def test_origin(self, w):
        assert phi_point(w, (0, 0)) == 0

    def test_royal_point(self):
        assert abs(phi_point(1j, (1, 0.25)) + 0.5) < 1e-15

    def test_flat_leaf(self):
        assert abs(phi_point(1, (0, 0.3 - 0.2j)) - (0.3 - 0.2j)) < 1e-15

    def test_pole(self):
        with pytest.raises(PoleError):
            phi_point(1, (2, 1))

    @given(unimodular(), g_points())
    def test_maps_g_into_disc(self, w, s):
        assert abs(phi(w, s.s1, s.s2)) < 1 + 1e-12


class TestPhiDatum:
    @pytest.mark.parametrize("z,lam", [(0.3, 1.0), (0.2 - 0.4j, 0.5j)])
    def test_royal_infinitesimal(self, z, lam):
        d = Datum.infinitesimal((2 * z, z * z), (lam, lam * z))
        for w in (1, 1j, np.exp(0.7j)):
            out = phi_datum(w, d)
            assert abs(out.z + z) < 1e-14 and abs(out.w + lam / 2) < 1e-14

    def test_discrete_flat(self):
        out = phi_datum(1, Datum.discrete((0, 0), (0, 0.4j)))
        assert out == DiscDatum(0, 0.4j)

    def test_zero_tangent(self):
        out = phi_datum(1j, Datum.infinitesimal((0.2, 0.1), (0, 0)))
        assert out.w == 0 and out.z == phi_point(1j, (0.2, 0.1))


class TestRho:
    def test_flat_constant(self):
        d = Datum.discrete((0, 0.3), (0, -0.3))
        vals = [rho(d, np.exp(1j * t)) for t in np.linspace(0, 6, 13)]
        assert np.ptp(vals) < 1e-15
        assert vals[0] == pytest.approx((0.6 / 1.09) ** 2, abs=1e-15)

    def test_royal_pair(self):
        w = 0.35 + 0.2j
        d = Datum.discrete((0, 0), (2 * w, w * w))
        for t in np.linspace(0, 6, 7):
            assert rho(d, np.exp(1j * t)) == pytest.approx(abs(w) ** 2, abs=1e-14)

    @pytest.mark.parametrize("beta,z", [(0, 0.3), (0.2 + 0.1j, -0.4j)])
    def test_infinitesimal_flat(self, beta, z):
        beta = complex(beta)
        d = Datum.infinitesimal((beta + beta.conjugate() * z, z), (beta.conjugate(), 1))
        for t in np.linspace(0, 6, 7):
            assert rho(d, np.exp(1j * t)) == pytest.approx(1 / (1 - abs(z) ** 2) ** 2, rel=1e-12)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            rho(Datum.discrete((0, 0), (0, 0)), 1)


class TestCarSolve:
    def test_royal_pair_constant(self):
        sol = car_solve(Datum.discrete((0, 0), (0.8, 0.16)))
        assert sol.constant_flag
        assert sol.value == pytest.approx(0.4, abs=1e-12)

    def test_on_k_half_unique(self):
        sol = car_solve(on_family("k_r", 0, 0.3, r=0.5))
        assert sol.value == pytest.approx(0.3, abs=1e-12)
        assert len(sol.maximizers) == 1
        assert abs(sol.omegas[0] - 1) < 1e-8

    def test_on_g_half_two_maximizers(self):
        sol = car_solve(on_family("g_r", 0, 0.3, r=0.5))
        assert len(sol.maximizers) == 2
        assert sol.value == pytest.approx(0.3, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(g_points(0.9), g_points(0.9), unimodular(), mobius_maps())
    def test_universality_over_test_maps(self, p, q, w, m):
        if abs(p.s1 - q.s1) + abs(p.s2 - q.s2) < 1e-3:
            return
        d = Datum.discrete(p, q)
        img = phi_datum(w, d)
        test = DiscDatum(m(img.z), m(img.w))
        assert car_solve(d).value >= disc_modulus(test) - 1e-12


class TestAnalyticFlatRoyal:
    def test_royal(self):
        assert analytic_flat_royal(Datum.discrete((0, 0), (0.6, 0.09))) is DatumType.ROYAL

    def test_flat(self):
        assert analytic_flat_royal(Datum.discrete((0, 0.2), (0, -0.5j))) is DatumType.FLAT

    def test_neither(self):
        assert analytic_flat_royal(Datum.discrete((0, 0), (1, 0.3))) is None


class TestClassify:
    def test_k_half(self):
        assert classify_datum(on_family("k_r", 0.1, -0.4 + 0.2j, r=0.5)) is DatumType.PURELY_UNBALANCED

    def test_h_one(self):
        assert classify_datum(on_family("h_r", 0.2, -0.3j, r=1.0)) is DatumType.EXCEPTIONAL

    def test_flat(self):
        assert classify_datum(Datum.discrete((0, 0), (0, 0.5))) is DatumType.FLAT

    def test_g_half(self):
        assert classify_datum(on_family("g_r", 0.1, 0.5j, r=0.5)) is DatumType.PURELY_BALANCED


class TestCurvature:
    @pytest.mark.parametrize("r,z1,z2", [(0.5, 0.1, -0.3), (0.3, 0.2j, 0.4 - 0.1j), (0.7, -0.5, 0.25j)])
    def test_k_r_closed_form(self, r, z1, z2):
        d = on_family("k_r", z1, z2, r=r)
        car = disc_modulus(DiscDatum(z1, z2))
        expected = -(1 - car**2) * 2 * r * (1 - r) * abs(z1 / (1 - z1) - z2 / (1 - z2)) ** 2
        got = rho_curvature(d, 0.0)
        assert got == pytest.approx(expected, rel=1e-5)

    def test_h_r_flat_at_maximizer(self):
        d = on_family("h_r", 0.1, -0.2 + 0.3j, r=0.7)
        sol = car_solve(d)
        assert abs(rho_curvature(d, sol.maximizers[0])) < 1e-6

    def test_flat_zero_everywhere(self):
        d = Datum.discrete((0, 0.1), (0, -0.4))
        assert abs(rho_curvature(d, 1.3)) < 1e-8  # stencil rounding floor

    def test_transport_identity(self):
        d = on_family("k_r", 0.1, -0.3, r=0.5)
        a, b = curvature_transport_check(d, Mobius.identity())
        assert a == pytest.approx(b, rel=1e-12)

    def test_transport_blaschke(self):
        d = on_family("k_r", 0.1, -0.3, r=0.5)
        a, b = curvature_transport_check(d, Mobius.blaschke(0.3))
        assert a == pytest.approx(b, rel=1e-5)


class TestTransport:
    @settings(max_examples=50, deadline=None)
    @given(mobius_maps(), g_points(0.9))
    def test_mtilde_preserves_g(self, m, s):
        assert in_g(*mtilde(m, s.s1, s.s2))

    @settings(max_examples=50, deadline=None)
    @given(mobius_maps(), g_points(0.9), unimodular())
    def test_phi_conjugation(self, m, s, w):
        w1 = m.reflect().inverse()(w)
        lhs = phi(w, *mtilde(m, s.s1, s.s2))
        rhs = Mobius(m.c, -m.a)(phi(w1, s.s1, s.s2))
        assert abs(lhs - rhs) < 1e-10

    @settings(max_examples=25, deadline=None)
    @given(mobius_maps(0.8), g_points(0.85), g_points(0.85))
    def test_car_invariant(self, m, p, q):
        if abs(p.s1 - q.s1) + abs(p.s2 - q.s2) < 1e-2:
            return
        d = Datum.discrete(p, q)
        assert car_solve(transport_datum(m, d)).value == pytest.approx(car_solve(d).value, abs=1e-9)


class TestNumericalRange:
    def test_royal_direction(self):
        assert car_nr_oracle(Datum.infinitesimal((0, 0), (1, 0))) == pytest.approx(0.5, abs=1e-9)

    def test_flat_direction(self):
        assert car_nr_oracle(Datum.infinitesimal((0, 0), (0, 1))) == pytest.approx(1.0, abs=1e-9)

    def test_matches_car(self):
        d = Datum.infinitesimal((0.3 - 0.1j, 0.2j), (0.4, -0.7 + 0.2j))
        assert car_nr_oracle(d) == pytest.approx(car_solve(d).value, abs=1e-6)

    def test_rejects_discrete(self):
        with pytest.raises(ValueError):
            car_nr_oracle(Datum.discrete((0, 0), (0, 0.5)))
