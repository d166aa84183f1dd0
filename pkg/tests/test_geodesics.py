import numpy as np
import pytest
from hypothesis import given, settings

from gextremal.caratheodory import DatumType, car_solve
from gextremal.core import Datum, Mobius, PointG, disc_modulus, in_g
from gextremal.geodesics import (Family, aut_apply, balanced_factorization, balanced_geodesic,
                                 canonical_geodesic, closed_form, geodesic_eval, geometric_classify,
                                 retraction, retraction_residual, royal_signature, solve_kobayashi)
from gextremal.variety import variety_polynomial

from conftest import disc_points, g_points, mobius_maps

FAMILIES = [("k_r", {"r": 0.5}), ("g_r", {"r": 0.4}), ("h_r", {"r": 1.3}),
            ("f_beta", {"beta": 0.2 - 0.3j}), ("royal", {})]


def close(p, q, tol=1e-12):
    return abs(p.s1 - q[0]) <= tol and abs(p.s2 - q[1]) <= tol


class TestCanonical:
    def test_k_half(self):
        assert close(canonical_geodesic("k_r", r=0.5)(0.4), (0.5, -0.05))

    def test_royal(self):
        assert close(canonical_geodesic("royal")(0.3), (0.6, 0.09))

    @pytest.mark.parametrize("r", [0.2, 1.0, 3.0])
    def test_h_r_at_one(self, r):
        assert close(canonical_geodesic("h_r", r=r)(1), (2, 1))

    @pytest.mark.parametrize("name,params", FAMILIES)
    @given(z=disc_points(0.98))
    def test_matches_closed_form(self, name, params, z):
        k = canonical_geodesic(name, **params)
        assert close(k(z), closed_form(name, z, **params), 1e-10)

    @pytest.mark.parametrize("name,params", FAMILIES)
    @given(z=disc_points(0.98))
    def test_lands_in_g(self, name, params, z):
        assert in_g(*canonical_geodesic(name, **params).evaluate(z))

    def test_bad_parameters(self):
        for name, params in [("k_r", {"r": 1.0}), ("g_r", {"r": 0}), ("h_r", {"r": -1}), ("f_beta", {"beta": 1})]:
            with pytest.raises(ValueError):
                canonical_geodesic(name, **params)


class TestEval:
    def test_k_r_nodes(self):
        k = canonical_geodesic("k_r", r=0.3)
        assert close(geodesic_eval(k, 0), (0, 0))
        assert close(geodesic_eval(k, 1), (2, 1))

    def test_g_r_minus_one(self):
        assert close(geodesic_eval(canonical_geodesic("g_r", r=0.6), -1), (-2, 1))

    def test_outside_disc(self):
        with pytest.raises(ValueError):
            geodesic_eval(canonical_geodesic("royal"), 1.5)


class TestAutApply:
    def test_identity(self):
        m = Mobius.identity()
        k = canonical_geodesic("k_r", r=0.5)
        d = Datum.discrete((0, 0), (0.5, 0.1))
        assert aut_apply(m, PointG(0.3, 0.1)) == PointG(0.3, 0.1)
        assert aut_apply(m, d) == d
        assert close(aut_apply(m, k)(0.3), tuple(k(0.3)))

    @settings(max_examples=30, deadline=None)
    @given(mobius_maps(), disc_points(0.9))
    def test_geodesic_transport_commutes(self, m, z):
        k = canonical_geodesic("g_r", r=0.3)
        assert close(aut_apply(m, k)(z), tuple(aut_apply(m, k(z))), 1e-9)

    @settings(max_examples=30, deadline=None)
    @given(mobius_maps(), disc_points(0.9))
    def test_rebase_is_same_map(self, m, z):
        k = aut_apply(m, canonical_geodesic("k_r", r=0.6))
        assert close(k.rebase()(z), tuple(k(z)), 1e-9)


class TestKobayashi:
    def test_flat(self):
        sol = solve_kobayashi(Datum.discrete((0, 0), (0, 0.4j)))
        assert sol.geodesic.family is Family.FLAT
        assert disc_modulus(sol.zeta) == pytest.approx(0.4)

    def test_same_range_as_k_half(self):
        k = canonical_geodesic("k_r", r=0.5)
        sol = solve_kobayashi(Datum.discrete(k(0), k(0.3)))
        assert disc_modulus(sol.zeta) == pytest.approx(0.3, abs=1e-10)
        P = variety_polynomial(k).normalized().coefficients()
        Q = variety_polynomial(sol.geodesic).normalized().coefficients()
        assert np.max(np.abs(P - Q)) < 1e-9

    def test_royal(self):
        sol = solve_kobayashi(Datum.discrete((0, 0), (0.8, 0.16)))
        assert sol.geodesic.family is Family.ROYAL
        assert disc_modulus(sol.zeta) == pytest.approx(0.4)

    @settings(max_examples=30, deadline=None)
    @given(g_points(0.85), g_points(0.85))
    def test_car_equals_kob(self, p, q):
        if abs(p.s1 - q.s1) + abs(p.s2 - q.s2) < 1e-2:
            return
        d = Datum.discrete(p, q)
        sol = solve_kobayashi(d)
        assert sol.residual < 1e-8
        assert disc_modulus(sol.zeta) == pytest.approx(car_solve(d).value, abs=1e-8)

    def test_infinitesimal(self):
        d = Datum.infinitesimal((0.2 + 0.1j, -0.1), (0.5, 0.3j))
        sol = solve_kobayashi(d)
        back = sol.geodesic.push(sol.zeta)
        assert abs(back.p.s1 - d.p.s1) < 1e-8
        assert np.allclose(back.v, d.v, atol=1e-7)


class TestRoyalSignature:
    def test_k_r(self):
        sig = royal_signature(canonical_geodesic("k_r", r=0.5))
        nodes = sorted(sig.nodes, key=lambda n: n.boundary)
        assert [(n.boundary, n.multiplicity) for n in nodes] == [(False, 1), (True, 1)]
        assert abs(nodes[0].location) < 1e-9 and abs(nodes[1].location - 1) < 1e-9
        assert geometric_classify(sig) is DatumType.PURELY_UNBALANCED

    def test_h_r(self):
        sig = royal_signature(canonical_geodesic("h_r", r=0.8))
        assert len(sig.nodes) == 1
        node = sig.nodes[0]
        assert node.boundary and node.order == 4
        assert abs(node.location - 1) < 1e-6 and node.multiplicity == 2
        assert geometric_classify(sig) is DatumType.EXCEPTIONAL

    def test_royal(self):
        sig = royal_signature(canonical_geodesic("royal"))
        assert sig.identically_royal
        assert geometric_classify(sig) is DatumType.ROYAL

    def test_g_r(self):
        sig = royal_signature(canonical_geodesic("g_r", r=0.5))
        assert sorted(abs(n.location - 1) < 1e-9 or abs(n.location + 1) < 1e-9 for n in sig.nodes) == [True, True]
        assert geometric_classify(sig) is DatumType.PURELY_BALANCED

    def test_flat(self):
        assert geometric_classify(royal_signature(canonical_geodesic("f_beta", beta=0.3))) is DatumType.FLAT


class TestRetraction:
    @pytest.mark.parametrize("name,params", [("f_beta", {"beta": 0}), ("royal", {}), ("k_r", {"r": 0.4})])
    def test_idempotent(self, rng, name, params):
        k = canonical_geodesic(name, **params)
        z = 0.95 * np.sqrt(rng.random((2, 100))) * np.exp(2j * np.pi * rng.random((2, 100)))
        samples = [PointG(a + b, a * b) for a, b in z.T]
        assert retraction_residual(k, samples) < 1e-10

    def test_fixes_range(self):
        k = canonical_geodesic("h_r", r=0.5)
        r = retraction(k)
        for z in (0, 0.3, -0.2 + 0.5j):
            s = k(z)
            assert np.allclose(r(s.s1, s.s2), (s.s1, s.s2), atol=1e-9)


class TestBalanced:
    def test_identity_gives_royal(self):
        assert balanced_geodesic(Mobius.identity()).family is Family.ROYAL

    def test_reflection_gives_g(self):
        k = balanced_geodesic(Mobius(1, 0.3))
        z = 0.2 - 0.4j
        m = Mobius(1, 0.3)
        assert close(k(z), (z + m(z), z * m(z)), 1e-10)
        assert k.family is Family.PURELY_BALANCED

    def test_no_circle_fixed_point(self):
        with pytest.raises(ValueError):
            balanced_geodesic(Mobius(1j, 0.2))

    def test_factorization(self):
        _, _, res = balanced_factorization(canonical_geodesic("g_r", r=0.5))
        assert res < 1e-9
