import numpy as np
import pytest
from hypothesis import given

from gextremal.core import PointG, in_g
from gextremal.embeddings import Mat2, Target, embed, retract_map, spectral_radius

from conftest import disc_points, g_points


class TestEmbed:
    def test_origin_companion(self):
        A = embed((0, 0), Target.SPECTRAL_BALL)
        assert np.array_equal(A.as_array(), [[0, 1], [0, 0]])
        assert spectral_radius(A) == 0

    def test_tetrablock(self):
        z = 0.3 - 0.2j
        assert embed((2 * z, z * z), "Tetrablock") == (z, z, z * z)

    def test_pentablock(self):
        assert embed((0, 0.4j), Target.PENTABLOCK) == (0, 0, 0.4j)

    def test_outside_g(self):
        with pytest.raises(ValueError):
            embed((2, 1), Target.SPECTRAL_BALL)

    def test_frame(self):
        F = np.array([[1, 2], [0, 1]], dtype=complex)
        A = embed((0.5, 0.06), Target.SPECTRAL_BALL, frame=lambda s: F)
        assert not np.allclose(A.as_array(), [[0, 1], [-0.06, 0.5]])
        assert np.allclose(tuple(retract_map(A, Target.SPECTRAL_BALL)), (0.5, 0.06), atol=1e-15)

    def test_non_finite_matrix(self):
        with pytest.raises(ValueError):
            Mat2(np.nan, 0, 0, 0)


class TestRetract:
    def test_zero_companion(self):
        assert retract_map([[0, 1], [0, 0]], Target.SPECTRAL_BALL) == PointG(0, 0)

    def test_tetrablock(self):
        s = retract_map((0.3, 0.3, 0.1), Target.TETRABLOCK)
        assert abs(s.s1 - 0.6) < 1e-15 and s.s2 == 0.1

    @pytest.mark.parametrize("target", list(Target))
    @given(s=g_points(0.999))
    def test_left_inverse(self, target, s):
        back = retract_map(embed(s, target), target)
        assert abs(back.s1 - s.s1) < 1e-14 and abs(back.s2 - s.s2) < 1e-14


class TestSpectralRadius:
    def test_zero(self):
        assert spectral_radius(np.zeros((2, 2))) == 0

    def test_royal(self):
        z = 0.4 + 0.3j
        A = Mat2(0, 1, -z * z, 2 * z)
        assert spectral_radius(A) == pytest.approx(abs(z), abs=1e-7)  # double eigenvalue: sqrt-limited

    def test_boundary(self):
        assert spectral_radius([[0, 1], [1, 0]]) == pytest.approx(1)

    @given(a=disc_points(1.3), b=disc_points(1.3))
    def test_membership_equivalence(self, a, b):
        s1, s2 = a + b, a * b
        r = max(abs(a), abs(b))
        if abs(r - 1) < 1e-6:
            return
        A = Mat2(0, 1, -s2, s1)
        assert bool(in_g(s1, s2)) == (spectral_radius(A) < 1)
