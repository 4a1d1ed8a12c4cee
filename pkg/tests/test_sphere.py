import math

import numpy as np
import pytest
from scipy import integrate

from measurecalc import SphereTiling, VonMisesFisher, tile_integrals
from measurecalc.sphere import unit_vector


class TestTiling:
    @pytest.mark.parametrize("text", ["8x8", "8x16", "16x16", "1x1", "3x5"])
    def test_equal_areas_sum_to_sphere(self, text):
        t = SphereTiling.parse(text)
        s = t.space()
        assert np.all(s.volumes == s.volumes[0])
        assert s.total_volume == pytest.approx(4 * math.pi, rel=1e-15)

    def test_tile_areas_by_quadrature(self):
        t = SphereTiling(4, 3)
        areas = tile_integrals(lambda x: np.ones(x.shape[:-1]), t)
        np.testing.assert_allclose(areas, t.tile_area, rtol=1e-13)

    def test_bad_text(self):
        with pytest.raises(ValueError):
            SphereTiling.parse("8by8")

    def test_locate(self):
        t = SphereTiling(2, 4)
        pts = np.array([unit_vector(45, 10), unit_vector(-45, 100), unit_vector(10, 350)])
        np.testing.assert_array_equal(t.locate(pts), [1 * 4 + 0, 0 * 4 + 1, 1 * 4 + 3])

    def test_locate_agrees_with_uniform_mass(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((400_000, 3))
        x /= np.linalg.norm(x, axis=1)[:, None]
        t = SphereTiling(4, 4)
        f = np.bincount(t.locate(x), minlength=16) / len(x)
        np.testing.assert_allclose(f, 1 / 16, atol=0.003)


class TestVonMisesFisher:
    @pytest.mark.parametrize("kappa", [0.0, 0.5, 4.0, 50.0])
    def test_normalised(self, kappa):
        f = VonMisesFisher.at(20, 30, kappa)
        assert tile_integrals(f, SphereTiling(16, 16), order=10).sum() == pytest.approx(1.0, rel=1e-10)

    def test_density_against_scipy_quadrature(self):
        f = VonMisesFisher([0, 0, 1], 3.0)
        # density depends only on z; integrate 2 pi f(z) dz
        val, _ = integrate.quad(lambda z: 2 * math.pi * f(np.array([0.0, math.sqrt(1 - z * z), z])), -1, 1)
        assert val == pytest.approx(1.0, rel=1e-12)

    def test_product_is_vmf(self):
        f1, f2 = VonMisesFisher.at(25, 17, 4), VonMisesFisher.at(-25, 37, 4)
        prod = f1.product(f2)
        t = SphereTiling(16, 16)
        direct = tile_integrals(lambda x: f1(x) * f2(x), t, order=10)
        np.testing.assert_allclose(direct / direct.sum(), tile_integrals(prod, t, order=10), rtol=1e-9, atol=1e-15)

    def test_large_kappa_no_overflow(self):
        f = VonMisesFisher([1, 0, 0], 5000.0)
        assert np.isfinite(f(np.array([1.0, 0.0, 0.0])))
