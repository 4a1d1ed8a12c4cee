import math

import numpy as np
import pytest
from scipy import integrate

from measurecalc import SamplerConfig, ZeroOverlap
from measurecalc.demos import (
    lognormal_cell_probabilities,
    lognormal_density,
    resistance_density_by_slack,
    run_resistance_demo,
    run_sets_demo,
    run_sphere_demo,
)


class TestResistanceOracles:
    @pytest.mark.parametrize("r", [1.0, 3.0, 5.0, 8.0, 20.0])
    @pytest.mark.parametrize("slack", ["VI", "V"])
    def test_slack_choice_does_not_matter(self, r, slack):
        got = resistance_density_by_slack(r, 10.0, 2.0, 0.3, 0.4, slack)
        assert got == pytest.approx(lognormal_density(r, 5.0, 0.5), rel=1e-9)

    def test_cell_probabilities_integrate_density(self):
        edges = np.array([2.0, 4.0, 5.0, 9.0])
        p = lognormal_cell_probabilities(edges, 5.0, 0.5)
        q = [integrate.quad(lognormal_density, a, b, args=(5.0, 0.5))[0] for a, b in zip(edges[:-1], edges[1:])]
        np.testing.assert_allclose(p, q, rtol=1e-10)

    def test_bad_slack(self):
        with pytest.raises(ValueError):
            resistance_density_by_slack(1.0, 10, 2, 0.3, 0.4, "I")


class TestResistanceDemo:
    def test_small_run(self):
        rep = run_resistance_demo(cfg=SamplerConfig(seed=2, n_samples=100_000))
        assert rep.R0_hat == pytest.approx(5.0, rel=0.02)
        assert rep.sigmaR_hat == pytest.approx(0.5, rel=0.02)
        assert rep.tv_lognormal < 0.02

    def test_point_mass(self):
        rep = run_resistance_demo(sigma_v=0.0, sigma_i=0.0, cfg=SamplerConfig(n_samples=10_000))
        assert np.all(rep.samples.points[:, 0] == 5.0)
        assert rep.sigmaR_expected == 0.0

    def test_needs_enough_samples(self):
        with pytest.raises(ValueError):
            run_resistance_demo(cfg=SamplerConfig(n_samples=100))


class TestSphereDemo:
    def test_uniform_pair(self):
        spec = {"kind": "uniform"}
        rep = run_sphere_demo(["4x4", "4x8"], spec, spec, SamplerConfig(seed=1, n_samples=200_000))
        for r in rep.resolutions:
            assert r.tv_to_product <= 0.01
            assert r.acceptance_rate == pytest.approx(1 / r.n_tiles, rel=0.05)

    def test_disjoint_caps(self):
        f1 = {"kind": "cap", "lat": 60, "lon": 0, "radius": 20}
        f2 = {"kind": "cap", "lat": -60, "lon": 180, "radius": 20}
        with pytest.raises(ZeroOverlap):
            run_sphere_demo(["8x8"], f1, f2, SamplerConfig(n_samples=1000))


class TestSetsDemo:
    def test_image_property(self):
        from measurecalc import image

        rep = run_sets_demo(seed=4)
        assert rep.result.y_post == image(rep.mapping, rep.result.x_post)
