import itertools
import math
import warnings

import numpy as np
import pytest

from measurecalc import (
    AttemptBudgetExhausted,
    CellMapping,
    CellSet,
    CoordinateDomain,
    EmptyCloud,
    ExprMapping,
    GridMeasure,
    MappingDomainError,
    NotProbability,
    ParticleMeasure,
    ProductLognormal,
    SamplerConfig,
    SpaceMismatch,
    UnboundedLikelihood,
    ZeroAcceptance,
    ZeroMassSampling,
    ZeroOverlap,
    bin_particles,
    coincidence_intersect,
    histogram,
    intersect,
    interval_space,
    make_space,
    measure_set,
    particle_probability,
    pushforward,
    rejection_posterior,
    sample_grid,
    sample_source,
    transport,
    tv_distance,
    uniform,
)


def unit_space(n, prefix="c"):
    return make_space([f"{prefix}{i}" for i in range(n)], [1.0] * n)


def point_mass(space, i):
    return measure_set(space, CellSet(space, [i]))


def freqs(cloud, n_cells):
    return np.bincount(cloud.points, minlength=n_cells) / len(cloud)


class TestSamplerConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(seed=-1), dict(streams=0), dict(n_samples=0), dict(acceptance_scale=0.0), dict(acceptance_scale="x")],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SamplerConfig(**kwargs)

    def test_split(self):
        assert SamplerConfig(n_samples=10, streams=3).split() == [4, 3, 3]


class TestSampleGrid:
    def test_point_mass(self):
        s = unit_space(4)
        cloud = sample_grid(point_mass(s, 2), SamplerConfig(seed=3, n_samples=1000))
        assert np.all(cloud.points == 2)

    def test_uniform_frequency(self):
        cloud = sample_grid(uniform(unit_space(2)), SamplerConfig(seed=1, n_samples=1_000_000))
        assert abs(freqs(cloud, 2)[0] - 0.5) <= 0.002

    def test_deterministic(self):
        m = GridMeasure(make_space(list("abc"), [1, 2, 3]), [0.3, 0.1, 0.1])
        cfg = SamplerConfig(seed=11, n_samples=5000, streams=3)
        np.testing.assert_array_equal(sample_grid(m, cfg).points, sample_grid(m, cfg).points)

    def test_worker_count_does_not_matter(self):
        m = GridMeasure(unit_space(5), [1, 2, 3, 4, 5])
        a = sample_grid(m, SamplerConfig(seed=5, n_samples=40_000, streams=4, workers=1))
        b = sample_grid(m, SamplerConfig(seed=5, n_samples=40_000, streams=4, workers=4))
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.streams, b.streams)

    def test_zero_mass(self):
        with pytest.raises(ZeroMassSampling):
            sample_grid(GridMeasure(unit_space(2), [0, 0]), SamplerConfig())

    def test_zero_cells_never_drawn(self):
        cloud = sample_grid(GridMeasure(unit_space(4), [1, 0, 1, 0]), SamplerConfig(n_samples=50_000))
        assert set(np.unique(cloud.points)) == {0, 2}


class TestCoincidence:
    def test_point_masses_always_accepted(self):
        s = unit_space(3)
        cloud = coincidence_intersect(point_mass(s, 1), point_mass(s, 1), SamplerConfig(n_samples=1000))
        assert np.all(cloud.points == 1)
        assert cloud.info["attempts"] == 1000

    def test_two_cell_frequency(self):
        s = unit_space(2)
        p1, p2 = GridMeasure(s, [0.5, 0.5]), GridMeasure(s, [0.8, 0.2])
        cloud = coincidence_intersect(p1, p2, SamplerConfig(seed=2, n_samples=1_000_000))
        assert abs(freqs(cloud, 2)[0] - 0.8) <= 0.004

    def test_disjoint(self):
        s = unit_space(3)
        with pytest.raises(ZeroOverlap):
            coincidence_intersect(point_mass(s, 0), point_mass(s, 1), SamplerConfig())

    def test_requires_probability(self):
        s = unit_space(2)
        with pytest.raises(NotProbability):
            coincidence_intersect(GridMeasure(s, [1, 1]), uniform(s), SamplerConfig())

    def test_acceptance_rate_bookkeeping(self):
        s = unit_space(5)
        rng = np.random.default_rng(4)
        p1 = GridMeasure.from_masses(s, rng.dirichlet(np.ones(5)), "probability")
        p2 = GridMeasure.from_masses(s, rng.dirichlet(np.ones(5)), "probability")
        cloud = coincidence_intersect(p1, p2, SamplerConfig(seed=9, n_samples=200_000))
        rate = math.fsum(p1.masses * p2.masses)
        n = cloud.info["attempts"]
        assert abs(cloud.info["acceptance_rate"] - rate) <= 4 * math.sqrt(rate * (1 - rate) / n)

    def test_unequal_volumes(self):
        s = make_space(list("abcde"), [1, 2, 1, 0.5, 1.5])
        rng = np.random.default_rng(4)
        p1 = GridMeasure.from_masses(s, rng.dirichlet(np.ones(5)), "probability")
        p2 = GridMeasure.from_masses(s, rng.dirichlet(np.ones(5)), "probability")
        cloud = coincidence_intersect(p1, p2, SamplerConfig(seed=9, n_samples=200_000))
        rate = math.fsum(p1.masses * p2.masses * 0.5 / s.volumes)
        n = cloud.info["attempts"]
        assert abs(cloud.info["acceptance_rate"] - rate) <= 4 * math.sqrt(rate * (1 - rate) / n)
        assert tv_distance(histogram(cloud, s), intersect(p1, p2)) <= 0.01

    def test_budget(self):
        s = unit_space(100)
        cfg = SamplerConfig(n_samples=10_000, max_attempts=1000)
        with pytest.raises(AttemptBudgetExhausted):
            coincidence_intersect(uniform(s), uniform(s), cfg)


class TestRejection:
    def test_unit_likelihood_keeps_everything(self):
        s = unit_space(3)
        prior = GridMeasure(s, [0.2, 0.3, 0.5], "probability")
        cloud = rejection_posterior(prior, np.ones(3), SamplerConfig(n_samples=10_000))
        assert cloud.info["attempts"] == 10_000
        assert cloud.info["evidence"] == 1.0

    def test_hard_rejection(self):
        s = unit_space(2)
        cloud = rejection_posterior(uniform(s), [1.0, 0.0], SamplerConfig(n_samples=10_000))
        assert np.all(cloud.points == 0)

    def test_three_cell_posterior(self):
        s = unit_space(3)
        prior = GridMeasure(s, [0.2, 0.3, 0.5], "probability")
        cloud = rejection_posterior(prior, [1.0, 1.0, 2.0], SamplerConfig(seed=4, n_samples=1_000_000))
        exact = GridMeasure(s, np.array([2, 3, 10]) / 15, "probability")
        assert tv_distance(histogram(cloud, s), exact) <= 0.005
        info = cloud.info
        assert abs(info["evidence"] - 1.5) <= 4 * info["evidence_sigma"]

    def test_explicit_k_too_large(self):
        s = unit_space(2)
        with pytest.raises(UnboundedLikelihood):
            rejection_posterior(uniform(s), [1.0, 2.0], SamplerConfig(acceptance_scale=0.9))

    def test_explicit_k_smaller_is_fine(self):
        s = unit_space(2)
        cloud = rejection_posterior(uniform(s), [1.0, 2.0], SamplerConfig(n_samples=100_000, acceptance_scale=0.25))
        assert cloud.info["k"] == 0.25
        assert abs(freqs(cloud, 2)[0] - 1 / 3) < 0.01

    def test_zero_likelihood(self):
        s = unit_space(2)
        with pytest.raises(ZeroAcceptance):
            rejection_posterior(uniform(s), [0.0, 0.0], SamplerConfig())

    def test_budget_without_acceptance(self):
        s = unit_space(2)
        cfg = SamplerConfig(n_samples=10, max_attempts=100, acceptance_scale=1e-12)
        with pytest.raises(ZeroAcceptance):
            rejection_posterior(uniform(s), [1.0, 1.0], cfg)

    def test_analytic_prior_with_pilot(self):
        src = ProductLognormal(["x"], [1.0], [0.5])

        def lik(pts):
            return np.exp(-0.5 * (np.log(pts[:, 0]) / 0.5) ** 2)

        cloud = rejection_posterior(src, lik, SamplerConfig(seed=3, n_samples=200_000))
        logs = np.log(cloud.points[:, 0])
        # product of two N(0, 0.5^2) kernels in log x: N(0, 0.5^2 / 2)
        assert abs(logs.mean()) < 0.005
        assert abs(logs.std() - 0.5 / math.sqrt(2)) < 0.005
        assert abs(cloud.info["evidence"] - 1 / math.sqrt(2)) <= 4 * cloud.info["evidence_sigma"]

    def test_pilot_detects_growth(self):
        src = ProductLognormal(["x"], [1.0], [0.5])
        calls = itertools.count(1)

        def growing(pts):
            return np.full(len(pts), 10.0 ** next(calls))

        with pytest.raises(UnboundedLikelihood):
            rejection_posterior(src, growing, SamplerConfig())

    def test_particle_prior(self):
        s = unit_space(2)
        prior = sample_grid(uniform(s), SamplerConfig(seed=1, n_samples=100_000))
        post = rejection_posterior(prior, [1.0, 3.0], SamplerConfig(seed=2))
        assert abs(freqs(post, 2)[1] - 0.75) < 0.01


class TestTransport:
    def test_identity(self):
        s = unit_space(3)
        cloud = sample_grid(uniform(s), SamplerConfig(n_samples=100))
        moved = transport(cloud, CellMapping.identity(s))
        np.testing.assert_array_equal(moved.points, cloud.points)
        np.testing.assert_array_equal(moved.weights, cloud.weights)

    def test_collapse(self):
        x, y = unit_space(2), make_space(["a"], [1.0])
        cloud = sample_grid(uniform(x), SamplerConfig(n_samples=100))
        assert np.all(transport(cloud, CellMapping(x, y, [0, 0])).points == 0)

    def test_zero_current(self):
        cloud = ParticleMeasure(CoordinateDomain(("V", "I")), [[1.0, 1.0], [2.0, 0.5], [3.0, 0.0]])
        with pytest.raises(MappingDomainError, match="particle 2"):
            transport(cloud, ExprMapping(["V", "I"], {"R": "V/I"}))

    def test_mismatched_domain(self):
        cloud = ParticleMeasure(CoordinateDomain(("a",)), [[1.0]])
        with pytest.raises(SpaceMismatch):
            transport(cloud, ExprMapping(["V", "I"], {"R": "V/I"}))

    def test_transport_law(self):
        rng = np.random.default_rng(8)
        x = make_space([f"x{i}" for i in range(100)], rng.uniform(0.5, 2, 100))
        y = make_space([f"y{i}" for i in range(30)], rng.uniform(0.5, 2, 30))
        phi = CellMapping(x, y, rng.integers(0, 30, 100))
        pi = GridMeasure(x, rng.uniform(0, 1, 100))
        cloud = transport(sample_grid(pi, SamplerConfig(seed=8, n_samples=1_000_000)), phi)
        exact = pushforward(pi, phi)
        exact = GridMeasure(y, exact.density / exact.masses.sum(), "probability")
        assert tv_distance(histogram(cloud, y), exact) <= 0.01


class TestHistogram:
    def test_single_particle(self):
        s = make_space(["a"], [1.0])
        np.testing.assert_array_equal(histogram(ParticleMeasure(s, [0]), s).density, [1.0])

    def test_uniform_four_cells(self):
        s = unit_space(4)
        h = histogram(sample_grid(uniform(s), SamplerConfig(seed=6, n_samples=1_000_000)), s)
        np.testing.assert_allclose(h.density, 0.25, atol=0.004)

    def test_out_of_range(self):
        target = interval_space([0.0, 1.0, 2.0])
        cloud = ParticleMeasure(CoordinateDomain(("t",)), [[0.5], [1.5], [7.0]])
        assert bin_particles(cloud, target)[1] == 1
        with pytest.warns(RuntimeWarning, match="out_of_range"):
            h = histogram(cloud, target)
        np.testing.assert_array_equal(h.masses, [0.5, 0.5])

    def test_half_open_cells(self):
        target = interval_space([0.0, 1.0, 2.0])
        cloud = ParticleMeasure(CoordinateDomain(("t",)), [[0.0], [1.0]])
        np.testing.assert_array_equal(bin_particles(cloud, target)[0], [1.0, 1.0])
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            histogram(cloud, target)

    def test_empty(self):
        s = unit_space(2)
        with pytest.raises(EmptyCloud):
            histogram(ParticleMeasure(s, []), s)

    def test_weights(self):
        s = unit_space(2)
        h = histogram(ParticleMeasure(s, [0, 1], weights=[3.0, 1.0]), s)
        np.testing.assert_array_equal(h.density, [0.75, 0.25])


class TestTV:
    def test_equal(self):
        m = uniform(unit_space(3))
        assert tv_distance(m, m) == 0.0

    def test_disjoint(self):
        s = unit_space(2)
        assert tv_distance(point_mass(s, 0), point_mass(s, 1)) == 1.0

    def test_example(self):
        s = unit_space(2)
        assert tv_distance(GridMeasure(s, [0.8, 0.2]), GridMeasure(s, [0.5, 0.5])) == pytest.approx(0.3, abs=1e-15)

    def test_errors(self):
        with pytest.raises(SpaceMismatch):
            tv_distance(uniform(unit_space(2)), uniform(unit_space(3)))
        with pytest.raises(NotProbability):
            s = unit_space(2)
            tv_distance(GridMeasure(s, [1, 1]), uniform(s))


class TestSources:
    def test_lognormal_zero_spread(self):
        src = ProductLognormal(["V", "I"], [10.0, 2.0], [0.0, 0.0])
        cloud = sample_source(src, SamplerConfig(n_samples=100))
        assert np.all(cloud.points == [10.0, 2.0])

    def test_particle_probability(self):
        s = unit_space(3)
        cloud = ParticleMeasure(s, [0, 1, 1, 2])
        assert particle_probability(cloud, CellSet(s, [1])) == 0.5
