import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from measurecalc import (
    CellSet,
    EmptySetRenormalize,
    ForeignCellSet,
    GridMeasure,
    InvalidDensity,
    NormalizationMode,
    NotProbability,
    SpaceMismatch,
    ZeroOverlap,
    ZeroProbabilityConditioning,
    condition,
    intersect,
    make_space,
    measure_of,
    measure_set,
    measure_set_overlap_constant,
    support,
    total_mass,
    uniform,
)

UNIT = NormalizationMode.UNIT_CONSTANT
RENORM = NormalizationMode.RENORMALIZE


def unit_space(n):
    return make_space([f"c{i}" for i in range(n)], [1.0] * n)


@st.composite
def spaces_with_measures(draw, k=1, max_cells=10, zeros=True):
    n = draw(st.integers(1, max_cells))
    vols = draw(st.lists(st.floats(0.1, 5.0), min_size=n, max_size=n))
    s = make_space([f"c{i}" for i in range(n)], vols)
    dens = st.one_of(st.just(0.0), st.floats(1e-3, 4.0)) if zeros else st.floats(0.01, 4.0)
    ms = [GridMeasure(s, draw(st.lists(dens, min_size=n, max_size=n))) for _ in range(k)]
    return s, ms


class TestGridMeasure:
    @pytest.mark.parametrize("bad", [-0.1, math.nan, math.inf])
    def test_invalid_density(self, bad):
        with pytest.raises(InvalidDensity):
            GridMeasure(unit_space(2), [0.5, bad])

    def test_wrong_length(self):
        with pytest.raises(InvalidDensity):
            GridMeasure(unit_space(2), [1.0])

    def test_probability_flag_checked(self):
        with pytest.raises(NotProbability):
            GridMeasure(unit_space(2), [0.5, 0.6], "probability")

    def test_masses(self):
        s = make_space(["a", "b"], [2.0, 1.0])
        np.testing.assert_array_equal(GridMeasure(s, [1, 2]).masses, [2.0, 2.0])


class TestTotalMass:
    def test_uniform_probability(self):
        assert total_mass(GridMeasure(unit_space(2), [0.5, 0.5])) == 1.0

    def test_zero(self):
        assert total_mass(GridMeasure(unit_space(3), [0, 0, 0])) == 0.0

    def test_weighted(self):
        s = make_space(["a", "b"], [2.0, 1.0])
        assert total_mass(GridMeasure(s, [1.0, 2.0])) == 4.0


class TestMeasureOf:
    def test_half(self):
        s = unit_space(4)
        assert measure_of(uniform(s), CellSet(s, [0, 1])) == 0.5

    def test_empty(self):
        s = unit_space(3)
        assert measure_of(GridMeasure(s, [1, 2, 3]), s.empty()) == 0.0

    def test_single(self):
        s = unit_space(3)
        assert measure_of(GridMeasure(s, [0.2, 0.3, 0.5]), CellSet(s, [2])) == 0.5

    def test_foreign(self):
        with pytest.raises(ForeignCellSet):
            measure_of(uniform(unit_space(2)), unit_space(3).all())


class TestMeasureSet:
    def test_renormalize(self):
        s = unit_space(4)
        m = measure_set(s, CellSet(s, [0, 1]), RENORM)
        np.testing.assert_array_equal(m.density, [0.5, 0.5, 0, 0])
        assert total_mass(m) == 1.0

    def test_unit_constant(self):
        s = unit_space(4)
        np.testing.assert_array_equal(measure_set(s, CellSet(s, [0, 1]), UNIT).density, [1, 1, 0, 0])

    def test_whole_space_is_uniform(self):
        s = make_space(["a", "b", "c"], [1.0, 2.0, 5.0])
        np.testing.assert_array_equal(measure_set(s, s.all()).density, np.full(3, 1 / 8))

    def test_empty_renormalize(self):
        s = unit_space(2)
        with pytest.raises(EmptySetRenormalize):
            measure_set(s, s.empty(), RENORM)

    def test_empty_unit_constant_is_zero(self):
        s = unit_space(2)
        assert total_mass(measure_set(s, s.empty(), UNIT)) == 0.0


class TestIntersect:
    def test_two_cell_example(self):
        s = unit_space(2)
        r = intersect(GridMeasure(s, [0.5, 0.5]), GridMeasure(s, [0.8, 0.2]), RENORM)
        np.testing.assert_allclose(r.density, [0.8, 0.2], rtol=1e-15)
        assert r.kind == "probability"

    def test_identity_element(self):
        s = make_space(["a", "b", "c"], [1.0, 2.0, 0.5])
        m = GridMeasure(s, [0.2, 0.2, 0.8], "probability")
        np.testing.assert_allclose(intersect(m, measure_set(s, s.all())).density, m.density, rtol=1e-15)

    def test_disjoint_sets(self):
        s = unit_space(4)
        with pytest.raises(ZeroOverlap):
            intersect(measure_set(s, CellSet(s, [0])), measure_set(s, CellSet(s, [1])))

    def test_unit_mode_is_raw(self):
        s = unit_space(2)
        r = intersect(GridMeasure(s, [2, 3]), GridMeasure(s, [4, 5]), "unit_constant")
        np.testing.assert_array_equal(r.density, [8, 15])
        assert r.kind == "raw"

    def test_space_mismatch(self):
        with pytest.raises(SpaceMismatch):
            intersect(uniform(unit_space(2)), uniform(unit_space(3)))

    @given(spaces_with_measures(k=3))
    def test_unit_mode_commutative_associative(self, sm):
        _, (a, b, c) = sm
        np.testing.assert_array_equal(intersect(a, b, UNIT).density, intersect(b, a, UNIT).density)
        left = intersect(intersect(a, b, UNIT), c, UNIT).density
        right = intersect(a, intersect(b, c, UNIT), UNIT).density
        np.testing.assert_allclose(left, right, rtol=1e-12, atol=0)

    @given(spaces_with_measures(k=2))
    def test_absolutely_continuous(self, sm):
        _, (a, b) = sm
        r = intersect(a, b, UNIT)
        assert support(r).issubset(support(b))

    @given(spaces_with_measures(k=2, zeros=False))
    def test_renormalize_matches_rational_oracle(self, sm):
        s, (a, b) = sm
        fa = [Fraction(x) for x in a.density]
        fb = [Fraction(x) for x in b.density]
        fv = [Fraction(x) for x in s.volumes]
        n = sum(x * y * v for x, y, v in zip(fa, fb, fv))
        expect = [float(x * y / n) for x, y in zip(fa, fb)]
        np.testing.assert_allclose(intersect(a, b).density, expect, rtol=1e-13)


class TestSetConsistency:
    @given(st.integers(1, 10), st.data())
    def test_intersection_of_measure_sets(self, n, data):
        vols = data.draw(st.lists(st.floats(0.1, 4.0), min_size=n, max_size=n))
        s = make_space([f"c{i}" for i in range(n)], vols)
        a = CellSet(s, data.draw(st.sets(st.integers(0, n - 1), min_size=1)))
        b = CellSet(s, data.draw(st.sets(st.integers(0, n - 1), min_size=1)))
        if not (a & b):
            return
        for mode in (UNIT, RENORM):
            k = measure_set_overlap_constant(s, a, b, mode)
            lhs = intersect(measure_set(s, a, mode), measure_set(s, b, mode), UNIT).density
            rhs = k * measure_set(s, a & b, mode).density
            np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=0)
        np.testing.assert_allclose(
            intersect(measure_set(s, a), measure_set(s, b)).density,
            measure_set(s, a & b).density,
            rtol=1e-12,
            atol=0,
        )


class TestCondition:
    def test_uniform_half(self):
        s = unit_space(4)
        np.testing.assert_array_equal(condition(uniform(s), CellSet(s, [0, 1])).density, [0.5, 0.5, 0, 0])

    def test_whole_space(self):
        s = make_space(["a", "b"], [1.0, 3.0])
        m = GridMeasure(s, [0.4, 0.2], "probability")
        np.testing.assert_allclose(condition(m, s.all()).density, m.density, rtol=1e-15)

    def test_zero_probability(self):
        s = unit_space(3)
        with pytest.raises(ZeroProbabilityConditioning):
            condition(GridMeasure(s, [0.5, 0.5, 0.0]), CellSet(s, [2]))

    def test_requires_probability(self):
        s = unit_space(2)
        with pytest.raises(NotProbability):
            condition(GridMeasure(s, [1.0, 1.0]), s.all())

    @given(spaces_with_measures(k=1), st.data())
    def test_kolmogorov_quotient(self, sm, data):
        s, (m,) = sm
        if total_mass(m) == 0:
            return
        m = GridMeasure(s, m.density / total_mass(m), "probability")
        n = len(s)
        a = CellSet(s, data.draw(st.sets(st.integers(0, n - 1), min_size=1)))
        if measure_of(m, a) == 0:
            return
        c = condition(m, a)
        for _ in range(5):
            f = CellSet(s, data.draw(st.sets(st.integers(0, n - 1))))
            assert measure_of(c, f) == pytest.approx(measure_of(m, f & a) / measure_of(m, a), abs=1e-12)
