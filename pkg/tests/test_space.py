import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from measurecalc import (
    CellSet,
    DuplicateLabel,
    EmptySpace,
    ForeignCellSet,
    NonincreasingEdges,
    NonpositiveEdge,
    NonpositiveVolume,
    Space,
    interval_space,
    log_interval_space,
    make_space,
    set_volume,
)


class TestMakeSpace:
    def test_two_unit_cells(self):
        s = make_space(["a", "b"], [1.0, 1.0])
        assert s.labels == ("a", "b")
        np.testing.assert_array_equal(s.volumes, [1.0, 1.0])

    def test_single_sphere_cell(self):
        s = make_space(["c1"], [4 * math.pi])
        assert len(s) == 1
        assert s.total_volume == 4 * math.pi

    def test_duplicate_label(self):
        with pytest.raises(DuplicateLabel):
            make_space(["a", "a"], [1, 1])

    def test_empty(self):
        with pytest.raises(EmptySpace):
            make_space([], [])

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
    def test_nonpositive_or_nonfinite_volume(self, bad):
        with pytest.raises(NonpositiveVolume):
            make_space(["a", "b"], [1.0, bad])

    def test_order_is_input_order(self):
        s = make_space(["z", "a", "m"], [1, 2, 3])
        assert [s.index_of(x) for x in "zam"] == [0, 1, 2]

    def test_immutable(self):
        s = make_space(["a"], [1.0])
        with pytest.raises(ValueError):
            s.volumes[0] = 2.0

    def test_equality(self):
        assert make_space(["a"], [1.0]) == make_space(["a"], [1.0])
        assert make_space(["a"], [1.0]) != make_space(["a"], [2.0])


class TestLogIntervalSpace:
    def test_e_ratios(self):
        s = log_interval_space([1, math.e, math.e**2])
        np.testing.assert_allclose(s.volumes, [1.0, 1.0], rtol=1e-15)

    def test_doublings(self):
        s = log_interval_space([1, 2, 4, 8])
        np.testing.assert_allclose(s.volumes, [math.log(2)] * 3, rtol=1e-15)

    def test_decreasing(self):
        with pytest.raises(NonincreasingEdges):
            log_interval_space([2, 1])

    def test_nonpositive_edge(self):
        with pytest.raises(NonpositiveEdge):
            log_interval_space([0, 1, 2])

    def test_edges_kept(self):
        s = log_interval_space([1, 2, 4])
        np.testing.assert_array_equal(s.edges, [1, 2, 4])

    def test_interval_space_is_lebesgue(self):
        s = interval_space([0, 0.5, 2])
        np.testing.assert_allclose(s.volumes, [0.5, 1.5])

    @given(st.lists(st.floats(0.01, 1e3), min_size=2, max_size=12, unique=True))
    def test_period_frequency_volumes_agree(self, edges):
        t = np.sort(np.asarray(edges))
        if np.any(np.diff(t) <= t[:-1] * 1e-9):
            return
        omega = np.sort(2 * math.pi / t)
        vt = np.sort(log_interval_space(t).volumes)
        vw = np.sort(log_interval_space(omega).volumes)
        np.testing.assert_allclose(vt, vw, rtol=1e-12)


class TestSetVolume:
    def test_two_of_four(self):
        s = make_space(list("abcd"), [1] * 4)
        assert set_volume(s, CellSet(s, [0, 1])) == 2.0

    def test_empty(self):
        s = make_space(["a", "b"], [0.5, 1.5])
        assert set_volume(s, s.empty()) == 0.0

    def test_single(self):
        s = make_space(["a", "b"], [0.5, 1.5])
        assert set_volume(s, CellSet(s, [1])) == 1.5

    def test_foreign(self):
        s = make_space(["a", "b"], [1, 1])
        t = make_space(["a", "b", "c"], [1, 1, 1])
        with pytest.raises(ForeignCellSet):
            set_volume(s, CellSet(t, [2]))

    @given(
        st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=20),
        st.data(),
    )
    def test_additive_and_monotone(self, vols, data):
        s = Space([f"c{i}" for i in range(len(vols))], vols)
        n = len(vols)
        a = CellSet(s, data.draw(st.sets(st.integers(0, n - 1))))
        b = CellSet(s, data.draw(st.sets(st.integers(0, n - 1)))) - a
        union = set_volume(s, a | b)
        assert union == pytest.approx(set_volume(s, a) + set_volume(s, b), rel=1e-15, abs=0)
        assert set_volume(s, a) <= union


class TestCellSet:
    def test_canonical_order(self):
        s = make_space(list("abcd"), [1] * 4)
        assert CellSet(s, [3, 1, 3]).members == (1, 3)

    def test_out_of_range(self):
        s = make_space(["a"], [1])
        with pytest.raises(ForeignCellSet):
            CellSet(s, [1])

    def test_algebra(self):
        s = make_space(list("abcd"), [1] * 4)
        a, b = s.cells("ab"), s.cells("bc")
        assert (a & b).labels == ("b",)
        assert (a | b).labels == ("a", "b", "c")
        assert (~a).labels == ("c", "d")
        assert (a - b).labels == ("a",)
        assert (a & b).issubset(a)
