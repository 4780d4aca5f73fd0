import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skorokhod.paths import (
    BoundedVariationPath,
    GridMismatchError,
    GridPath,
    TimeGrid,
    left_limit,
    read_path_csv,
    resample,
    stieltjes_cumsum,
    stieltjes_sum,
    sup_distance,
    total_variation,
)
from skorokhod.io import write_path_csv

from helpers import path

finite = st.floats(-1e3, 1e3, allow_nan=False)


def brute_stieltjes(f, K):
    total = 0.0
    for k in range(1, len(f)):
        total += f[k] * (K[k] - K[k - 1])
    return total


class TestTimeGrid:
    def test_uniform(self):
        g = TimeGrid.uniform(2.0, 4)
        assert g.points[0] == 0.0 and g.points[-1] == 2.0
        assert g.steps == 4 and len(g) == 5

    @pytest.mark.parametrize("pts", [[0.0], [0.1, 1.0], [0.0, 1.0, 1.0], [0.0, 2.0, 1.0], [0.0, np.inf]])
    def test_rejects_bad_points(self, pts):
        with pytest.raises(ValueError):
            TimeGrid(np.array(pts))

    def test_equal_points_compare_equal(self):
        assert TimeGrid.uniform(1, 3) == TimeGrid.uniform(1, 3)
        assert TimeGrid.uniform(1, 3) != TimeGrid.uniform(1, 4)

    def test_immutable(self):
        g = TimeGrid.uniform(1, 3)
        with pytest.raises(ValueError):
            g.points[1] = 0.5


class TestGridPath:
    def test_rejects_nonfinite_and_wrong_length(self):
        g = TimeGrid.uniform(1, 2)
        with pytest.raises(ValueError):
            GridPath(g, [0.0, np.nan, 1.0])
        with pytest.raises(ValueError):
            GridPath(g, [0.0, 1.0])

    def test_arithmetic_needs_shared_grid(self):
        a = path([0, 1, 2])
        b = path([0, 1, 2, 3])
        with pytest.raises(GridMismatchError):
            a + b

    @given(st.lists(finite, min_size=2, max_size=40))
    def test_jumps_reconstruct_values(self, vals):
        p = path(vals)
        rebuilt = p.values[0] + np.cumsum(p.jumps())
        assert np.allclose(rebuilt, p.values, rtol=0, atol=1e-9)
        for k in range(1, len(p)):
            assert p.jumps()[k] == p.values[k] - left_limit(p, k)


class TestLeftLimit:
    def test_constant(self):
        assert left_limit(GridPath.constant(TimeGrid.uniform(1, 5), 5.0), 3) == 5.0

    def test_step(self):
        p = path([0, 1, 1, 2])
        assert left_limit(p, 1) == 0.0
        assert left_limit(p, 0) == 0.0

    @pytest.mark.parametrize("k", [-1, 4])
    def test_out_of_range(self, k):
        with pytest.raises(IndexError):
            left_limit(path([0, 1, 1, 2]), k)


class TestStieltjes:
    def test_total_mass(self):
        g = TimeGrid.uniform(1.0, 7)
        assert stieltjes_sum(GridPath.constant(g, 1.0), GridPath(g, g.points)) == pytest.approx(1.0)

    def test_zero_measure(self):
        g = TimeGrid.uniform(1.0, 3)
        assert stieltjes_sum(path([3, -1, 2, 7], g), GridPath.constant(g, 0.0)) == 0.0

    def test_hand_example(self):
        g = TimeGrid(np.array([0.0, 0.5, 1.0]))
        f, K = path([1, 2, 3], g), path([0, 1, 3], g)
        assert brute_stieltjes([1, 2, 3], [0, 1, 3]) == 8.0
        assert stieltjes_sum(f, K) == 8.0

    def test_rejects_decreasing_integrator(self):
        with pytest.raises(ValueError):
            stieltjes_sum(path([1, 1, 1]), path([0, 2, 1]))

    @given(st.lists(st.tuples(finite, st.floats(0, 10), finite), min_size=2, max_size=30), finite)
    def test_linear_and_bounded(self, rows, c):
        f = path([r[0] for r in rows])
        g_ = path([r[2] for r in rows], f.grid)
        K = path(np.concatenate(([0.0], np.cumsum([r[1] for r in rows[1:]]))), f.grid)
        s = stieltjes_sum(f + g_ * c, K)
        assert s == pytest.approx(stieltjes_sum(f, K) + c * stieltjes_sum(g_, K), rel=1e-9, abs=1e-6)
        assert stieltjes_sum(f, K) == pytest.approx(brute_stieltjes(f.values, K.values), rel=1e-12, abs=1e-9)
        absf = GridPath(f.grid, np.abs(f.values))
        assert stieltjes_sum(absf, K) <= np.max(absf.values) * (K[-1] - K[0]) * (1 + 1e-12) + 1e-9
        assert stieltjes_cumsum(f, K)[-1] == pytest.approx(stieltjes_sum(f, K), rel=1e-12, abs=1e-9)


class TestTotalVariation:
    def test_zero(self):
        assert total_variation(BoundedVariationPath.zero(TimeGrid.uniform(1, 4))) == 0.0

    def test_definition(self):
        g = TimeGrid.uniform(1, 2)
        K = BoundedVariationPath(path([0, 1, 2], g), path([0, 3, 3], g), check=False)
        assert total_variation(K) == 5.0

    def test_zigzag(self):
        # forward scan: +1 then -1
        K = BoundedVariationPath.from_path(path([0, 1, 0]))
        assert list(K.plus.values) == [0, 1, 1]
        assert list(K.minus.values) == [0, 0, 1]
        assert total_variation(K) == 2.0

    @given(st.lists(finite, min_size=1, max_size=40))
    def test_equals_sum_of_abs_increments(self, incs):
        K = path(np.concatenate(([0.0], np.cumsum(incs))))
        bv = BoundedVariationPath.from_path(K)
        expected = np.sum(np.abs(np.diff(K.values)))
        assert total_variation(bv) == pytest.approx(expected, rel=1e-12, abs=1e-12)
        assert (total_variation(bv) == 0) == bool(np.all(K.values == 0))
        assert np.allclose(bv.path.values, K.values, atol=1e-9)

    def test_invariants_enforced(self):
        g = TimeGrid.uniform(1, 2)
        with pytest.raises(ValueError):
            BoundedVariationPath(path([1, 1, 1], g), path([0, 0, 0], g))
        with pytest.raises(ValueError):
            BoundedVariationPath(path([0, 1, 0.5], g), path([0, 0, 0], g))
        with pytest.raises(ValueError, match="both increase"):
            BoundedVariationPath(path([0, 1, 1], g), path([0, 1, 1], g))


class TestSupDistance:
    def test_examples(self):
        p = path([0.5, -2, 3])
        assert sup_distance(p, p) == 0.0
        g = p.grid
        assert sup_distance(GridPath.constant(g, 0), GridPath.constant(g, -4.5)) == 4.5
        assert sup_distance(path([0, 1]), path([2, 0])) == 2.0

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            sup_distance(path([0, 1]), path([0, 1, 2]))


def test_resample_step_function():
    src = path([1, 2, 3], TimeGrid(np.array([0.0, 0.5, 1.0])))
    dst = TimeGrid(np.array([0.0, 0.25, 0.5, 0.75, 1.0]))
    assert list(resample(src, dst).values) == [1, 1, 2, 2, 3]


class TestCsv:
    def test_round_trip(self, tmp_path):
        p = path([0.1, -1 / 3, 2e-17, 1e300])
        write_path_csv(tmp_path / "p.csv", p)
        q = read_path_csv(tmp_path / "p.csv")
        assert np.array_equal(p.values, q.values)
        assert q.grid == p.grid

    @pytest.mark.parametrize("body", [
        "t,value\n0,1\n0.5,nan\n1,2\n",
        "t,value\n0,1\n0.5,inf\n",
        "t,value\n0,1\n0.7,1\n0.5,2\n",
        "time,v\n0,1\n1,2\n",
        "t,value\n0,1\n",
    ])
    def test_rejects(self, tmp_path, body):
        f = tmp_path / "bad.csv"
        f.write_text(body)
        with pytest.raises(ValueError):
            read_path_csv(f)

    def test_grid_must_match(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("t,value\n0,1\n1,2\n")
        with pytest.raises(GridMismatchError):
            read_path_csv(f, grid=TimeGrid.uniform(1, 2))
