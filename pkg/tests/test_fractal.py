import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from selfsing.fractal import (
    CantorSpec,
    CapExceeded,
    FlatCloudError,
    beta_map,
    box_counting_dimension,
    cell_digits,
    chain_point,
    default_cells,
    generation,
    ifs_step,
    limit_set_sample,
)
from selfsing.params import hausdorff_dimension

FIG = CantorSpec.default(5, 8)


def test_default_cells_are_corners():
    assert set(FIG.cells) == set(itertools.product((0, 4), repeat=3))
    assert FIG.separated()


def test_beta_map_examples():
    spec = CantorSpec(5, ((0, 0, 0), (1, 0, 0)))
    assert np.allclose(beta_map(spec, 1, [0, 0, 0]), 0)
    assert np.allclose(beta_map(spec, 2, [0.2, 0, 0]), 0)
    assert np.allclose(beta_map(spec, 2, [0.4, 0.2, 0]), [1, 1, 0])


def test_generation_small_depths():
    assert np.array_equal(generation(FIG, 0).points, np.zeros((1, 3)))
    g1 = generation(FIG, 1).points
    assert {tuple(p) for p in g1} == {tuple(c) for c in FIG.generator_points}


def test_generation_depth3_and_depth5():
    pts = generation(FIG, 3).points
    assert len(pts) == 512
    assert np.all((pts >= 0) & (pts < 1))
    assert len(limit_set_sample(FIG, 5)) == 32768


def test_generation_is_brute_force_chain_enumeration():
    spec = CantorSpec(4, ((0, 0, 0), (2, 1, 3), (3, 3, 0)))
    pts = generation(spec, 3).points
    brute = [chain_point(spec, ch) for ch in itertools.product((1, 2, 3), repeat=3)]
    a = np.unique(np.round(pts, 12), axis=0)
    b = np.unique(np.round(np.array(brute), 12), axis=0)
    assert np.array_equal(a, b)


def test_cap_and_bad_input():
    with pytest.raises(CapExceeded, match="raise cap"):
        generation(FIG, 7, cap=10 ** 6)
    with pytest.raises(ValueError):
        generation(FIG, -1)
    with pytest.raises(ValueError):
        CantorSpec(3, ((0, 0, 0), (0, 0, 0)))
    with pytest.raises(ValueError):
        CantorSpec(3, ((0, 0, 3),))


cells_strategy = st.integers(2, 5).flatmap(
    lambda k: st.tuples(
        st.just(k),
        st.sets(st.tuples(*[st.integers(0, k - 1)] * 3), min_size=1, max_size=6),
    )
)


@given(cells_strategy, st.integers(0, 3))
def test_generation_size_and_ifs_invariance(kc, N):
    k, cells = kc
    spec = CantorSpec(k, tuple(sorted(cells)))
    g = generation(spec, N).points
    assert len(g) == spec.m ** N
    nxt = np.unique(np.round(ifs_step(spec, g), 12), axis=0)
    assert np.array_equal(nxt, np.unique(np.round(generation(spec, N + 1).points, 12), axis=0))


@given(cells_strategy, st.integers(1, 3))
def test_points_stay_in_chosen_cells(kc, N):
    k, cells = kc
    spec = CantorSpec(k, tuple(sorted(cells)))
    pts = generation(spec, N).points
    chosen = {tuple(c) for c in spec.cells}
    for level in range(1, N + 1):
        digits = cell_digits(pts, k, level)
        assert {tuple(d) for d in digits} <= chosen


def test_box_counting_examples():
    assert box_counting_dimension(np.zeros((1, 3)), [0.5, 0.25, 0.125]) == 0.0
    n = 16
    grid = np.stack(np.meshgrid(*[np.arange(n) / n] * 3, indexing="ij"), -1).reshape(-1, 3)
    est = box_counting_dimension(grid, [1 / 2, 1 / 4, 1 / 8, 1 / 16])
    assert est == pytest.approx(3.0, abs=1e-9)
    cloud = generation(FIG, 5)
    est = box_counting_dimension(cloud, [5.0 ** -j for j in range(1, 5)])
    assert est == pytest.approx(hausdorff_dimension(5, 8), rel=0.05)


def test_box_counting_rejects_bad_scales():
    with pytest.raises(ValueError):
        box_counting_dimension(np.zeros((1, 3)), [0.5, 0.25])
    with pytest.raises(FlatCloudError):
        box_counting_dimension(np.array([[0.0, 0, 0], [0.9, 0, 0]]), [0.5, 0.4, 0.3])


def test_default_cells_fill_beyond_even_cells():
    cells = default_cells(3, 9)
    assert len(set(cells)) == 9
    assert not CantorSpec(3, cells).separated()
