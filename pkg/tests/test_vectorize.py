import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from topofeat.complex import build_alpha
from topofeat.persistence import PersistenceDiagram, PersistencePair, diagram
from topofeat.pointcloud import sample_annulus
from topofeat.vectorize import (LandscapeSet, Tent, finite_intervals, landscape_distance, landscape_norm,
                                landscapes, mean_landscape, silhouette, tent_eval, truncation_value)


def make_diagram(triples, max_value=0.0):
    pairs = tuple(PersistencePair(d, float(b), float(e), -1) for d, b, e in triples)
    return PersistenceDiagram(pairs, max_value=max_value)


def random_diagram(seed, k_range=(0, 12)):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(*k_range))
    b = rng.uniform(0, 2, k)
    d = b + rng.uniform(0, 2, k)
    return make_diagram([(1, bi, di) for bi, di in zip(b, d)])


def kth_tent_oracle(bars, t, k):
    vals = sorted((max(0.0, min(t - b, d - t)) for b, d in bars), reverse=True)
    return vals[k - 1] if k <= len(vals) else 0.0


# --- tents -------------------------------------------------------------------------------

@pytest.mark.parametrize("tent,t,expected", [(Tent(0, 2), 1, 1.0), (Tent(0, 2), 3, 0.0), (Tent(1, 3), 1.5, 0.5)])
def test_tent_values(tent, t, expected):
    assert tent(t) == expected
    assert tent_eval(tent, t) == expected


def test_tent_rejects_reversed_bar():
    with pytest.raises(ValueError):
        Tent(2, 1)


# --- truncation ----------------------------------------------------------------------------

def test_infinite_bars_truncate_to_largest_finite_death():
    dgm = make_diagram([(0, 0, 2), (0, 0, math.inf), (1, 0.5, 1.0)], max_value=9.0)
    assert truncation_value(dgm) == 2.0
    assert finite_intervals(dgm, 0).tolist() == [[0, 2], [0, 2]]


def test_truncation_falls_back_to_filtration_max():
    dgm = make_diagram([(0, 0, math.inf)], max_value=4.0)
    assert finite_intervals(dgm, 0).tolist() == [[0, 4]]


# --- landscapes ----------------------------------------------------------------------------

def test_single_bar_landscapes():
    L = landscapes(make_diagram([(1, 0, 2)]), 1, k_max=3, resolution=5)
    assert L.values[0].tolist() == [0, 0.5, 1, 0.5, 0]
    assert not L.values[1:].any()
    assert L.grid.tolist() == [0, 0.25, 0.5, 0.75, 1]
    assert (L.t_min, L.t_max) == (0, 2)


def test_two_bar_overlap():
    L = landscapes(make_diagram([(1, 0, 2), (1, 1, 3)]), 1, k_max=2, resolution=7)
    assert L.t_grid[3] == 1.5
    assert L.values[1, 3] == 0.5


def test_empty_dimension_gives_zero_unit_grid():
    L = landscapes(make_diagram([(0, 0, 1)]), 1, k_max=4, resolution=10)
    assert L.values.shape == (4, 10) and not L.values.any()
    assert (L.t_min, L.t_max) == (0.0, 1.0)


def test_resolution_must_be_at_least_two():
    with pytest.raises(ValueError):
        landscapes(make_diagram([(1, 0, 1)]), 1, resolution=1)


def test_fixed_range():
    L = landscapes(make_diagram([(1, 0, 2)]), 1, k_max=1, resolution=5, t_range=(-1, 3))
    assert L.t_grid.tolist() == [-1, 0, 1, 2, 3]
    assert L.values[0].tolist() == [0, 0, 1, 0, 0]


@given(st.integers(0, 100_000), st.integers(1, 6))
def test_landscapes_match_kth_largest_tent(seed, k_max):
    dgm = random_diagram(seed)
    L = landscapes(dgm, 1, k_max=k_max, resolution=37)
    bars = dgm.intervals(1).tolist()
    for k in range(1, k_max + 1):
        for n, t in enumerate(L.t_grid):
            assert L.values[k - 1, n] == kth_tent_oracle(bars, t, k)


@given(st.integers(0, 100_000))
def test_landscape_order_sign_and_lipschitz(seed):
    L = landscapes(random_diagram(seed), 1, k_max=6, resolution=50)
    assert np.all(L.values >= 0)
    assert np.all(L.values[:-1] >= L.values[1:])
    step = L.t_grid[1] - L.t_grid[0]
    assert np.all(np.abs(np.diff(L.values, axis=1)) <= step * (1 + 1e-9))


def test_annulus_first_landscape_dominates():
    dgm = diagram(build_alpha(sample_annulus(200, 0.5, 1.0, 42)))
    L = landscapes(dgm, 1, k_max=3)
    assert L.values[0].max() > 5 * L.values[1].max()


# --- silhouettes -------------------------------------------------------------------------

def test_single_bar_silhouette_is_first_landscape():
    dgm = make_diagram([(1, 0.5, 3.0)])
    assert np.array_equal(silhouette(dgm, 1, resolution=41).values, landscapes(dgm, 1, 1, 41).values[0])


def test_two_bar_silhouette_value():
    S = silhouette(make_diagram([(1, 0, 2), (1, 1, 3)]), 1, resolution=7)
    assert S.t_grid[2] == 1.0
    assert S.values[2] == 0.5


def test_equal_bars_give_common_tent():
    S = silhouette(make_diagram([(1, 1, 2)] * 4), 1, resolution=9)
    assert S.values == pytest.approx(tent_eval(Tent(1, 2), S.t_grid))


def test_power_weights():
    S = silhouette(make_diagram([(1, 0, 2), (1, 1, 3), (1, 0, 4)]), 1, weight=2, resolution=9)
    assert S.weight_kind == "power(2)"
    w = np.array([4.0, 4.0, 16.0])
    tents = np.array([tent_eval(Tent(b, d), S.t_grid) for b, d in [(0, 2), (1, 3), (0, 4)]])
    assert S.values == pytest.approx(w @ tents / w.sum())
    assert silhouette(make_diagram([(1, 0, 2)]), 1, weight="power(0.5)").weight_kind == "power(0.5)"


def test_unknown_weight_rejected():
    with pytest.raises(ValueError):
        silhouette(make_diagram([(1, 0, 2)]), 1, weight="log")


def test_empty_silhouette_is_zero():
    S = silhouette(make_diagram([]), 0)
    assert S.resolution == 200 and not S.values.any()


def test_normalized_silhouette_peaks_at_one():
    S = silhouette(make_diagram([(1, 0, 2), (1, 0, 3)]), 1, normalize=True)
    assert S.values.max() == 1.0


@given(st.integers(0, 100_000))
def test_constant_silhouette_is_mean_tent_and_below_first_landscape(seed):
    dgm = random_diagram(seed, (1, 12))
    S = silhouette(dgm, 1, resolution=31)
    bars = dgm.intervals(1)
    tents = np.array([tent_eval(Tent(b, d), S.t_grid) for b, d in bars])
    assert S.values == pytest.approx(tents.mean(axis=0), abs=1e-12)
    assert np.all(S.values <= landscapes(dgm, 1, 1, 31).values[0] + 1e-12)


# --- norms and means -------------------------------------------------------------------

def test_norm_of_zero_landscape():
    assert landscape_norm(LandscapeSet(np.zeros((3, 10)), 0, 1)) == 0.0


def test_norm_of_single_tent_is_its_area():
    L = landscapes(make_diagram([(1, 0, 2)]), 1, k_max=2, resolution=101)
    assert landscape_norm(L, 1) == pytest.approx(1.0, abs=1e-12)
    assert landscape_norm(L, math.inf) == 1.0


def test_norm_sums_powers_over_levels():
    L = landscapes(make_diagram([(1, 0, 2), (1, 0, 2)]), 1, k_max=2, resolution=101)
    # two identical tents: each level has squared-L2 mass 2/3
    assert landscape_norm(L, 2) == pytest.approx(math.sqrt(4 / 3), rel=1e-3)


@given(st.integers(0, 100_000), st.floats(0.1, 10), st.sampled_from([1, 2, 3.5, math.inf]))
def test_norm_homogeneity(seed, c, p):
    L = landscapes(random_diagram(seed), 1, 3, 40)
    scaled = LandscapeSet(c * L.values, L.t_min, L.t_max)
    assert landscape_norm(scaled, p) == pytest.approx(c * landscape_norm(L, p), rel=1e-9, abs=1e-12)


def test_norm_rejects_small_p():
    with pytest.raises(ValueError):
        landscape_norm(LandscapeSet(np.zeros((1, 2)), 0, 1), 0.5)


def test_distance_to_self_is_zero():
    L = landscapes(random_diagram(3, (2, 5)), 1, 3, 20)
    assert landscape_distance(L, L) == 0.0


def test_mean_landscape():
    L = landscapes(random_diagram(5, (2, 8)), 1, 3, 25)
    zero = LandscapeSet(np.zeros_like(L.values), L.t_min, L.t_max)
    # (x + x + x) / 3 may differ from x in the last bit
    assert np.allclose(mean_landscape([L, L, L]).values, L.values, rtol=1e-15, atol=0)
    assert np.array_equal(mean_landscape([L, zero]).values, L.values / 2)


def test_mean_of_three_random_landscapes():
    Ls = [landscapes(random_diagram(s, (1, 8)), 1, 4, 30, t_range=(0, 4)) for s in range(3)]
    M = mean_landscape(Ls)
    for k in range(4):
        for n in range(30):
            assert M.values[k, n] == pytest.approx(sum(L.values[k, n] for L in Ls) / 3, abs=1e-15)


def test_mean_rejects_mismatched_grids():
    a = LandscapeSet(np.zeros((2, 5)), 0, 1)
    with pytest.raises(ValueError):
        mean_landscape([a, LandscapeSet(np.zeros((2, 5)), 0, 2)])
    with pytest.raises(ValueError):
        mean_landscape([a, LandscapeSet(np.zeros((3, 5)), 0, 1)])
    with pytest.raises(ValueError):
        mean_landscape([])
