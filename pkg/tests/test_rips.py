import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import naive_rips_pairs, random_metric
from qpsw.embedding import distance_matrix, hausdorff_distance
from qpsw.persistence.bottleneck import bottleneck_distance
from qpsw.persistence.diagram import HALF_OPEN
from qpsw.persistence.rips import FiltrationInput, enclosing_radius, rips_persistence


def pairs(dg):
    return sorted((float(b), float(d)) for b, d in dg.pairs)


def test_equilateral_triangle():
    dist = np.ones((3, 3)) - np.eye(3)
    h0, h1 = rips_persistence(dist, 1)
    assert pairs(h0) == [(0.0, 1.0), (0.0, 1.0), (0.0, math.inf)]
    assert len(h1) == 0
    assert h0.convention == HALF_OPEN


def test_hexagon_matches_naive_reduction():
    angles = 2 * math.pi * np.arange(6) / 6
    dist = distance_matrix(np.column_stack([np.cos(angles), np.sin(angles)]))
    got = rips_persistence(dist, 2)
    want = naive_rips_pairs(dist, 2)
    for j in range(3):
        assert np.allclose(pairs(got[j]), want[j]) or pairs(got[j]) == want[j]
    (bar,) = pairs(got[1])
    assert math.isclose(bar[0], 1.0, rel_tol=1e-12) and math.isclose(bar[1], math.sqrt(3), rel_tol=1e-12)


def test_circle_of_sixty():
    angles = 2 * math.pi * np.arange(60) / 60
    h1 = rips_persistence(distance_matrix(np.column_stack([np.cos(angles), np.sin(angles)])), 1)[1]
    top = h1.pairs[np.argmax(h1.persistence())]
    assert abs(top[1] - math.sqrt(3)) <= 0.05


def test_components_and_threshold():
    pts = np.array([[0.0], [1.0], [10.0], [11.0]])
    dist = distance_matrix(pts)
    h0 = rips_persistence(dist, 0, threshold=5.0)[0]
    assert sum(math.isinf(d) for _, d in pairs(h0)) == 2
    h0_full = rips_persistence(dist, 0)[0]
    assert sum(math.isinf(d) for _, d in pairs(h0_full)) == 1


def test_filtration_input_wrapper():
    dist = random_metric(np.random.default_rng(0), 6)
    direct = rips_persistence(dist, 2)
    wrapped = rips_persistence(FiltrationInput(dist, 2))
    assert all(pairs(a) == pairs(b) for a, b in zip(direct, wrapped))


def test_enclosing_radius():
    dist = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], dtype=float)
    assert enclosing_radius(dist) == 2


@pytest.mark.parametrize(
    "bad",
    [
        np.array([[0.0, 1.0], [2.0, 0.0]]),
        np.array([[0.0, -1.0], [-1.0, 0.0]]),
        np.array([[1.0, 1.0], [1.0, 0.0]]),
        np.zeros((2, 3)),
    ],
)
def test_rejects_non_metrics(bad):
    with pytest.raises(ValueError, match="not a distance matrix"):
        rips_persistence(bad, 1)


def test_empty_and_single_point():
    assert all(len(d) == 0 for d in rips_persistence(np.zeros((0, 0)), 2))
    h0 = rips_persistence(np.zeros((1, 1)), 1)[0]
    assert pairs(h0) == [(0.0, math.inf)]


@given(st.integers(0, 10_000), st.integers(2, 10))
def test_matches_naive_reduction_on_random_metrics(seed, n):
    dist = random_metric(np.random.default_rng(seed), n)
    got = rips_persistence(dist, 2)
    want = naive_rips_pairs(dist, 2)
    assert [pairs(got[j]) for j in range(3)] == [want[j] for j in range(3)]


@given(st.integers(0, 10_000), st.integers(3, 9))
def test_matches_naive_reduction_on_point_clouds(seed, n):
    dist = distance_matrix(np.random.default_rng(seed).normal(size=(n, 2)))
    got = rips_persistence(dist, 2)
    want = naive_rips_pairs(dist, 2)
    assert [pairs(got[j]) for j in range(3)] == [want[j] for j in range(3)]


@given(st.integers(0, 10_000), st.floats(0.001, 0.3))
def test_stability_under_hausdorff_perturbation(seed, scale):
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0, 2 * math.pi, 40)
    p = np.column_stack([np.cos(angles), np.sin(angles)])
    q = p + rng.uniform(-scale, scale, size=p.shape)
    # drop a few points from q as well; the Hausdorff distance accounts for both effects
    q = q[rng.permutation(len(q))[: len(q) - int(rng.integers(0, 5))]]
    h = hausdorff_distance(p, q)
    dp, dq = rips_persistence(distance_matrix(p), 2), rips_persistence(distance_matrix(q), 2)
    for j in (1, 2):
        assert bottleneck_distance(dp[j], dq[j]) <= 2 * h + 1e-12
