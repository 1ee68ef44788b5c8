import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import gram_singular_values
from qpsw.bounds import (
    DISTINCT,
    LITERAL,
    approximation_bound,
    delta_omega,
    guaranteed_count,
    lower_bound,
    sigma_extremes,
    sigma_min_floor,
    singular_values,
    vandermonde,
    vandermonde_report,
)
from qpsw.embedding import EmbeddingParams, distance_matrix, maxmin_sample, sliding_window
from qpsw.errors import NodeCollisionError, RankDeficiencyError
from qpsw.model import SpectralModel, tail_sup_bound, truncate
from qpsw.persistence.bottleneck import bottleneck_distance
from qpsw.persistence.rips import rips_persistence

SQRT3 = math.sqrt(3)
TORUS_FREQS = [1.0, math.sqrt(2), SQRT3]


def test_single_column():
    omega = vandermonde([0.7], 1.3, 5)
    assert omega.shape == (6, 1)
    assert np.allclose(np.abs(omega), 1)
    assert np.allclose(sigma_extremes(omega), (math.sqrt(6), math.sqrt(6)))


@pytest.mark.parametrize("d", [1, 3, 6])
def test_roots_of_unity_give_scaled_unitary(d):
    freqs = 2 * math.pi * np.arange(d + 1) / (d + 1)
    omega = vandermonde(freqs, 1.0, d)
    assert np.allclose(omega.conj().T @ omega, (d + 1) * np.eye(d + 1), atol=1e-12)
    smin, smax = sigma_extremes(omega)
    assert math.isclose(smin, math.sqrt(d + 1), rel_tol=1e-12) and math.isclose(smax, math.sqrt(d + 1), rel_tol=1e-12)


def test_torus_matrix_nearly_orthogonal():
    omega = vandermonde(TORUS_FREQS, 49.325, 3)
    assert omega.shape == (4, 3)
    gram = omega.conj().T @ omega
    off = gram - np.diag(np.diag(gram))
    assert np.linalg.norm(off) < 0.2 * np.linalg.norm(np.diag(gram))


def test_node_collision_message():
    with pytest.raises(NodeCollisionError, match="tau violates structure theorem exclusion"):
        vandermonde([0.0, 1.0], 2 * math.pi, 3)


def test_rank_deficiency_reported():
    with pytest.raises(RankDeficiencyError):
        sigma_extremes(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(RankDeficiencyError):
        sigma_extremes(vandermonde(TORUS_FREQS, 1.0, 1))


def test_singular_values_of_random_matrix_match_gram_oracle():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
    got = singular_values(a)
    assert np.allclose(got, gram_singular_values(a), rtol=1e-8)
    assert np.allclose(got, np.sort(np.linalg.svd(a, compute_uv=False)), rtol=1e-12)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=6, unique=True), st.floats(0.05, 60), st.integers(0, 12))
def test_report_invariants(freqs, tau, d):
    assume(d + 1 >= len(freqs))
    try:
        report = vandermonde_report(freqs, tau, d)
    except (NodeCollisionError, RankDeficiencyError):
        assume(False)
    assert report.sigma_min <= report.sigma_max
    assert math.isclose(report.condition_number, report.sigma_max / report.sigma_min)
    assert all(abs(abs(z) - 1) <= 1e-12 for z in report.nodes)
    sv = singular_values(vandermonde(freqs, tau, d))
    assert abs(np.sum(sv**2) - (d + 1) * len(freqs)) <= 1e-9 * (d + 1) * len(freqs)
    assert 0 < report.delta_omega <= 0.5


def test_delta_omega_examples():
    assert math.isclose(delta_omega([0.0, 1.0], math.pi), 0.5)
    for theta in (0.3, 1.0, 2.5, math.pi):
        assert math.isclose(delta_omega([0.0, theta], 1.0), theta / (2 * math.pi), rel_tol=1e-12)
    with pytest.raises(NodeCollisionError):
        delta_omega([0.0, 1.0], 2 * math.pi)


def test_delta_omega_at_torus_delay():
    delta = delta_omega(TORUS_FREQS, 49.325)
    assert 0 < delta <= 0.5
    assert 3 > 1 / delta - 1.5
    smin, _ = sigma_extremes(vandermonde(TORUS_FREQS, 49.325, 3))
    assert 0 < sigma_min_floor(3, delta) <= smin
    with pytest.raises(ValueError, match="d too small for node separation"):
        sigma_min_floor(2, delta)


def test_sigma_min_floor_examples():
    assert math.isclose(sigma_min_floor(1, 0.5), math.sqrt(0.5))
    with pytest.raises(ValueError, match="d too small for node separation"):
        sigma_min_floor(2, 0.25)
    with pytest.raises(ValueError):
        sigma_min_floor(3, 0.0)


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=5, unique=True), st.floats(0.05, 40), st.integers(1, 40))
def test_floor_never_exceeds_sigma_min(freqs, tau, d):
    try:
        delta = delta_omega(freqs, tau)
        floor = sigma_min_floor(d, delta)
    except (NodeCollisionError, ValueError):
        assume(False)
    smin, _ = sigma_extremes(vandermonde(freqs, tau, d))
    assert floor <= smin * (1 + 1e-12)


# --- lower bounds ------------------------------------------------------------


def test_periodic_bound():
    for d in (1, 4, 9):
        report = lower_bound([1.0], 1, math.sqrt(d + 1), d)
        assert math.isclose(report.bound_value, SQRT3 * math.sqrt(d + 1))
        assert report.guaranteed_count_per_dim == {1: 1}


def test_two_sines_levels():
    mags = [1.0, 0.9]
    smin, _ = sigma_extremes(vandermonde([-SQRT3, -1.0, 1.0, SQRT3], 11.9577, 4))
    levels = [lower_bound(mags, n, smin, 4, hausdorff=0.54292).bound_value for n in (1, 2)]
    assert levels[0] > levels[1] > 0
    expected = [SQRT3 * m * smin - 4 * 0.54292 for m in mags]
    assert np.allclose(levels, expected)


def test_guaranteed_counts_three_torus():
    counts = lower_bound([3.0, 2.0, 1.0], 3, 1.0, 3).guaranteed_count_per_dim
    assert counts == {1: 3, 2: 3, 3: 1}


def test_counting_modes_differ_on_ties():
    mags = [1.0, 1.0, 1.0]
    assert guaranteed_count(mags, 1, 1, DISTINCT) == 3
    assert guaranteed_count(mags, 3, 1, LITERAL) == 9
    assert guaranteed_count(mags, 3, 1, DISTINCT) == 3
    with pytest.raises(ValueError):
        guaranteed_count(mags, 1, 1, "other")


def test_lower_bound_level_out_of_range():
    with pytest.raises(ValueError):
        lower_bound([1.0, 0.5], 3, 1.0, 2)
    with pytest.raises(ValueError):
        lower_bound([1.0, 0.5], 0, 1.0, 2)


@given(st.floats(0, 5), st.floats(0, 5), st.floats(0.01, 5), st.floats(0.01, 1), st.floats(0.01, 1))
def test_lower_bound_monotone(tail, haus, smin, dt, ds):
    base = lower_bound([1.0], 1, smin, 3, tail, haus).bound_value
    assert lower_bound([1.0], 1, smin, 3, tail + dt, haus).bound_value < base
    assert lower_bound([1.0], 1, smin, 3, tail, haus + dt).bound_value < base
    assert lower_bound([1.0], 1, smin + ds, 3, tail, haus).bound_value > base


def test_approximation_bound():
    assert approximation_bound(5, 0.0) == 0
    assert math.isclose(approximation_bound(3, 0.1), 0.4)
    assert math.isclose(approximation_bound(3, 0.1, "hausdorff"), 0.2)
    with pytest.raises(ValueError):
        approximation_bound(3, -1.0)


def test_truncation_moves_diagrams_less_than_bound():
    omega = (1.0, math.sqrt(2))
    model = SpectralModel.from_lattice(
        omega, {(1, 0): 1.0, (0, 1): 0.8, (3, 0): 0.08, (0, -3): 0.05j, (2, 3): 0.04}
    )
    K, d, tau = 1, 3, 2.1
    truncated = truncate(model, K)
    tail = tail_sup_bound(model, K)
    times = np.linspace(0, 300, 1500)
    params = EmbeddingParams(d, tau)
    full, approx = sliding_window(model, params, times), sliding_window(truncated, params, times)
    idx = maxmin_sample(full, 150, seed=0)
    dg_full = rips_persistence(distance_matrix(full.points[idx]), 2)
    dg_approx = rips_persistence(distance_matrix(approx.points[idx]), 2)
    bound = approximation_bound(d, tail)
    for j in range(3):
        assert bottleneck_distance(dg_full[j], dg_approx[j]) <= bound
