import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import random_metric, torus_bars_by_subsets
from qpsw.persistence.analytic import (
    circle_barcode,
    kunneth_combine,
    multiplicity_mu,
    torus_diagram,
    torus_multiplicities,
)
from qpsw.persistence.diagram import LEFT_OPEN
from qpsw.persistence.rips import rips_persistence

SQRT3 = math.sqrt(3)


def test_circle_barcode_values():
    dgms = circle_barcode(1.0, 3)
    assert dgms[0].as_multiset() == [(0.0, math.inf)]
    assert dgms[1].as_multiset() == [(0.0, pytest.approx(1.7320508, abs=1e-7))]
    assert len(dgms[2]) == 0
    (b, d) = dgms[3].as_multiset()[0]
    assert math.isclose(b, SQRT3) and math.isclose(d, 2 * math.sin(2 * math.pi / 5))
    assert all(g.convention == LEFT_OPEN for g in dgms)


def test_circle_barcode_scales_with_radius():
    small, big = circle_barcode(0.5, 5), circle_barcode(2.0, 5)
    for j in (1, 3, 5):
        assert np.allclose(big[j].pairs, 4 * small[j].pairs)


def test_circle_barcode_bars_nest():
    dgms = circle_barcode(1.0, 9)
    odd = [dgms[j].pairs[0] for j in range(1, 10, 2)]
    for a, b in zip(odd, odd[1:]):
        assert math.isclose(a[1], b[0]) or a[1] <= b[0]


def test_kunneth_two_circles():
    factors = [circle_barcode(1.0, 2), circle_barcode(0.9, 2)]
    h1 = kunneth_combine(factors, 1).as_multiset()
    assert h1 == pytest.approx([(0.0, 0.9 * SQRT3), (0.0, SQRT3)])
    h2 = kunneth_combine(factors, 2).as_multiset()
    assert h2 == pytest.approx([(0.0, 0.9 * SQRT3)])


def test_kunneth_equal_circles():
    factors = [circle_barcode(1.0, 2), circle_barcode(1.0, 2)]
    assert Counter(kunneth_combine(factors, 1).as_multiset()) == Counter({(0.0, SQRT3): 2})
    assert Counter(kunneth_combine(factors, 2).as_multiset()) == Counter({(0.0, SQRT3): 1})


def test_kunneth_rejects_mixed_conventions():
    with pytest.raises(ValueError):
        kunneth_combine([circle_barcode(1.0, 1), rips_persistence(np.zeros((1, 1)), 1)], 1)


@given(st.integers(0, 5000))
def test_kunneth_matches_rips_of_product(seed):
    rng = np.random.default_rng(seed)
    n1, n2 = int(rng.integers(2, 6)), int(rng.integers(2, 6))
    a, b = random_metric(rng, n1), random_metric(rng, n2)
    product = np.maximum(a[:, None, :, None], b[None, :, None, :]).reshape(n1 * n2, n1 * n2)
    da, db, dp = rips_persistence(a, 2), rips_persistence(b, 2), rips_persistence(product, 2)
    for j in range(3):
        assert kunneth_combine([da, db], j).as_multiset() == dp[j].as_multiset()


# --- torus diagrams ----------------------------------------------------------


def test_torus_equal_magnitudes():
    assert Counter(torus_diagram([1, 1, 1], 1).as_multiset()) == Counter({(0.0, SQRT3): 3})


def test_torus_distinct_magnitudes():
    got = Counter((b, round(d, 12)) for b, d in torus_diagram([1, 0.9, 0.8], 2).as_multiset())
    assert got == Counter({(0.0, round(0.9 * SQRT3, 12)): 1, (0.0, round(0.8 * SQRT3, 12)): 2})
    assert torus_diagram([1, 0.9], 2).as_multiset() == pytest.approx([(0.0, 0.9 * SQRT3)])


def test_torus_validation():
    with pytest.raises(ValueError):
        torus_diagram([0.9, 1.0], 1)
    with pytest.raises(ValueError):
        torus_diagram([1.0, 0.0], 1)
    with pytest.raises(ValueError):
        torus_diagram([1.0], 2)


magnitude_vectors = st.lists(st.integers(1, 6).map(lambda v: v / 4), min_size=1, max_size=5).map(
    lambda v: sorted(v, reverse=True)
)


@given(magnitude_vectors, st.data())
def test_torus_matches_subset_oracle(mags, data):
    j = data.draw(st.integers(1, len(mags)))
    got = sorted((b, round(d, 12)) for b, d in torus_diagram(mags, j).as_multiset())
    want = sorted((b, round(d, 12)) for b, d in torus_bars_by_subsets(mags, j))
    assert got == want


@given(magnitude_vectors, st.data())
def test_torus_multiplicities_sum_to_betti(mags, data):
    j = data.draw(st.integers(1, len(mags)))
    assert sum(torus_multiplicities(mags, j).values()) == math.comb(len(mags), j)
    assert len(torus_diagram(mags, j)) == math.comb(len(mags), j)


@given(magnitude_vectors, st.data())
def test_binomial_formula_matches_diagram(mags, data):
    j = data.draw(st.integers(1, len(mags)))
    counts = Counter(round(d, 12) for _, d in torus_diagram(mags, j).as_multiset())
    formula = {round(d, 12): m for d, m in torus_multiplicities(mags, j).items()}
    assert dict(counts) == formula


def test_multiplicity_examples():
    assert all(multiplicity_mu([3, 2, 1], 1, n) == 1 for n in (1, 2, 3))
    assert multiplicity_mu([3, 2, 1], 2, 3) == 2
    assert multiplicity_mu([1, 1], 2, 1) == 1
    assert multiplicity_mu([1, 1], 1, 2) == 2
