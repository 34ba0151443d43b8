import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hsp.errors import InvalidArgumentError
from hsp.metrics import (
    adjusted_rand_index, coclustering_matrix, symmetrized_f1, variation_of_information,
    vi_point_estimate,
)
from hsp.partition import Partition, canonicalize

from oracles import ari_pairs, f1_sets, vi_entropy


@st.composite
def partition_pair(draw, max_n=10):
    n = draw(st.integers(1, max_n))
    a = draw(st.lists(st.integers(1, 4), min_size=n, max_size=n))
    b = draw(st.lists(st.integers(1, 4), min_size=n, max_size=n))
    return a, b


def test_ari_examples():
    assert adjusted_rand_index([1, 1, 2, 2], [1, 1, 2, 2]) == 1.0
    assert adjusted_rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(-0.5)
    assert adjusted_rand_index([1, 1, 1], [1, 2, 3]) == 0.0
    assert adjusted_rand_index([1, 1, 1], [1, 1, 1]) == 1.0


def test_f1_examples():
    assert symmetrized_f1([1, 2, 2], [1, 2, 2]) == 1.0
    assert symmetrized_f1([1, 1, 1, 1], [1, 1, 2, 2]) == pytest.approx(
        f1_sets([1, 1, 1, 1], [1, 1, 2, 2]))
    # one block of 4 against two halves: 2/3 one way, 2/3 the other
    assert symmetrized_f1([1, 1, 1, 1], [1, 1, 2, 2]) == pytest.approx(2 / 3)
    assert symmetrized_f1([1, 2], [1, 1]) == pytest.approx(f1_sets([1, 2], [1, 1]))


def test_vi_examples():
    assert variation_of_information([1, 2, 1], [3, 1, 3]) == 0.0
    assert variation_of_information([1, 1, 2, 2], [1, 2, 3, 4]) == pytest.approx(math.log(2))
    assert variation_of_information([1, 1, 1], [1, 2, 3]) == pytest.approx(math.log(3))


def test_size_mismatch_rejected():
    for f in (adjusted_rand_index, symmetrized_f1, variation_of_information):
        with pytest.raises(InvalidArgumentError):
            f([1, 1], [1, 1, 1])


@given(partition_pair())
def test_metrics_match_oracles(pair):
    a, b = pair
    assert adjusted_rand_index(a, b) == pytest.approx(ari_pairs(a, b), abs=1e-10)
    assert symmetrized_f1(a, b) == pytest.approx(f1_sets(a, b), abs=1e-10)
    assert variation_of_information(a, b) == pytest.approx(max(vi_entropy(a, b), 0), abs=1e-10)


@given(partition_pair())
def test_symmetry_and_identity(pair):
    a, b = pair
    same = canonicalize(a) == canonicalize(b)
    assert adjusted_rand_index(a, b) == pytest.approx(adjusted_rand_index(b, a), abs=1e-12)
    assert symmetrized_f1(a, b) == pytest.approx(symmetrized_f1(b, a), abs=1e-12)
    assert (abs(symmetrized_f1(a, b) - 1) < 1e-12) == same
    assert (variation_of_information(a, b) < 1e-12) == same
    if len(a) > 1 and not same:
        assert adjusted_rand_index(a, b) < 1.0


@given(partition_pair(), st.permutations(range(1, 5)))
def test_label_renaming_invariance(pair, rename):
    a, b = pair
    a2 = [rename[v - 1] for v in a]
    assert adjusted_rand_index(a2, b) == pytest.approx(adjusted_rand_index(a, b), abs=1e-12)
    assert variation_of_information(a2, b) == pytest.approx(
        variation_of_information(a, b), abs=1e-12)


def test_coclustering_examples():
    m = coclustering_matrix([Partition((1, 2, 1))])
    np.testing.assert_array_equal(m.probs, [[1, 0, 1], [0, 1, 0], [1, 0, 1]])
    m = coclustering_matrix([Partition((1, 1)), Partition((1, 2))])
    assert m.probs[0, 1] == 0.5
    assert m.item_names == ["1", "2"]
    with pytest.raises(InvalidArgumentError):
        coclustering_matrix([])


def test_coclustering_matches_pair_count(rng):
    draws = rng.integers(1, 5, size=(8000, 12))
    m = coclustering_matrix(draws)
    expected = np.zeros((12, 12))
    for u in range(12):
        for v in range(12):
            expected[u, v] = np.mean(draws[:, u] == draws[:, v])
    np.testing.assert_array_equal(m.probs, expected)
    np.testing.assert_allclose(m.probs, m.probs.T, atol=1e-12)


def test_coclustering_invariant_to_renaming(rng):
    draws = rng.integers(1, 4, size=(50, 6))
    renamed = np.array([np.array([3, 1, 7])[row - 1] for row in draws])
    np.testing.assert_array_equal(coclustering_matrix(draws).probs,
                                  coclustering_matrix(renamed).probs)


def test_vi_point_estimate_examples():
    same = [Partition((1, 1, 2))] * 5
    assert vi_point_estimate(same) == Partition((1, 1, 2))
    draws = [Partition((1, 1, 2))] * 9 + [Partition((1, 2, 3))]
    assert vi_point_estimate(draws) == Partition((1, 1, 2))
    with pytest.raises(InvalidArgumentError):
        vi_point_estimate([])


def test_vi_point_estimate_brute_force(rng):
    for _ in range(20):
        draws = rng.integers(1, 4, size=(30, 5))
        got = vi_point_estimate(draws)
        uniq = list(dict.fromkeys(canonicalize(r).labels for r in draws))
        scores = [np.mean([vi_entropy(u, r) for r in draws]) for u in uniq]
        best = min(range(len(uniq)), key=lambda k: (round(scores[k], 10), k))
        assert got.labels == uniq[best]


def test_vi_point_estimate_ties_go_to_first():
    draws = [Partition((1, 2)), Partition((1, 1))]
    assert vi_point_estimate(draws) == Partition((1, 2))
    assert vi_point_estimate(draws[::-1]) == Partition((1, 1))


def test_vi_point_estimate_accepts_non_canonical_rows():
    draws = np.array([[2, 2, 1], [5, 5, 3], [1, 2, 3]])
    assert vi_point_estimate(draws) == Partition((1, 1, 2))


def _perturbed_draws(rng, T, n):
    base = rng.integers(0, 3, size=n)
    draws = np.repeat(base[None], T, axis=0)
    flip = rng.random((T, n)) < 0.15
    draws[flip] = rng.integers(0, 5, size=flip.sum())
    return draws


def test_vi_lower_bound_holds_and_pruning_is_exact(rng):
    from hsp import metrics as M
    for _ in range(10):
        draws = _perturbed_draws(rng, 200, 12)
        uniq, counts = np.unique(np.array([M.canonical_array(r) for r in draws]), axis=0,
                                 return_counts=True)
        uniq = uniq.astype(np.int64)
        w = counts.astype(np.float64)
        step = M._clogc_steps(12)
        s = M._size_terms(uniq, uniq.max(axis=1) + 1, step)
        bounds = M._vi_lower_bounds(uniq, w, s)
        table = np.zeros((12, 12), np.int64)
        full = np.array([M._vi_to_all(u, uniq, w, s, step, table, np.inf)
                         for u in range(len(uniq))])
        assert np.all(bounds <= full + 1e-12)
        direct = [np.average([vi_entropy(uniq[u], uniq[v]) for v in range(len(uniq))],
                             weights=w) for u in range(len(uniq))]
        np.testing.assert_allclose(full, direct, atol=1e-10)
        order = list(dict.fromkeys(canonicalize(r).labels for r in draws))
        scores = {lab: full[k] for k, lab in
                  enumerate(tuple(int(v) + 1 for v in row) for row in uniq)}
        best = min(range(len(order)), key=lambda k: (round(scores[order[k]], 10), k))
        assert vi_point_estimate(draws).labels == order[best]
