import numpy as np
import pytest

from hsicsel import (
    AllIdenticalError,
    GramMatrix,
    KernelSpec,
    NonFiniteError,
    center,
    gram,
    median_bandwidth,
)


def test_median_bandwidth_enumerated_pairs():
    # pairwise distances of [0, 1, 3] are {1, 2, 3}; median 2
    assert median_bandwidth([0.0, 1.0, 3.0]) == 2.0


def test_median_bandwidth_single_pair():
    assert median_bandwidth([0.0, 2.5]) == 2.5


def test_median_bandwidth_all_identical():
    with pytest.raises(AllIdenticalError):
        median_bandwidth([0.0, 0.0, 0.0])


def test_median_bandwidth_even_count_averages_middle():
    # distances of [0, 1, 2, 4]: 1, 2, 4, 1, 3, 2 -> sorted 1,1,2,2,3,4 -> 2
    assert median_bandwidth([0.0, 1.0, 2.0, 4.0]) == 2.0


def test_median_bandwidth_vector_samples():
    x = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert median_bandwidth(x) == 5.0


def test_gaussian_gram_zero_distance_is_one():
    g = gram([1.0, 1.0, 2.0], KernelSpec(bandwidth=1.0))
    assert g.values[0, 1] == 1.0
    assert np.allclose(np.diag(g.values), 1.0)


def test_gaussian_gram_analytic_value():
    g = gram([0.0, np.sqrt(2.0)], KernelSpec(bandwidth=1.0))
    assert g.values[0, 1] == pytest.approx(np.exp(-1.0), abs=1e-12)


def test_gaussian_gram_entries_in_unit_interval():
    rng = np.random.default_rng(0)
    g = gram(rng.standard_normal(30), KernelSpec())
    assert np.all(g.values > 0.0) and np.all(g.values <= 1.0)


def test_gaussian_gram_rejects_non_finite():
    with pytest.raises(NonFiniteError):
        gram([0.0, np.nan], KernelSpec(bandwidth=1.0))


def test_delta_gram_counts_from_sample():
    g = gram(np.array(["a", "a", "b", "a"]), KernelSpec(kind="delta"))
    assert g.values[0, 0] == pytest.approx(1.0 / 3.0)
    assert g.values[0, 2] == 0.0
    assert g.values[2, 2] == 1.0


def test_center_annihilates_constant_kernel():
    g = GramMatrix(values=np.ones((4, 4)))
    assert np.allclose(center(g).values, 0.0, atol=1e-12)


def test_center_identity_two_by_two():
    g = GramMatrix(values=np.eye(2))
    expected = np.array([[0.5, -0.5], [-0.5, 0.5]])
    assert np.allclose(center(g).values, expected, atol=1e-12)


def test_center_idempotent():
    rng = np.random.default_rng(1)
    g = gram(rng.standard_normal(20), KernelSpec())
    once = center(g)
    twice = center(once)
    assert np.allclose(once.values, twice.values, atol=1e-12)


def test_center_row_and_column_sums_vanish():
    rng = np.random.default_rng(2)
    g = center(gram(rng.standard_normal(40), KernelSpec()))
    assert np.max(np.abs(g.values.sum(axis=0))) <= 1e-10
    assert np.max(np.abs(g.values.sum(axis=1))) <= 1e-10


def test_gaussian_gram_positive_semidefinite():
    rng = np.random.default_rng(3)
    for n in (10, 30, 50):
        g = gram(rng.standard_normal(n), KernelSpec())
        assert np.linalg.eigvalsh(g.values)[0] >= -1e-8


def test_gram_permutation_equivariant():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(15)
    perm = rng.permutation(15)
    direct = gram(x[perm], KernelSpec(bandwidth=0.7)).values
    permuted = gram(x, KernelSpec(bandwidth=0.7)).values[np.ix_(perm, perm)]
    assert np.allclose(direct, permuted, atol=1e-12)


def test_delta_gram_permutation_equivariant():
    rng = np.random.default_rng(5)
    labels = rng.integers(0, 3, size=12)
    perm = rng.permutation(12)
    direct = gram(labels[perm], KernelSpec(kind="delta")).values
    permuted = gram(labels, KernelSpec(kind="delta")).values[np.ix_(perm, perm)]
    assert np.allclose(direct, permuted, atol=1e-12)


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(bandwidth=-1.0)
    with pytest.raises(ValueError):
        KernelSpec(kind="delta", bandwidth=1.0)
    with pytest.raises(ValueError):
        KernelSpec(kind="unknown")
