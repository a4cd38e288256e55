import itertools

import numpy as np
import pytest

from meterhalo.mlcore import (
    PointMatrix,
    adjusted_rand_index,
    kmeans,
    pca_biplot,
    polynomial_kernel,
    svm_predict,
    svm_train,
)

# ---------------------------------------------------------------------------
# Oracle: pair-counting ARI. Counts agreeing element pairs directly instead
# of going through the contingency table.
# ---------------------------------------------------------------------------


def pair_counting_ari(a, b) -> float:
    n = len(a)
    together_a = together_b = together_both = 0
    for i, j in itertools.combinations(range(n), 2):
        same_a = a[i] == a[j]
        same_b = b[i] == b[j]
        together_a += same_a
        together_b += same_b
        together_both += same_a and same_b
    total = n * (n - 1) // 2
    expected = together_a * together_b / total
    maximum = (together_a + together_b) / 2
    if maximum == expected:
        return 1.0
    return (together_both - expected) / (maximum - expected)


def set_partitions(n):
    """All partitions of range(n) as restricted-growth label tuples."""
    out = []

    def rec(i, labels, mx):
        if i == n:
            out.append(tuple(labels))
            return
        for lab in range(mx + 1):
            labels.append(lab)
            rec(i + 1, labels, mx + (1 if lab == mx else 0))
            labels.pop()

    rec(0, [], 0)
    return out


class TestARI:
    def test_hand_case_minus_half(self):
        assert adjusted_rand_index(["A", "A", "B", "B"], [1, 2, 1, 2]) == pytest.approx(
            -0.5
        )

    def test_identical_partition(self):
        assert adjusted_rand_index(["A", "A", "B", "B"], [1, 1, 2, 2]) == 1.0
        assert adjusted_rand_index([0, 1, 2], [5, 6, 7]) == 1.0

    def test_constant_vs_nontrivial_is_zero(self):
        assert adjusted_rand_index([0, 0, 0, 0], [0, 0, 1, 1]) == pytest.approx(0.0)
        assert adjusted_rand_index([0, 1, 0, 1], ["x", "x", "x", "x"]) == pytest.approx(
            0.0
        )

    def test_exhaustive_small_n_against_oracle(self):
        for n in range(2, 6):
            parts = set_partitions(n)
            for a in parts:
                for b in parts:
                    assert adjusted_rand_index(a, b) == pytest.approx(
                        pair_counting_ari(a, b), abs=1e-12
                    ), (a, b)

    def test_symmetry_and_relabeling_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = rng.integers(0, 4, size=12)
            b = rng.integers(0, 3, size=12)
            assert adjusted_rand_index(a, b) == pytest.approx(
                adjusted_rand_index(b, a)
            )
            relabeled = [{0: 7, 1: 3, 2: 9, 3: 1}[x] for x in a]
            assert adjusted_rand_index(a, b) == pytest.approx(
                adjusted_rand_index(relabeled, b)
            )

    def test_random_shuffles_mean_near_zero(self):
        rng = np.random.default_rng(11)
        base = np.repeat(np.arange(4), 25)
        values = []
        for _ in range(1000):
            values.append(adjusted_rand_index(base, rng.permutation(base)))
        assert abs(float(np.mean(values))) < 0.02

    def test_errors(self):
        with pytest.raises(ValueError):
            adjusted_rand_index([1, 2], [1, 2, 3])
        with pytest.raises(ValueError):
            adjusted_rand_index([1], [1])


class TestKMeans:
    def gaussians(self, seed=0, n=40, spread=0.05, separation=5.0):
        rng = np.random.default_rng(seed)
        centers = np.array([[0.0, 0.0], [separation, 0.0], [0.0, separation]])
        points = np.vstack(
            [c + spread * rng.standard_normal((n, 2)) for c in centers]
        )
        truth = np.repeat(np.arange(3), n)
        return points, truth

    def test_separated_gaussians_recovered(self):
        points, truth = self.gaussians()
        result = kmeans(points, k=3, seed=1)
        assert adjusted_rand_index(truth, result.labels) == 1.0

    def test_k_equals_n(self):
        points = np.array([[0.0], [1.0], [2.0], [5.0]])
        result = kmeans(points, k=4, seed=0)
        assert result.wcss == pytest.approx(0.0, abs=1e-12)
        assert sorted(result.labels) == [0, 1, 2, 3]

    def test_duplicates_co_clustered(self):
        points = np.array([[0.0, 0.0], [0.0, 0.0], [9.0, 9.0], [9.0, 9.0]])
        result = kmeans(points, k=2, seed=3)
        assert result.labels[0] == result.labels[1]
        assert result.labels[2] == result.labels[3]
        assert result.labels[0] != result.labels[2]

    def test_deterministic_given_seed(self):
        points, _ = self.gaussians(seed=9, spread=1.5, separation=3.0)
        a = kmeans(points, k=3, seed=42)
        b = kmeans(points, k=3, seed=42)
        assert np.array_equal(a.labels, b.labels)
        assert a.wcss == b.wcss

    def test_restarts_never_hurt(self):
        points, _ = self.gaussians(seed=2, spread=2.0, separation=2.5)
        single = kmeans(points, k=3, seed=7, restarts=1)
        many = kmeans(points, k=3, seed=7, restarts=10)
        assert many.wcss <= single.wcss + 1e-9

    def test_labels_within_range(self):
        points, _ = self.gaussians(seed=4)
        result = kmeans(points, k=5, seed=0)
        assert set(result.labels) <= set(range(5))
        assert result.k == 5

    def test_errors(self):
        points = np.zeros((3, 2))
        with pytest.raises(ValueError):
            kmeans(points, k=4, seed=0)
        with pytest.raises(ValueError):
            kmeans(points, k=0, seed=0)

    def test_point_matrix_wrapper(self):
        points, truth = self.gaussians()
        wrapped = PointMatrix(values=points, ids=tuple(str(i) for i in range(len(points))))
        result = kmeans(wrapped, k=3, seed=1)
        assert adjusted_rand_index(truth, result.labels) == 1.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            PointMatrix(values=np.array([[1.0, np.nan]]))


class TestPCA:
    def test_orthonormal_components(self):
        rng = np.random.default_rng(0)
        points = rng.standard_normal((30, 6))
        result = pca_biplot(points)
        v = result.loadings  # d x 2
        gram = v.T @ v
        assert np.allclose(gram, np.eye(2), atol=1e-9)

    def test_explained_variance_shape(self):
        rng = np.random.default_rng(1)
        points = rng.standard_normal((25, 5))
        result = pca_biplot(points)
        ev = result.explained_variance
        assert len(ev) == 2
        assert ev[0] >= ev[1] >= 0
        assert ev.sum() <= 1 + 1e-9

    def test_collinear_points_single_component(self):
        t = np.linspace(0, 1, 12)
        points = np.outer(t, np.array([1.0, 2.0, 3.0]))
        result = pca_biplot(points)
        assert result.explained_variance[0] == pytest.approx(1.0, abs=1e-9)

    def test_full_reconstruction(self):
        rng = np.random.default_rng(2)
        points = rng.standard_normal((20, 4))
        result = pca_biplot(points, components=4)
        centered = points - points.mean(axis=0)
        rebuilt = result.coordinates @ result.loadings.T
        assert np.allclose(rebuilt, centered, atol=1e-8)

    def test_dominant_feature_ranked_first(self):
        rng = np.random.default_rng(3)
        points = rng.standard_normal((60, 5))
        points[:, 2] *= 10.0
        result = pca_biplot(points)
        assert result.top_features[0] == 2

    def test_top_features_count(self):
        rng = np.random.default_rng(4)
        result = pca_biplot(rng.standard_normal((10, 3)), top_features=5)
        assert len(result.top_features) == 3  # capped at d

    def test_zero_variance_error(self):
        with pytest.raises(ValueError):
            pca_biplot(np.ones((5, 3)))

    def test_coordinates_shape(self):
        rng = np.random.default_rng(5)
        result = pca_biplot(rng.standard_normal((15, 7)))
        assert result.coordinates.shape == (15, 2)
        assert result.loadings.shape == (7, 2)


class TestSVM:
    def separable(self, seed=0, n=25):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((n, 3)) * 0.3 + np.array([2.0, 0.0, 0.0])
        b = rng.standard_normal((n, 3)) * 0.3 + np.array([-2.0, 0.0, 0.0])
        points = np.vstack([a, b])
        labels = ["pos"] * n + ["neg"] * n
        return points, labels

    def test_separable_perfect_training_accuracy(self):
        points, labels = self.separable()
        model = svm_train(points, labels)
        assert svm_predict(model, points) == labels

    def test_three_class_voting(self):
        rng = np.random.default_rng(1)
        centers = np.array([[3.0, 0.0], [-3.0, 0.0], [0.0, 3.0]])
        points = np.vstack(
            [c + 0.2 * rng.standard_normal((15, 2)) for c in centers]
        )
        labels = ["a"] * 15 + ["b"] * 15 + ["c"] * 15
        model = svm_train(points, labels)
        assert svm_predict(model, points) == labels

    def test_dual_balance_invariant(self):
        points, labels = self.separable(seed=3)
        model = svm_train(points, labels)
        for machine in model.machines:
            assert abs(float(machine.dual.sum())) <= 1e-6

    def test_kernel_psd(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((20, 5))
        gram = polynomial_kernel(x, x, gamma=1 / 5, degree=3)
        eigenvalues = np.linalg.eigvalsh((gram + gram.T) / 2)
        assert eigenvalues.min() >= -1e-9

    def test_kernel_value(self):
        x = np.array([[1.0, 2.0]])
        y = np.array([[3.0, 4.0]])
        gamma = 0.5
        expected = (gamma * 11.0 + 1.0) ** 3
        assert polynomial_kernel(x, y, gamma=gamma)[0, 0] == pytest.approx(expected)

    def test_identical_points_different_labels(self):
        points = np.array([[1.0, 1.0], [1.0, 1.0]])
        labels = ["a", "b"]
        model = svm_train(points, labels)
        predicted = svm_predict(model, points)
        accuracy = sum(p == t for p, t in zip(predicted, labels)) / 2
        assert accuracy <= 0.5

    def test_tie_goes_to_first_seen_class(self):
        points = np.array([[1.0], [-1.0]])
        model = svm_train(points, ["first", "second"])
        assert svm_predict(model, np.array([[0.0]])) == ["first"]

    def test_deterministic(self):
        points, labels = self.separable(seed=6)
        a = svm_train(points, labels)
        b = svm_train(points, labels)
        for ma, mb in zip(a.machines, b.machines):
            assert np.array_equal(ma.dual, mb.dual)
            assert ma.bias == mb.bias

    def test_errors(self):
        with pytest.raises(ValueError):
            svm_train(np.zeros((3, 2)), ["a", "a", "a"])
        with pytest.raises(ValueError):
            svm_train(np.zeros((0, 2)), [])
        points, labels = self.separable()
        model = svm_train(points, labels)
        with pytest.raises(ValueError):
            svm_predict(model, np.zeros((2, 5)))
