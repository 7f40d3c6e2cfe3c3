import numpy as np
import pytest

from h2sw import (
    DatasetCollection,
    EUCLIDEAN,
    EstimatorConfig,
    JointCloud,
    LORENTZ,
    Linear,
    BusemannLorentz,
    SpaceSpec,
    ValidationError,
    cost_matrix,
    embed_labels_lorentz,
    lorentz_inner,
    nearest_neighbor_rows,
    relative_error,
)
from conftest import random_cloud

SPECS = (SpaceSpec(EUCLIDEAN, 4), SpaceSpec(LORENTZ, 2))
GS = (Linear(), BusemannLorentz())


def collection(rng, num=3, n=16, offset=2.0):
    names, clouds = [], []
    for d in range(num):
        labels = rng.integers(0, 2, size=n)
        feats = rng.standard_normal((n, 4)) + offset * d
        emb = embed_labels_lorentz(labels, 2, 2, scale=0.8)
        clouds.append(JointCloud((feats, emb), SPECS))
        names.append(f"ds{d}")
    return DatasetCollection(tuple(names), tuple(clouds))


class TestDatasetCollection:
    def test_unique_names(self, rng):
        c = random_cloud(rng, 4, SPECS)
        with pytest.raises(ValidationError):
            DatasetCollection(("a", "a"), (c, c))

    def test_shared_specs(self, rng):
        a = random_cloud(rng, 4, SPECS)
        b = random_cloud(rng, 4, (SpaceSpec(EUCLIDEAN, 4), SpaceSpec(EUCLIDEAN, 3)))
        with pytest.raises(ValidationError):
            DatasetCollection(("a", "b"), (a, b))


class TestCostMatrix:
    def test_identical_datasets_zero_matrix(self, rng):
        c = random_cloud(rng, 10, SPECS)
        coll = DatasetCollection(("a", "b"), (c, c))
        cfg = EstimatorConfig("h2sw", GS, L=16, seed=3)
        M = cost_matrix(coll, cfg)
        assert np.array_equal(M, np.zeros((2, 2)))

    @pytest.mark.parametrize("distance", ["exact", None])
    def test_symmetric_zero_diagonal(self, distance, rng):
        coll = collection(rng)
        if distance is None:
            distance = EstimatorConfig("h2sw", GS, L=16, seed=1)
        M = cost_matrix(coll, distance)
        assert np.array_equal(M, M.T)
        assert np.array_equal(np.diag(M), np.zeros(3))
        off = M[~np.eye(3, dtype=bool)]
        assert np.all(off > 0)

    def test_deterministic(self, rng):
        coll = collection(rng)
        cfg = EstimatorConfig("h2sw", GS, L=16, seed=5)
        assert np.array_equal(cost_matrix(coll, cfg), cost_matrix(coll, cfg))

    def test_needs_two_datasets(self, rng):
        c = random_cloud(rng, 4, SPECS)
        with pytest.raises(ValidationError):
            cost_matrix(DatasetCollection(("a",), (c,)), "exact")


class TestRelativeError:
    def test_zero_for_identical(self, rng):
        C = np.abs(rng.random((4, 4)))
        np.fill_diagonal(C, 0.0)
        assert relative_error(C, C) == 0.0

    def test_scale_invariance(self, rng):
        C = np.abs(rng.random((4, 4)))
        np.fill_diagonal(C, 0.0)
        assert relative_error(2.0 * C, C) == pytest.approx(0.0, abs=1e-14)
        assert relative_error(C, 3.5 * C) == pytest.approx(0.0, abs=1e-14)

    def test_hand_computation(self, rng):
        C = np.abs(rng.random((5, 5))) + 0.1
        R = np.abs(rng.random((5, 5))) + 0.1
        want_sum = 0.0
        for i in range(5):
            for j in range(5):
                if i != j:
                    want_sum += abs(C[i, j] / C.max() - R[i, j] / R.max())
        assert relative_error(C, R) == pytest.approx(want_sum, abs=1e-12)
        assert relative_error(C, R, aggregate="mean") == pytest.approx(want_sum / 20, abs=1e-12)

    def test_symmetry_in_arguments(self, rng):
        C = np.abs(rng.random((4, 4)))
        R = np.abs(rng.random((4, 4)))
        assert relative_error(C, R) == relative_error(R, C)

    def test_degenerate_inputs(self):
        Z = np.zeros((3, 3))
        with pytest.raises(ValidationError):
            relative_error(Z, Z)
        with pytest.raises(ValidationError):
            relative_error(np.ones((3, 3)), np.ones((4, 4)))
        with pytest.raises(ValidationError):
            relative_error(np.ones((3, 3)), np.ones((3, 3)), aggregate="median")


class TestNearestNeighborRows:
    def test_ignores_diagonal(self):
        C = np.array([[0.0, 2.0, 1.0], [2.0, 0.0, 3.0], [1.0, 3.0, 0.0]])
        assert nearest_neighbor_rows(C).tolist() == [2, 0, 0]


class TestEmbedLabels:
    def test_points_lie_on_manifold(self):
        pts = embed_labels_lorentz(np.array([0, 1, 2, 1]), 3, 2, scale=1.2)
        assert pts.shape == (4, 3)
        assert np.abs(lorentz_inner(pts, pts) + 1.0).max() <= 1e-9
        assert np.all(pts[:, 0] > 0)

    def test_one_hot_prototypes_when_room(self):
        pts = embed_labels_lorentz(np.array([0, 1]), 2, 3, scale=1.0)
        # class 0 maps along the first tangent axis, class 1 along the second
        assert pts[0, 1] == pytest.approx(np.sinh(1.0), abs=1e-12)
        assert pts[1, 2] == pytest.approx(np.sinh(1.0), abs=1e-12)

    def test_same_label_same_point(self):
        pts = embed_labels_lorentz(np.array([1, 1, 0]), 2, 2)
        assert np.array_equal(pts[0], pts[1])
        assert not np.array_equal(pts[0], pts[2])

    def test_label_range_checked(self):
        with pytest.raises(ValidationError):
            embed_labels_lorentz(np.array([0, 3]), 3, 2)
