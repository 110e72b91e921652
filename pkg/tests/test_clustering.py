from __future__ import annotations

import itertools

import numpy as np
import pytest

from cityviz.clustering import cluster_kmeans, cluster_meanshift, kmeans_with_history
from cityviz.model import ValidationError


def _blob(rng, center, n, spread=1.0):
    return rng.normal(loc=center, scale=spread, size=(n, 3))


def _best_two_partition_sse(points: np.ndarray) -> float:
    """Brute-force optimal 2-cluster SSE over all nonempty bipartitions."""
    n = len(points)
    best = float("inf")
    for bits in itertools.product((0, 1), repeat=n - 1):
        labels = np.array((0,) + bits)
        sse = 0.0
        for j in (0, 1):
            members = points[labels == j]
            if len(members) == 0:
                break
            centroid = members.mean(axis=0)
            sse += float(((members - centroid) ** 2).sum())
        else:
            best = min(best, sse)
    return best


class TestKMeans:
    def test_k1_centroid_is_mean(self):
        rng = np.random.default_rng(0)
        pts = rng.uniform(-10, 10, size=(20, 3))
        clusters = cluster_kmeans(pts, k=1, seed=1)
        assert np.allclose(clusters.centroids[0], pts.mean(axis=0))
        assert len(clusters.clusters[0].member_ids) == 20

    def test_two_blobs(self):
        rng = np.random.default_rng(42)
        a = _blob(rng, (0.0, 0.0, 0.0), 6)
        b = _blob(rng, (100.0, 0.0, 0.0), 6)
        pts = np.vstack([a, b])
        clusters = cluster_kmeans(pts, k=2, seed=5)
        means = sorted([a.mean(axis=0), b.mean(axis=0)], key=lambda m: m[0])
        got = sorted(clusters.centroids, key=lambda m: m[0])
        for expected, actual in zip(means, got):
            assert np.linalg.norm(expected - actual) < 1.0
        # And the solution matches the brute-force optimal bipartition.
        assert clusters.objective(pts) == pytest.approx(_best_two_partition_sse(pts), rel=1e-9)

    def test_k_equals_n_zero_objective(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform(-5, 5, size=(9, 3))
        clusters = cluster_kmeans(pts, k=9, seed=2)
        assert clusters.objective(pts) == pytest.approx(0.0, abs=1e-18)
        assert sorted(len(c.member_ids) for c in clusters.clusters) == [1] * 9

    def test_k_too_large_rejected(self):
        pts = np.zeros((3, 3))
        with pytest.raises(ValidationError):
            cluster_kmeans(pts, k=4, seed=0)

    def test_seeded_determinism_bytes(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(-50, 50, size=(40, 3))
        a = cluster_kmeans(pts, k=6, seed=11)
        b = cluster_kmeans(pts, k=6, seed=11)
        assert a.canonical_bytes() == b.canonical_bytes()

    def test_objective_non_increasing(self):
        rng = np.random.default_rng(9)
        for trial in range(50):
            pts = rng.uniform(-30, 30, size=(rng.integers(8, 60), 3))
            _, history = kmeans_with_history(pts, k=int(rng.integers(1, 7)), seed=trial)
            assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))

    def test_centroid_is_member_mean(self):
        rng = np.random.default_rng(13)
        pts = rng.uniform(-20, 20, size=(30, 3))
        clusters = cluster_kmeans(pts, k=5, seed=4)
        for j, cluster in enumerate(clusters.clusters):
            members = pts[clusters.labels == j]
            assert np.allclose(clusters.centroids[j], members.mean(axis=0))

    def test_every_point_in_exactly_one_cluster(self):
        rng = np.random.default_rng(17)
        pts = rng.uniform(-20, 20, size=(25, 3))
        clusters = cluster_kmeans(pts, k=4, seed=0, ids=tuple(f"e{i}" for i in range(25)))
        seen = [m for c in clusters.clusters for m in c.member_ids]
        assert sorted(seen) == sorted(f"e{i}" for i in range(25))
        assert len(seen) == 25


class TestMeanShift:
    def test_single_point(self):
        clusters = cluster_meanshift([[1.0, 2.0, 3.0]], bandwidth=5.0)
        assert len(clusters.centroids) == 1
        assert np.allclose(clusters.centroids[0], [1.0, 2.0, 3.0])

    def test_two_close_points_merge_at_midpoint(self):
        # One flat-kernel step from either point averages both: midpoint.
        pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
        clusters = cluster_meanshift(pts, bandwidth=5.0)
        assert len(clusters.centroids) == 1
        assert np.allclose(clusters.centroids[0], [0.5, 0.0, 0.0])

    def test_two_far_points_stay_separate(self):
        pts = [[0.0, 0.0, 0.0], [100.0, 0.0, 0.0]]
        clusters = cluster_meanshift(pts, bandwidth=5.0)
        assert len(clusters.centroids) == 2

    def test_modes_stationary(self):
        rng = np.random.default_rng(21)
        pts = np.vstack([
            _blob(rng, (0, 0, 0), 15, spread=2.0),
            _blob(rng, (40, 0, 0), 15, spread=2.0),
        ])
        clusters = cluster_meanshift(pts, bandwidth=10.0)
        for mode in clusters.centroids:
            d2 = ((pts - mode) ** 2).sum(axis=1)
            members = pts[d2 <= 100.0]
            shift = np.linalg.norm(members.mean(axis=0) - mode)
            assert shift < 1e-3

    def test_every_point_assigned(self):
        rng = np.random.default_rng(23)
        pts = rng.uniform(-10, 10, size=(30, 3))
        clusters = cluster_meanshift(pts, bandwidth=4.0)
        assert clusters.labels.min() >= 0
        assert clusters.labels.max() < len(clusters.centroids)
        assert len(clusters.labels) == 30

    def test_bad_bandwidth(self):
        with pytest.raises(ValidationError):
            cluster_meanshift([[0.0, 0.0, 0.0]], bandwidth=0.0)
