"""Centroid clustering of scene entities.

Camera-distance computations run against cluster centroids instead of
every object, so the choice here is between k-means (fixed cluster
count, seeded, k-means++ initialization with Lloyd refinement) and flat
kernel mean shift (bandwidth-driven, finds its own cluster count). Both
return the same ClusterSet shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ValidationError, canonical_json

KMEANS_MAX_ITER = 100
MEANSHIFT_MAX_ITER = 100
MEANSHIFT_TOL = 1e-3


@dataclass(frozen=True)
class Cluster:
    centroid: tuple[float, float, float]
    member_ids: tuple[str, ...]


@dataclass
class ClusterSet:
    """Centroids plus the per-point cluster assignment.

    `labels[i]` is the cluster index of `ids[i]`; `ids` preserves the
    order of the input points.
    """

    centroids: np.ndarray  # (k, 3)
    labels: np.ndarray  # (n,) int
    ids: tuple[str, ...]

    @property
    def clusters(self) -> list[Cluster]:
        out = []
        for j in range(len(self.centroids)):
            members = tuple(self.ids[i] for i in np.flatnonzero(self.labels == j))
            out.append(Cluster(tuple(float(c) for c in self.centroids[j]), members))
        return out

    def objective(self, points: np.ndarray) -> float:
        """Sum of squared distances from each point to its centroid."""
        deltas = points - self.centroids[self.labels]
        return float((deltas * deltas).sum())

    def to_dict(self) -> dict:
        return {
            "clusters": [
                {"centroid": list(c.centroid), "memberEntityIds": list(c.member_ids)}
                for c in self.clusters
            ]
        }

    def canonical_bytes(self) -> bytes:
        return canonical_json(self.to_dict()).encode("utf-8")


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValidationError("points must be an (n, 3) array of 3D coordinates")
    return pts


def _default_ids(n: int) -> tuple[str, ...]:
    return tuple(f"p{i}" for i in range(n))


def _plus_plus_seed(pts: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(pts)
    centers = np.empty((k, 3), dtype=np.float64)
    centers[0] = pts[rng.integers(n)]
    d2 = ((pts - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = pts[idx]
        d2 = np.minimum(d2, ((pts - centers[j]) ** 2).sum(axis=1))
    return centers


def _assign(pts: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2


def kmeans_with_history(
    points, k: int, seed: int, ids: tuple[str, ...] | None = None
) -> tuple[ClusterSet, list[float]]:
    """k-means++ seeding plus Lloyd iterations; returns objective history.

    The history records the objective after each assignment step, so it
    must be non-increasing. Convergence is reached when assignments stop
    changing, or after 100 iterations.
    """
    pts = _as_points(points)
    n = len(pts)
    if not 1 <= k <= n:
        raise ValidationError(f"cluster count k={k} must satisfy 1 <= k <= {n}")
    rng = np.random.default_rng(seed)
    centers = _plus_plus_seed(pts, k, rng)

    labels: np.ndarray | None = None
    history: list[float] = []
    for _ in range(KMEANS_MAX_ITER):
        new_labels, d2 = _assign(pts, centers)
        # Reseed each empty cluster on the worst-served point that is not
        # its cluster's sole member. Centroid = point, so the objective
        # never increases and no cluster is emptied by the move.
        for j in range(k):
            if (new_labels == j).any():
                continue
            counts = np.bincount(new_labels, minlength=k)
            assigned = d2[np.arange(n), new_labels]
            eligible = counts[new_labels] >= 2
            idx = int(np.where(eligible, assigned, -np.inf).argmax())
            new_labels[idx] = j
            centers[j] = pts[idx]
            d2[:, j] = ((pts - centers[j]) ** 2).sum(axis=1)
        history.append(float(((pts - centers[new_labels]) ** 2).sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = pts[labels == j]
            centers[j] = members.mean(axis=0)
    cluster_ids = ids if ids is not None else _default_ids(n)
    if len(cluster_ids) != n:
        raise ValidationError("ids must match the number of points")
    return ClusterSet(centroids=centers, labels=labels, ids=tuple(cluster_ids)), history


def cluster_kmeans(points, k: int, seed: int, ids: tuple[str, ...] | None = None) -> ClusterSet:
    clusters, _ = kmeans_with_history(points, k, seed, ids)
    return clusters


def _flat_mean(pts: np.ndarray, position: np.ndarray, bandwidth: float) -> np.ndarray:
    d2 = ((pts - position) ** 2).sum(axis=1)
    members = pts[d2 <= bandwidth * bandwidth]
    return members.mean(axis=0)


def _shift_to_mode(pts: np.ndarray, start: np.ndarray, bandwidth: float,
                   tol: float, max_iter: int) -> np.ndarray:
    position = start.astype(np.float64).copy()
    for _ in range(max_iter):
        new_position = _flat_mean(pts, position, bandwidth)
        shift = float(np.linalg.norm(new_position - position))
        position = new_position
        if shift < tol:
            break
    return position


def cluster_meanshift(points, bandwidth: float, ids: tuple[str, ...] | None = None) -> ClusterSet:
    """Flat-kernel mean shift; modes within bandwidth/2 are merged.

    Each point walks uphill until its window mean stops moving (shift
    below 1e-3, at most 100 iterations). Merged cluster modes are then
    polished with extra iterations so every reported mode is stationary.
    """
    if bandwidth <= 0:
        raise ValidationError("bandwidth must be positive")
    pts = _as_points(points)
    n = len(pts)
    modes = np.empty_like(pts)
    for i in range(n):
        modes[i] = _shift_to_mode(pts, pts[i], bandwidth, MEANSHIFT_TOL, MEANSHIFT_MAX_ITER)

    representatives: list[np.ndarray] = []
    labels = np.empty(n, dtype=np.int64)
    merge_radius = bandwidth / 2
    for i in range(n):
        assigned = -1
        for j, rep in enumerate(representatives):
            if float(np.linalg.norm(modes[i] - rep)) <= merge_radius:
                assigned = j
                break
        if assigned < 0:
            polished = _shift_to_mode(pts, modes[i], bandwidth, 1e-9, MEANSHIFT_MAX_ITER)
            representatives.append(polished)
            assigned = len(representatives) - 1
        labels[i] = assigned

    cluster_ids = ids if ids is not None else _default_ids(n)
    if len(cluster_ids) != n:
        raise ValidationError("ids must match the number of points")
    return ClusterSet(
        centroids=np.vstack(representatives),
        labels=labels,
        ids=tuple(cluster_ids),
    )
