"""Lloyd's algorithm with k-means++ seeding.

Assignment ties break to the lowest centroid index, empty clusters seize
the point farthest from its centroid, and inertia is asserted to be
non-increasing on every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import TooFewPointsError


@dataclass
class KMeansModel:
    centroids: np.ndarray  # (C, d)
    inertia: float
    n_iter: int = 0

    @property
    def n_clusters(self) -> int:
        return self.centroids.shape[0]


def _sq_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # Direct differences keep exactly-tied distances exactly tied.
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("ncd,ncd->nc", diff, diff)


def kmeans_assign(centroids: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Nearest-centroid labels; argmin takes the lowest index on ties."""
    return np.argmin(_sq_distances(points, centroids), axis=1)


def _kmeanspp_init(points: np.ndarray, c: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((c, points.shape[1]))
    centroids[0] = points[int(rng.integers(n))]
    closest = np.sum((points - centroids[0]) ** 2, axis=1)
    for i in range(1, c):
        total = float(closest.sum())
        if total <= 0:
            centroids[i] = points[int(rng.integers(n))]
            continue
        probs = closest / total
        centroids[i] = points[int(rng.choice(n, p=probs))]
        closest = np.minimum(closest, np.sum((points - centroids[i]) ** 2, axis=1))
    return centroids


def kmeans_fit(points: np.ndarray, c: int, rng: np.random.Generator,
               max_iter: int = 100, tol: float = 1e-6) -> KMeansModel:
    """Fit C centroids; stops on relative inertia change < tol."""
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if c < 1 or n < c:
        raise TooFewPointsError(f"need at least {c} points, got {n}")
    centroids = _kmeanspp_init(points, c, rng)
    prev_inertia = np.inf
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = _sq_distances(points, centroids)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(n), labels].sum())
        assert inertia <= prev_inertia + 1e-9 * max(1.0, inertia), "inertia increased"
        if prev_inertia - inertia < tol * max(prev_inertia, 1e-12) and np.isfinite(prev_inertia):
            prev_inertia = inertia
            break
        prev_inertia = inertia
        new_centroids = centroids.copy()
        for j in range(c):
            members = labels == j
            if members.any():
                new_centroids[j] = points[members].mean(axis=0)
        # Repair empty clusters by seizing the farthest point from its centroid.
        empties = [j for j in range(c) if not (labels == j).any()]
        if empties:
            member_d2 = d2[np.arange(n), labels].copy()
            for j in empties:
                far = int(np.argmax(member_d2))
                new_centroids[j] = points[far]
                member_d2[far] = -1.0
        centroids = new_centroids
    d2 = _sq_distances(points, centroids)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    return KMeansModel(centroids=centroids, inertia=inertia, n_iter=n_iter)
