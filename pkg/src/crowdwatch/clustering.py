"""Density clustering of ground points with infection-risk scoring.

DBSCAN over the planar coordinates groups people standing too close
together: a core point has at least ``min_points`` neighbours (itself
included) within ``eps`` meters, clusters are the maximal density-connected
sets, everything else is an outlier.  Groups smaller than ``min_points``
never form a cluster, so pairs and singletons stay outliers.

Each cluster carries a risk score: the fraction of member pairs closer than
``risk_distance`` plus the member count, so larger and tighter groups rank
higher when planning inspection tours.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array

#: Planar ground coordinates in meters.
Point = tuple[float, float]

#: Label used for outlier points; cluster ids start at 1 (0 is the depot).
OUTLIER_LABEL = -1


@dataclass(frozen=True)
class ClusterParams:
    """Distancing parameters: neighbourhood radius, minimum group size and
    the pair-distance threshold counted as a violation."""

    eps: float = 2.0
    min_points: int = 3
    risk_distance: float = 2.0

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.min_points < 2:
            raise ValueError(f"min_points must be at least 2, got {self.min_points}")
        if self.risk_distance <= 0:
            raise ValueError(f"risk_distance must be positive, got {self.risk_distance}")


@dataclass(frozen=True)
class Cluster:
    """A detected group: members, their barycenter and the risk score."""

    id: int
    members: tuple[Point, ...]
    member_indices: tuple[int, ...]
    barycenter: tuple[float, float]
    size: int
    risk: float


def _coords(points: Sequence[Point]) -> np.ndarray:
    return np.asarray(points, dtype=float).reshape(-1, 2)


def _dbscan_labels(coords: np.ndarray, eps: float, min_points: int) -> np.ndarray:
    """Label rows of an (n, 2) array with cluster ids 1..K or -1 for outliers.

    Core points are connected through the closed eps-ball graph; components
    are numbered in order of their first core point.  A border point next to
    several clusters joins the one of its lowest-indexed adjacent core, which
    keeps the partition independent of traversal details.
    """
    n = coords.shape[0]
    labels = np.full(n, OUTLIER_LABEL, dtype=int)
    if n == 0:
        return labels

    diff = coords[:, None, :] - coords[None, :, :]
    within = (diff ** 2).sum(axis=2) <= eps * eps
    core = within.sum(axis=1) >= min_points

    next_id = 1
    for start in range(n):
        if not core[start] or labels[start] != OUTLIER_LABEL:
            continue
        queue = [start]
        labels[start] = next_id
        while queue:
            i = queue.pop()
            for j in np.flatnonzero(within[i]):
                if core[j] and labels[j] == OUTLIER_LABEL:
                    labels[j] = next_id
                    queue.append(j)
        next_id += 1

    for i in range(n):
        if core[i]:
            continue
        adjacent = [j for j in np.flatnonzero(within[i]) if core[j]]
        if adjacent:
            labels[i] = labels[min(adjacent)]
    return labels


def dbscan(points: Sequence[Point],
           params: ClusterParams) -> tuple[list[list[int]], list[int]]:
    """Cluster ground points; returns (member index lists, outlier indices)."""
    labels = _dbscan_labels(_coords(points), params.eps, params.min_points)
    n_clusters = int(labels.max()) if labels.size else 0
    clusters = [sorted(np.flatnonzero(labels == cid).tolist())
                for cid in range(1, n_clusters + 1)]
    outliers = sorted(np.flatnonzero(labels == OUTLIER_LABEL).tolist())
    return clusters, outliers


def risk_score(members: Sequence[Point], risk_distance: float) -> float:
    """Violating-pair ratio plus group size.

    The ratio counts unordered pairs strictly closer than ``risk_distance``
    over all unordered pairs, so the score lies in [N, N + 1].
    """
    n = len(members)
    if n < 2:
        raise ValueError(f"risk score needs at least 2 members, got {n}")
    coords = _coords(members)
    diff = coords[:, None, :] - coords[None, :, :]
    dist2 = (diff ** 2).sum(axis=2)
    iu = np.triu_indices(n, k=1)
    violations = int(np.count_nonzero(dist2[iu] < risk_distance * risk_distance))
    total_pairs = n * (n - 1) // 2
    return violations / total_pairs + n


def barycenter(members: Sequence[Point]) -> tuple[float, float]:
    """Componentwise mean of the member coordinates."""
    if not members:
        raise ValueError("barycenter of an empty set is undefined")
    coords = _coords(members)
    cx, cy = coords.mean(axis=0)
    return (float(cx), float(cy))


def build_clusters(points: Sequence[Point],
                   params: ClusterParams) -> tuple[list[Cluster], list[int]]:
    """Run DBSCAN and package each group with barycenter and risk score."""
    index_sets, outliers = dbscan(points, params)
    clusters = []
    for cid, indices in enumerate(index_sets, start=1):
        members = tuple((float(points[i][0]), float(points[i][1])) for i in indices)
        clusters.append(Cluster(id=cid,
                                members=members,
                                member_indices=tuple(indices),
                                barycenter=barycenter(members),
                                size=len(members),
                                risk=risk_score(members, params.risk_distance)))
    return clusters, outliers


class SocialDistanceClusterer(ClusterMixin, BaseEstimator):
    """DBSCAN-style clusterer over (n, 2) ground coordinates.

    After ``fit``, ``labels_`` holds cluster ids starting at 1 (label 0 is
    reserved for the tour depot downstream) with -1 for outliers, and
    ``clusters_`` the corresponding :class:`Cluster` records.
    """

    def __init__(self, eps: float = 2.0, min_points: int = 3,
                 risk_distance: float = 2.0):
        self.eps = eps
        self.min_points = min_points
        self.risk_distance = risk_distance

    def fit(self, X, y=None) -> "SocialDistanceClusterer":
        X = check_array(X, dtype=float, ensure_min_samples=0)
        if X.shape[0] and X.shape[1] != 2:
            raise ValueError(f"expected 2 coordinate columns, got {X.shape[1]}")
        params = ClusterParams(self.eps, self.min_points, self.risk_distance)
        points = [(float(r[0]), float(r[1])) for r in X]
        self.clusters_, self.outlier_indices_ = build_clusters(points, params)
        self.labels_ = np.full(X.shape[0], OUTLIER_LABEL, dtype=int)
        for cluster in self.clusters_:
            self.labels_[list(cluster.member_indices)] = cluster.id
        self.n_clusters_ = len(self.clusters_)
        return self
