"""Density clustering and risk scoring against brute-force oracles."""

import math

import numpy as np
import pytest

from crowdwatch.clustering import (
    OUTLIER_LABEL,
    ClusterParams,
    SocialDistanceClusterer,
    barycenter,
    build_clusters,
    dbscan,
    risk_score,
)

PARAMS = ClusterParams()  # eps 2 m, min_points 3, risk_distance 2 m


def oracle_partition(points, eps, min_points):
    """Density-connectivity oracle built from transitive closure.

    Independently recomputes the clustering: core points from neighbor
    counts, reachability as the transitive closure of the core-to-core
    adjacency matrix (repeated boolean matrix multiplication, no BFS),
    components numbered by their first core point in input order, border
    points attached to the cluster of their lowest-indexed adjacent core.
    """
    n = len(points)
    if n == 0:
        return [], []
    pts = np.asarray(points, dtype=float)
    dist = np.hypot(pts[:, None, 0] - pts[None, :, 0],
                    pts[:, None, 1] - pts[None, :, 1])
    adjacency = dist <= eps
    core = adjacency.sum(axis=1) >= min_points

    core_adj = adjacency & core[:, None] & core[None, :]
    reach = core_adj.copy()
    while True:
        bigger = reach | (reach @ reach)
        if np.array_equal(bigger, reach):
            break
        reach = bigger

    labels = [None] * n
    clusters = []
    for i in range(n):
        if not core[i] or labels[i] is not None:
            continue
        members = [j for j in range(n) if core[j] and reach[i, j]]
        for j in members:
            labels[j] = len(clusters)
        clusters.append(sorted(members))
    for i in range(n):
        if core[i]:
            continue
        adjacent_cores = [j for j in range(n) if core[j] and adjacency[i, j]]
        if adjacent_cores:
            owner = labels[min(adjacent_cores)]
            clusters[owner].append(i)
            labels[i] = owner
    clusters = [sorted(c) for c in clusters]
    outliers = sorted(i for i in range(n) if labels[i] is None)
    return clusters, outliers


def naive_risk(points, risk_distance):
    n = len(points)
    violations = sum(
        1
        for i in range(n)
        for j in range(i + 1, n)
        if math.dist(points[i], points[j]) < risk_distance
    )
    return violations / (n * (n - 1) / 2) + n


class TestDbscan:
    def test_empty_input(self):
        assert dbscan([], PARAMS) == ([], [])

    def test_two_far_triplets_form_two_clusters(self):
        group_a = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.8)]
        group_b = [(100.0, 0.0), (101.0, 0.0), (100.5, 0.8)]
        clusters, outliers = dbscan(group_a + group_b, PARAMS)
        assert clusters == [[0, 1, 2], [3, 4, 5]]
        assert outliers == []

    def test_pair_is_outliers(self):
        clusters, outliers = dbscan([(0.0, 0.0), (0.5, 0.0)], PARAMS)
        assert clusters == []
        assert outliers == [0, 1]

    def test_singleton_is_outlier(self):
        clusters, outliers = dbscan([(3.0, 4.0)], PARAMS)
        assert clusters == []
        assert outliers == [0]

    def test_chain_connects_through_core_points(self):
        # Five points spaced 1.5 m apart: all cores, one cluster.
        points = [(1.5 * i, 0.0) for i in range(5)]
        clusters, outliers = dbscan(points, PARAMS)
        assert clusters == [[0, 1, 2, 3, 4]]
        assert outliers == []

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(42)
        for _ in range(60):
            n = int(rng.integers(0, 45))
            points = [tuple(p) for p in rng.uniform(0.0, 20.0, size=(n, 2))]
            expected = oracle_partition(points, PARAMS.eps, PARAMS.min_points)
            assert dbscan(points, PARAMS) == expected

    def test_translation_invariance(self):
        rng = np.random.default_rng(9)
        points = [tuple(p) for p in rng.uniform(0.0, 15.0, size=(30, 2))]
        shifted = [(x + 523.25, y - 77.5) for x, y in points]
        assert dbscan(points, PARAMS) == dbscan(shifted, PARAMS)

    def test_memberships_partition_all_indices(self):
        rng = np.random.default_rng(5)
        points = [tuple(p) for p in rng.uniform(0.0, 12.0, size=(40, 2))]
        clusters, outliers = dbscan(points, PARAMS)
        seen = sorted(i for group in clusters for i in group) + outliers
        assert sorted(seen) == list(range(40))


class TestRiskScore:
    def test_all_pairs_violating(self):
        points = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.5)]
        assert risk_score(points, 2.0) == pytest.approx(4.0)

    def test_collinear_partial_violations(self):
        points = [(0.0, 0.0), (1.9, 0.0), (3.8, 0.0)]
        assert risk_score(points, 2.0) == pytest.approx(2.0 / 3.0 + 3.0)

    def test_no_violations(self):
        points = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)]
        assert risk_score(points, 2.0) == pytest.approx(4.0)

    def test_threshold_is_strict(self):
        # Pairs at exactly the threshold distance do not count; only the
        # 1 m pair violates here.
        assert risk_score([(0.0, 0.0), (2.0, 0.0), (0.0, 1.0)], 2.0) \
            == pytest.approx(1.0 / 3.0 + 3.0)

    def test_fewer_than_two_members_rejected(self):
        with pytest.raises(ValueError):
            risk_score([(0.0, 0.0)], 2.0)

    def test_matches_naive_on_random_groups(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            n = int(rng.integers(2, 25))
            points = [tuple(p) for p in rng.uniform(0.0, 6.0, size=(n, 2))]
            assert risk_score(points, 2.0) == pytest.approx(naive_risk(points, 2.0))

    def test_score_minus_size_in_unit_interval(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            n = int(rng.integers(2, 15))
            points = [tuple(p) for p in rng.uniform(0.0, 8.0, size=(n, 2))]
            ratio = risk_score(points, 2.0) - n
            assert 0.0 <= ratio <= 1.0


class TestBarycenter:
    def test_singleton(self):
        assert barycenter([(0.0, 0.0)]) == (0.0, 0.0)

    def test_mean_arithmetic(self):
        assert barycenter([(0.0, 0.0), (2.0, 0.0), (1.0, 3.0)]) == (1.0, 1.0)

    def test_square_center(self):
        corners = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]
        assert barycenter(corners) == (1.0, 1.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            barycenter([])


class TestBuildClusters:
    def test_ids_start_at_one(self):
        group_a = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.8)]
        group_b = [(50.0, 0.0), (51.0, 0.0), (50.5, 0.8)]
        clusters, _ = build_clusters(group_a + group_b, PARAMS)
        assert [c.id for c in clusters] == [1, 2]

    def test_cluster_fields_consistent(self):
        points = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.8), (30.0, 30.0)]
        clusters, outliers = build_clusters(points, PARAMS)
        (cluster,) = clusters
        assert outliers == [3]
        assert cluster.size == 3
        assert cluster.members == tuple(points[:3])
        assert cluster.barycenter == barycenter(points[:3])
        assert cluster.risk == pytest.approx(risk_score(points[:3], PARAMS.risk_distance))

    def test_param_validation(self):
        with pytest.raises(ValueError):
            ClusterParams(eps=0.0)
        with pytest.raises(ValueError):
            ClusterParams(min_points=1)
        with pytest.raises(ValueError):
            ClusterParams(risk_distance=-1.0)


class TestSocialDistanceClusterer:
    def test_labels_match_build_clusters(self):
        rng = np.random.default_rng(31)
        X = rng.uniform(0.0, 15.0, size=(35, 2))
        clusterer = SocialDistanceClusterer().fit(X)
        clusters, outliers = build_clusters([tuple(p) for p in X], PARAMS)
        for cluster in clusters:
            for i in cluster.member_indices:
                assert clusterer.labels_[i] == cluster.id
        for i in outliers:
            assert clusterer.labels_[i] == OUTLIER_LABEL
        assert clusterer.n_clusters_ == len(clusters)

    def test_fit_predict_returns_labels(self):
        X = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]])
        labels = SocialDistanceClusterer().fit_predict(X)
        assert labels.tolist() == [1, 1, 1]

    def test_rejects_wrong_width(self):
        with pytest.raises(ValueError):
            SocialDistanceClusterer().fit(np.zeros((4, 3)))

    def test_get_params(self):
        params = SocialDistanceClusterer(eps=1.5).get_params()
        assert params == {"eps": 1.5, "min_points": 3, "risk_distance": 2.0}
