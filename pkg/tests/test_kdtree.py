import math
import random

import numpy as np

from medbridge.retrieval.kdtree import KdNode, build_tree, knn, linear_scan, squared_distance


def _random_sphere_points(rng, n, dims, nonneg=False):
    pts = np.array([[rng.gauss(0, 1) for _ in range(dims)] for _ in range(n)])
    if nonneg:
        pts = np.abs(pts)
    norms = np.linalg.norm(pts, axis=1, keepdims=True)
    return pts / norms


def _collect_ids(node):
    if node is None:
        return []
    return _collect_ids(node.left) + [node.point_id] + _collect_ids(node.right)


def test_build_contains_every_point_once():
    rng = random.Random(0)
    pts = _random_sphere_points(rng, 37, 5)
    root = build_tree(pts)
    assert sorted(_collect_ids(root)) == list(range(37))


def test_build_is_balanced():
    rng = random.Random(1)
    pts = _random_sphere_points(rng, 256, 4)
    root = build_tree(pts)

    def depth(node):
        if node is None:
            return 0
        return 1 + max(depth(node.left), depth(node.right))

    # distinct coordinates: median splits keep depth near log2(n)
    assert depth(root) <= 2 * math.ceil(math.log2(256)) + 1


def test_axis_cycles_with_depth():
    rng = random.Random(2)
    pts = _random_sphere_points(rng, 31, 3)
    root = build_tree(pts)

    def check(node, depth):
        if node is None:
            return
        assert node.axis == depth % 3
        check(node.left, depth + 1)
        check(node.right, depth + 1)

    check(root, 0)


def test_median_ties_go_left():
    pts = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [2.0, 0.0]])
    root = build_tree(pts)
    # axis 0 values [1,1,1,2]: median run of 1s ends at id 2, so ids 0,1 go left
    assert root.point_id == 2
    assert sorted(_collect_ids(root.left)) == [0, 1]
    assert _collect_ids(root.right) == [3]


def test_knn_matches_linear_scan_random():
    rng = random.Random(42)
    for trial in range(60):
        n = rng.randint(1, 300)
        dims = rng.choice([2, 3, 8, 17])
        pts = _random_sphere_points(rng, n, dims, nonneg=rng.random() < 0.5)
        # inject duplicates to exercise the tie rule
        if n > 4 and rng.random() < 0.5:
            for _ in range(rng.randint(1, 4)):
                pts[rng.randrange(n)] = pts[rng.randrange(n)]
        root = build_tree(pts)
        for k in (1, 3, 5):
            q = _random_sphere_points(rng, 1, dims)[0]
            got, _ = knn(root, pts, q, k)
            assert got == linear_scan(pts, q, k)


def test_knn_exact_tie_prefers_lower_id():
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    root = build_tree(pts)
    got, _ = knn(root, pts, np.array([1.0, 0.0]), 2)
    assert [i for i, _ in got] == [0, 2]
    assert got[0][1] == 0.0 and got[1][1] == 0.0


def test_k_clamped_to_point_count():
    pts = np.array([[0.0, 1.0], [1.0, 0.0]])
    root = build_tree(pts)
    got, _ = knn(root, pts, np.array([1.0, 0.0]), 10)
    assert len(got) == 2


def test_results_ascend_by_distance():
    rng = random.Random(3)
    pts = _random_sphere_points(rng, 100, 6)
    root = build_tree(pts)
    q = _random_sphere_points(rng, 1, 6)[0]
    got, _ = knn(root, pts, q, 10)
    dists = [d for _, d in got]
    assert dists == sorted(dists)


def test_pruning_visits_fewer_nodes_than_scan():
    rng = random.Random(4)
    pts = _random_sphere_points(rng, 2000, 3)
    root = build_tree(pts)
    q = _random_sphere_points(rng, 1, 3)[0]
    _, visits = knn(root, pts, q, 3)
    assert visits < 2000


def test_node_round_trip():
    rng = random.Random(5)
    pts = _random_sphere_points(rng, 25, 4)
    root = build_tree(pts)
    assert KdNode.from_dict(root.to_dict()).to_dict() == root.to_dict()


def test_unit_sphere_l2_equals_chord_formula():
    # on the unit sphere, ||q - v|| = 2 sin(theta / 2)
    rng = random.Random(6)
    for _ in range(300):
        q = _random_sphere_points(rng, 1, 9)[0]
        v = _random_sphere_points(rng, 1, 9)[0]
        theta = math.acos(max(-1.0, min(1.0, float(np.dot(q, v)))))
        l2 = math.sqrt(squared_distance(q, v))
        assert abs(l2 - 2.0 * math.sin(theta / 2.0)) <= 1e-9
