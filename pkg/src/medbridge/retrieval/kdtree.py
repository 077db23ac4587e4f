"""Balanced KD-tree with pruned k-nearest-neighbor search.

Build rule: split dimension cycles with depth (depth mod dims), split at
the median, and points whose coordinate equals the median's go to the
left subtree. Sorting is by (coordinate, point id) so the tree shape is
a pure function of the input, which keeps serialized indexes
byte-identical across rebuilds.

Queries return the k nearest points under L2, ties broken by lower point
id. The far branch is pruned only when the splitting-plane distance is
strictly greater than the current worst candidate, so equal-distance
ties are never lost.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np


@dataclass
class KdNode:
    point_id: int
    axis: int
    left: "KdNode | None"
    right: "KdNode | None"

    def to_dict(self) -> dict:
        return {
            "id": self.point_id,
            "axis": self.axis,
            "left": self.left.to_dict() if self.left else None,
            "right": self.right.to_dict() if self.right else None,
        }

    @classmethod
    def from_dict(cls, data: dict | None) -> "KdNode | None":
        if data is None:
            return None
        return cls(
            point_id=data["id"],
            axis=data["axis"],
            left=cls.from_dict(data["left"]),
            right=cls.from_dict(data["right"]),
        )


def build_tree(points: np.ndarray) -> KdNode | None:
    """Build a balanced tree over the rows of ``points`` (n x dims)."""
    n, dims = points.shape

    def _build(idx: np.ndarray, depth: int) -> KdNode | None:
        if idx.size == 0:
            return None
        axis = depth % dims
        coords = points[idx, axis]
        order = idx[np.lexsort((idx, coords))]
        m = order.size // 2
        # pull equal-coordinate points into the left subtree
        while m + 1 < order.size and points[order[m + 1], axis] == points[order[m], axis]:
            m += 1
        return KdNode(
            point_id=int(order[m]),
            axis=axis,
            left=_build(order[:m], depth + 1),
            right=_build(order[m + 1:], depth + 1),
        )

    return _build(np.arange(n), 0)


def squared_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    return float(np.dot(diff, diff))


def knn(
    root: KdNode | None, points: np.ndarray, query: np.ndarray, k: int
) -> tuple[list[tuple[int, float]], int]:
    """k nearest rows to ``query``; returns ([(id, l2_distance)...], nodes_visited).

    Results ascend by (distance, id). ``k`` is clamped to the point count.
    """
    if root is None or k < 1:
        return [], 0
    k = min(k, points.shape[0])
    # max-heap of the best k seen so far, keyed by (distance^2, id)
    heap: list[tuple[float, int]] = []  # (-d2, -id)
    visited = 0

    def _worst() -> tuple[float, int]:
        d2, pid = heap[0]
        return -d2, -pid

    def _search(node: KdNode | None) -> None:
        nonlocal visited
        if node is None:
            return
        visited += 1
        d2 = squared_distance(points[node.point_id], query)
        if len(heap) < k:
            heapq.heappush(heap, (-d2, -node.point_id))
        elif (d2, node.point_id) < _worst():
            heapq.heappushpop(heap, (-d2, -node.point_id))

        diff = float(query[node.axis]) - float(points[node.point_id, node.axis])
        nearer, farther = (node.left, node.right) if diff <= 0 else (node.right, node.left)
        _search(nearer)
        if len(heap) < k or diff * diff <= _worst()[0]:
            _search(farther)

    _search(root)
    pairs = sorted((-d2, -pid) for d2, pid in heap)
    return [(pid, math.sqrt(d2)) for d2, pid in pairs], visited


def linear_scan(
    points: np.ndarray, query: np.ndarray, k: int
) -> list[tuple[int, float]]:
    """Brute-force oracle with the same distance arithmetic and tie rule."""
    k = min(k, points.shape[0])
    scored = sorted(
        (squared_distance(points[i], query), i) for i in range(points.shape[0])
    )
    return [(i, math.sqrt(d2)) for d2, i in scored[:k]]
