"""CART decision tree with exhaustive, deterministic split search.

Split candidates are scanned over presorted feature values (midpoints
between consecutive distinct values). Equal gains resolve to the lower
feature index, then the lower threshold, making every fit reproducible.
Supports variance-reduction splits for regression (used by gradient
boosting, with pluggable leaf values) and Gini splits for classification
(used by the random forest).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

_MIN_GAIN = 1e-12


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


class CartTree:
    """Binary decision tree; criterion "mse" or "gini".

    ``max_features`` subsamples split candidates per node (random forest
    style) using the supplied rng; None considers every feature.
    ``leaf_value_fn(indices) -> float`` overrides the default leaf value
    (mean target for mse, positive-class fraction for gini).
    """

    def __init__(self, max_depth: int = 3, min_samples_leaf: int = 1,
                 min_samples_split: int = 2, criterion: str = "mse",
                 max_features: Optional[int] = None,
                 rng: Optional[np.random.Generator] = None):
        if criterion not in ("mse", "gini"):
            raise ValueError(f"unknown criterion {criterion!r}")
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.criterion = criterion
        self.max_features = max_features
        self.rng = rng
        self.nodes: list[_Node] = []

    def fit(self, X, y, leaf_value_fn: Optional[Callable] = None) -> "CartTree":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        self.n_features_ = X.shape[1]
        # one argsort per feature; nodes filter this order by membership
        self._order = np.argsort(X, axis=0, kind="mergesort")
        self.nodes = []
        if leaf_value_fn is None:
            leaf_value_fn = lambda idx: float(y[idx].mean())
        self._build(X, y, np.arange(len(y)), depth=0, leaf_value_fn=leaf_value_fn)
        del self._order
        return self

    def _leaf(self, idx, leaf_value_fn) -> int:
        self.nodes.append(_Node(value=leaf_value_fn(idx)))
        return len(self.nodes) - 1

    def _build(self, X, y, idx, depth, leaf_value_fn) -> int:
        n = len(idx)
        if (depth >= self.max_depth or n < self.min_samples_split
                or n < 2 * self.min_samples_leaf):
            return self._leaf(idx, leaf_value_fn)

        best = self._best_split(X, y, idx)
        if best is None:
            return self._leaf(idx, leaf_value_fn)
        feature, threshold = best

        mask = X[idx, feature] <= threshold
        left_idx = idx[mask]
        right_idx = idx[~mask]
        node_id = len(self.nodes)
        self.nodes.append(_Node(feature=feature, threshold=threshold))
        self.nodes[node_id].left = self._build(X, y, left_idx, depth + 1, leaf_value_fn)
        self.nodes[node_id].right = self._build(X, y, right_idx, depth + 1, leaf_value_fn)
        return node_id

    def _candidate_features(self) -> np.ndarray:
        if self.max_features is None or self.max_features >= self.n_features_:
            return np.arange(self.n_features_)
        if self.rng is None:
            raise ValueError("max_features requires an rng")
        picked = self.rng.choice(self.n_features_, size=self.max_features, replace=False)
        return np.sort(picked)

    def _best_split(self, X, y, idx) -> Optional[tuple[int, float]]:
        n = len(idx)
        member = np.zeros(X.shape[0], dtype=bool)
        member[idx] = True
        min_leaf = self.min_samples_leaf

        best_gain = _MIN_GAIN
        best: Optional[tuple[int, float]] = None

        total_sum = float(y[idx].sum())
        total_pos = total_sum
        if self.criterion == "mse":
            total_sq = float((y[idx] ** 2).sum())
            parent_impurity = total_sq - total_sum * total_sum / n
        else:
            parent_impurity = self._gini_ss(total_pos, n)

        lo, hi = min_leaf - 1, n - min_leaf  # candidate split positions
        if hi <= lo:
            return None
        for feature in self._candidate_features():
            order = self._order[:, feature]
            sorted_idx = order[member[order]]
            values = X[sorted_idx, feature]
            ys = y[sorted_idx]

            boundary = values[lo:hi] != values[lo + 1:hi + 1]
            if not boundary.any():
                continue
            pos = np.nonzero(boundary)[0] + lo
            n_l = pos + 1.0
            n_r = n - n_l
            if self.criterion == "mse":
                csum = np.cumsum(ys)
                csq = np.cumsum(ys ** 2)
                s_l = csum[pos]
                imp_l = csq[pos] - s_l * s_l / n_l
                s_r = total_sum - s_l
                imp_r = (total_sq - csq[pos]) - s_r * s_r / n_r
            else:
                cpos = np.cumsum(ys)
                pos_l = cpos[pos]
                imp_l = n_l - (pos_l ** 2 + (n_l - pos_l) ** 2) / n_l
                pos_r = total_pos - pos_l
                imp_r = n_r - (pos_r ** 2 + (n_r - pos_r) ** 2) / n_r
            gains = parent_impurity - imp_l - imp_r
            k = int(np.argmax(gains))  # first max: the lowest threshold
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                i = int(pos[k])
                best = (int(feature), float((values[i] + values[i + 1]) / 2.0))
        return best

    @staticmethod
    def _gini_ss(pos: float, n: int) -> float:
        # n * gini = n - (pos^2 + neg^2)/n, comparable across splits
        neg = n - pos
        return n - (pos * pos + neg * neg) / n

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.empty(X.shape[0], dtype=float)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node_id, idx = stack.pop()
            if len(idx) == 0:
                continue
            node = self.nodes[node_id]
            if node.is_leaf:
                out[idx] = node.value
            else:
                mask = X[idx, node.feature] <= node.threshold
                stack.append((node.left, idx[mask]))
                stack.append((node.right, idx[~mask]))
        return out

    @property
    def root_split(self) -> Optional[tuple[int, float]]:
        """(feature, threshold) of the root, or None for a stump-less tree."""
        if not self.nodes or self.nodes[0].is_leaf:
            return None
        return self.nodes[0].feature, self.nodes[0].threshold

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "nodes": [
                {"feature": n.feature, "threshold": n.threshold,
                 "left": n.left, "right": n.right, "value": n.value}
                for n in self.nodes
            ],
        }
