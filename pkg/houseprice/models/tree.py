"""Regression trees grown greedily on squared error or on boosting gradients.

Trees are stored as flat node arrays; a node with ``feature == -1`` is a
leaf. Rows with ``x[feature] <= threshold`` go left.
"""
import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from houseprice.errors import DatasetError
from houseprice.models.base_types import ModelFamily, TreeParams, parse_params
from houseprice.models.interface import Component, Regressor
from houseprice.types.types import Dataset

logger = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen=True)
class TreeStructure:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def features_used(self) -> tuple[int, ...]:
        return tuple(sorted({int(f) for f in self.feature if f != LEAF}))

    def depth(self) -> int:
        deepest, stack = 0, [(0, 0)]
        while stack:
            node, d = stack.pop()
            deepest = max(deepest, d)
            if self.feature[node] != LEAF:
                stack.append((int(self.left[node]), d + 1))
                stack.append((int(self.right[node]), d + 1))
        return deepest

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Index of the leaf each row of ``X`` lands in."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        while np.any(active):
            rows = np.nonzero(active)[0]
            current = node[rows]
            go_left = X[rows, self.feature[current]] <= self.threshold[current]
            node[rows] = np.where(go_left, self.left[current], self.right[current])
            active[rows] = self.feature[node[rows]] != LEAF
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def relevant_features(self, x: np.ndarray, background: np.ndarray) -> tuple[int, ...]:
        """Features tested at a node where ``x`` and ``background`` take different branches.

        Only nodes reachable by some mix of the two rows are visited; no other
        feature can change the output of such a mixed row.
        """
        found: set[int] = set()
        stack = [0]
        while stack:
            node = stack.pop()
            f = int(self.feature[node])
            if f == LEAF:
                continue
            x_left = x[f] <= self.threshold[node]
            b_left = background[f] <= self.threshold[node]
            if x_left == b_left:
                stack.append(int(self.left[node] if x_left else self.right[node]))
            else:
                found.add(f)
                stack.append(int(self.left[node]))
                stack.append(int(self.right[node]))
        return tuple(sorted(found))

    def component(self, weight: float) -> Component:
        return Component(
            weight=weight, features=self.features_used(), predict=self.predict, players=self.relevant_features
        )

    def to_dict(self, node: int = 0) -> dict[str, Any]:
        if self.feature[node] == LEAF:
            return {"leaf": float(self.value[node])}
        return {
            "feature": int(self.feature[node]),
            "threshold": float(self.threshold[node]),
            "left": self.to_dict(int(self.left[node])),
            "right": self.to_dict(int(self.right[node])),
        }

    @classmethod
    def from_dict(cls, tree: dict[str, Any]) -> "TreeStructure":
        builder = _NodeArrays()
        pending = [(builder.add(), tree)]
        while pending:
            node, entry = pending.pop()
            if "leaf" in entry:
                builder.value[node] = float(entry["leaf"])
                continue
            left, right = builder.add(), builder.add()
            builder.split(node, int(entry["feature"]), float(entry["threshold"]), left, right)
            pending.append((right, entry["right"]))
            pending.append((left, entry["left"]))
        return builder.freeze()


class _NodeArrays:
    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add(self) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(0.0)
        return len(self.feature) - 1

    def split(self, node: int, feature: int, threshold: float, left: int, right: int) -> None:
        self.feature[node] = feature
        self.threshold[node] = threshold
        self.left[node] = left
        self.right[node] = right

    def freeze(self) -> TreeStructure:
        arrays = {
            "feature": np.array(self.feature, dtype=np.int64),
            "threshold": np.array(self.threshold, dtype=float),
            "left": np.array(self.left, dtype=np.int64),
            "right": np.array(self.right, dtype=np.int64),
            "value": np.array(self.value, dtype=float),
        }
        for arr in arrays.values():
            arr.setflags(write=False)
        return TreeStructure(**arrays)


class SquaredErrorCriterion:
    """Split on the largest drop in sum of squared errors; leaves predict the mean.

    A node also stops when its coefficient of variation (population standard
    deviation over |mean|) falls below ``cv_threshold``.
    """

    def __init__(self, y: np.ndarray, cv_threshold: float):
        self.y = y
        self.cv_threshold = cv_threshold

    def leaf_value(self, rows: np.ndarray) -> float:
        return float(np.mean(self.y[rows]))

    def is_terminal(self, rows: np.ndarray) -> bool:
        y = self.y[rows]
        if np.ptp(y) == 0:
            return True
        mean = float(np.mean(y))
        return mean != 0 and float(np.std(y)) / abs(mean) < self.cv_threshold

    def split_gains(self, rows: np.ndarray, order: np.ndarray, positions: np.ndarray) -> np.ndarray:
        y = self.y[rows]
        centered = (y - np.mean(y))[order]
        sums = np.cumsum(centered)
        squares = np.cumsum(centered * centered)
        n = centered.shape[0]
        left_n = positions.astype(float)
        right_n = n - left_n
        left_sum, left_sq = sums[positions - 1], squares[positions - 1]
        right_sum, right_sq = sums[-1] - left_sum, squares[-1] - left_sq
        parent = squares[-1] - sums[-1] ** 2 / n
        children = (left_sq - left_sum**2 / left_n) + (right_sq - right_sum**2 / right_n)
        return parent - children


class GradientCriterion:
    """Second-order boosting objective with L2 leaf penalty ``reg_lambda`` and split cost ``gamma``."""

    def __init__(self, grad: np.ndarray, hess: np.ndarray, reg_lambda: float, gamma: float):
        self.grad = grad
        self.hess = hess
        self.reg_lambda = reg_lambda
        self.gamma = gamma

    def leaf_value(self, rows: np.ndarray) -> float:
        return float(-np.sum(self.grad[rows]) / (np.sum(self.hess[rows]) + self.reg_lambda))

    def is_terminal(self, rows: np.ndarray) -> bool:
        return bool(np.ptp(self.grad[rows]) == 0)

    def split_gains(self, rows: np.ndarray, order: np.ndarray, positions: np.ndarray) -> np.ndarray:
        g = np.cumsum(self.grad[rows][order])
        h = np.cumsum(self.hess[rows][order])
        lam = self.reg_lambda
        g_left, h_left = g[positions - 1], h[positions - 1]
        g_right, h_right = g[-1] - g_left, h[-1] - h_left
        score = g_left**2 / (h_left + lam) + g_right**2 / (h_right + lam) - g[-1] ** 2 / (h[-1] + lam)
        return 0.5 * score - self.gamma


def best_split(
    X: np.ndarray,
    rows: np.ndarray,
    features: np.ndarray,
    criterion,
    min_samples_leaf: int,
) -> Optional[tuple[int, float, float]]:
    """Best ``(feature, threshold, gain)`` over ``features``, or None if no split gains.

    Thresholds are midpoints between consecutive distinct values. Ties keep
    the lowest feature index, then the lowest threshold.
    """
    n = rows.shape[0]
    positions = np.arange(min_samples_leaf, n - min_samples_leaf + 1)
    if positions.size == 0:
        return None
    best: Optional[tuple[int, float, float]] = None
    for f in features:
        values = X[rows, f]
        order = np.argsort(values, kind="stable")
        ordered = values[order]
        distinct = ordered[positions - 1] < ordered[positions]
        if not np.any(distinct):
            continue
        gains = np.where(distinct, criterion.split_gains(rows, order, positions), -np.inf)
        k = int(np.argmax(gains))
        if gains[k] > 0 and (best is None or gains[k] > best[2]):
            p = positions[k]
            threshold = float((ordered[p - 1] + ordered[p]) / 2.0)
            # midpoint of adjacent floats can round up onto the right value
            if threshold >= ordered[p]:
                threshold = float(ordered[p - 1])
            best = (int(f), threshold, float(gains[k]))
    return best


def grow_tree(
    X: np.ndarray,
    rows: np.ndarray,
    criterion,
    max_depth: Optional[int],
    min_samples_leaf: int,
    features_per_split: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> TreeStructure:
    """Grow one tree depth first over the training ``rows`` of ``X``.

    With ``features_per_split`` below the column count, each node draws that
    many candidate features from ``rng`` without replacement.
    """
    n_features = X.shape[1]
    sample_features = features_per_split is not None and features_per_split < n_features
    all_features = np.arange(n_features)

    nodes = _NodeArrays()
    stack = [(nodes.add(), np.asarray(rows, dtype=np.int64), 0)]
    while stack:
        node, idx, depth = stack.pop()
        nodes.value[node] = criterion.leaf_value(idx)
        if max_depth is not None and depth >= max_depth:
            continue
        if idx.shape[0] < 2 * min_samples_leaf or criterion.is_terminal(idx):
            continue
        if sample_features:
            features = np.sort(rng.choice(n_features, size=features_per_split, replace=False))
        else:
            features = all_features
        split = best_split(X, idx, features, criterion, min_samples_leaf)
        if split is None:
            continue
        feature, threshold, _ = split
        goes_left = X[idx, feature] <= threshold
        left, right = nodes.add(), nodes.add()
        nodes.split(node, feature, threshold, left, right)
        stack.append((right, idx[~goes_left], depth + 1))
        stack.append((left, idx[goes_left], depth + 1))
    return nodes.freeze()


class DecisionTree(Regressor):
    kind = ModelFamily.TREE

    def __init__(self, structure: TreeStructure, params: TreeParams, n_features: int):
        self.structure = structure
        self.params = params
        self._n_features = n_features

    @property
    def n_features(self) -> int:
        return self._n_features

    def _predict(self, X: np.ndarray) -> np.ndarray:
        return self.structure.predict(X)

    def params_dict(self) -> dict[str, Any]:
        return self.params.model_dump()

    def to_payload(self) -> dict[str, Any]:
        return {"n_features": self._n_features, "tree": self.structure.to_dict()}

    @classmethod
    def from_payload(cls, params: TreeParams, payload: dict[str, Any]) -> "DecisionTree":
        return cls(TreeStructure.from_dict(payload["tree"]), params, int(payload["n_features"]))

    def components(self) -> list[Component]:
        return [self.structure.component(1.0)]


def fit_tree(train: Dataset, params: Optional[TreeParams | dict[str, Any]] = None) -> DecisionTree:
    """Fit a CART regression tree with the coefficient-of-variation stopping rule.

    Raises:
        DatasetError: the training set is empty.
        ParameterError: invalid hyperparameters.
    """
    params = parse_params(ModelFamily.TREE, params)
    if train.n_rows == 0:
        raise DatasetError("cannot fit a tree on an empty training set")
    structure = grow_tree(
        train.rows,
        np.arange(train.n_rows),
        SquaredErrorCriterion(train.target, params.cv_threshold),
        params.max_depth,
        params.min_samples_leaf,
    )
    logger.debug(f"Grew tree with {structure.n_leaves} leaves, depth {structure.depth()}")
    return DecisionTree(structure, params, train.n_features)
