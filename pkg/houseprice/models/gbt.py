import logging
from typing import Any, Iterator, Optional

import numpy as np

from houseprice.errors import DatasetError
from houseprice.models.base_types import GbtParams, ModelFamily, parse_params
from houseprice.models.interface import Component, Regressor
from houseprice.models.tree import GradientCriterion, TreeStructure, grow_tree
from houseprice.types.types import Dataset

logger = logging.getLogger(__name__)


class BoostedTrees(Regressor):
    """Gradient boosted trees on squared loss: ``base_score + learning_rate * sum(tree(x))``."""

    kind = ModelFamily.GBT

    def __init__(self, trees: list[TreeStructure], params: GbtParams, n_features: int, base_score: float):
        self.trees = list(trees)
        self.params = params
        self._n_features = n_features
        self.base_score = float(base_score)

    @property
    def n_features(self) -> int:
        return self._n_features

    def _predict(self, X: np.ndarray) -> np.ndarray:
        out = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            out = out + self.params.learning_rate * tree.predict(X)
        return out

    def staged_predict(self, X: np.ndarray) -> Iterator[np.ndarray]:
        """Predictions after each boosting round, starting from round 1."""
        X = self._check(X)
        out = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            out = out + self.params.learning_rate * tree.predict(X)
            yield out

    def params_dict(self) -> dict[str, Any]:
        return self.params.model_dump()

    def to_payload(self) -> dict[str, Any]:
        return {
            "n_features": self._n_features,
            "base_score": self.base_score,
            "trees": [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_payload(cls, params: GbtParams, payload: dict[str, Any]) -> "BoostedTrees":
        return cls(
            trees=[TreeStructure.from_dict(tree) for tree in payload["trees"]],
            params=params,
            n_features=int(payload["n_features"]),
            base_score=float(payload["base_score"]),
        )

    def components(self) -> list[Component]:
        rate = self.params.learning_rate
        return [tree.component(rate) for tree in self.trees]


def fit_gbt(
    train: Dataset,
    params: Optional[GbtParams | dict[str, Any]] = None,
    seed: int = 0,
) -> BoostedTrees:
    """Fit gradient boosted trees on squared loss.

    Each round fits a tree to the current gradients (prediction minus price,
    unit hessians) with the regularized gain and leaf weight
    ``-G / (H + reg_lambda)``. ``seed`` only matters when ``subsample < 1``.

    Raises:
        DatasetError: the training set is empty.
        ParameterError: invalid hyperparameters.
    """
    params = parse_params(ModelFamily.GBT, params)
    if train.n_rows == 0:
        raise DatasetError("cannot fit boosted trees on an empty training set")

    X, y = train.rows, train.target
    n = train.n_rows
    base_score = float(np.mean(y))
    prediction = np.full(n, base_score)
    hess = np.ones(n)
    rng = np.random.default_rng(seed)
    sample_size = max(1, int(round(params.subsample * n)))

    trees = []
    for round_index in range(params.n_rounds):
        grad = prediction - y
        if sample_size < n:
            rows = np.sort(rng.choice(n, size=sample_size, replace=False))
        else:
            rows = np.arange(n)
        tree = grow_tree(
            X,
            rows,
            GradientCriterion(grad, hess, params.reg_lambda, params.gamma),
            params.max_depth,
            params.min_samples_leaf,
        )
        prediction = prediction + params.learning_rate * tree.predict(X)
        trees.append(tree)
        if (round_index + 1) % 50 == 0:
            rmse = float(np.sqrt(np.mean((prediction - y) ** 2)))
            logger.debug(f"Round {round_index + 1}: training RMSE {rmse:.2f}")
    return BoostedTrees(trees, params, train.n_features, base_score)
