import logging
import math
from typing import Any, Optional

import numpy as np
from joblib import Parallel, delayed

from houseprice.errors import DatasetError, ParameterError
from houseprice.models.base_types import ForestParams, ModelFamily, parse_params
from houseprice.models.interface import Component, Regressor
from houseprice.models.tree import SquaredErrorCriterion, TreeStructure, grow_tree
from houseprice.types.types import Dataset

logger = logging.getLogger(__name__)


def resolve_features_per_split(params: ForestParams, n_features: int) -> int:
    k = params.features_per_split if params.features_per_split is not None else math.ceil(n_features / 3)
    if k > n_features:
        raise ParameterError(f"features_per_split={k} exceeds the {n_features} available feature(s)")
    return max(k, 1)


def _grow_member(X: np.ndarray, y: np.ndarray, tree_seed: int, params: ForestParams, k: int) -> TreeStructure:
    rng = np.random.default_rng(tree_seed)
    n = X.shape[0]
    rows = np.sort(rng.integers(0, n, size=n)) if params.bootstrap else np.arange(n)
    return grow_tree(
        X,
        rows,
        SquaredErrorCriterion(y, params.cv_threshold),
        params.max_depth,
        params.min_samples_leaf,
        features_per_split=k,
        rng=rng,
    )


class RandomForest(Regressor):
    """Bagged CART trees; the prediction is the unweighted mean over trees."""

    kind = ModelFamily.FOREST

    def __init__(
        self,
        trees: list[TreeStructure],
        params: ForestParams,
        n_features: int,
        features_per_split: int,
        seed: int,
        tree_seeds: list[int],
    ):
        self.trees = list(trees)
        self.params = params
        self._n_features = n_features
        self.features_per_split = features_per_split
        self.seed = seed
        self.tree_seeds = list(tree_seeds)

    @property
    def n_features(self) -> int:
        return self._n_features

    def _predict(self, X: np.ndarray) -> np.ndarray:
        return np.mean([tree.predict(X) for tree in self.trees], axis=0)

    def params_dict(self) -> dict[str, Any]:
        return self.params.model_dump()

    def to_payload(self) -> dict[str, Any]:
        return {
            "n_features": self._n_features,
            "features_per_split": self.features_per_split,
            "seed": self.seed,
            "tree_seeds": self.tree_seeds,
            "trees": [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_payload(cls, params: ForestParams, payload: dict[str, Any]) -> "RandomForest":
        return cls(
            trees=[TreeStructure.from_dict(tree) for tree in payload["trees"]],
            params=params,
            n_features=int(payload["n_features"]),
            features_per_split=int(payload["features_per_split"]),
            seed=int(payload["seed"]),
            tree_seeds=[int(s) for s in payload["tree_seeds"]],
        )

    def components(self) -> list[Component]:
        weight = 1.0 / len(self.trees)
        return [tree.component(weight) for tree in self.trees]


def fit_forest(
    train: Dataset,
    params: Optional[ForestParams | dict[str, Any]] = None,
    seed: int = 0,
) -> RandomForest:
    """Fit a random forest of bootstrapped CART trees.

    Each tree gets its own seed drawn from ``seed``, so the fitted forest is
    the same for any ``n_jobs``. With ``features_per_split`` equal to the
    feature count and bootstrap off, every tree equals ``fit_tree`` on the
    same data and parameters.

    Raises:
        DatasetError: the training set is empty.
        ParameterError: invalid hyperparameters.
    """
    params = parse_params(ModelFamily.FOREST, params)
    if train.n_rows == 0:
        raise DatasetError("cannot fit a forest on an empty training set")
    k = resolve_features_per_split(params, train.n_features)
    tree_seeds = np.random.default_rng(seed).integers(0, 2**63 - 1, size=params.n_trees, dtype=np.int64).tolist()

    logger.info(f"Growing {params.n_trees} tree(s) with {k} candidate feature(s) per split, n_jobs={params.n_jobs}")
    trees = Parallel(n_jobs=params.n_jobs)(
        delayed(_grow_member)(train.rows, train.target, tree_seed, params, k) for tree_seed in tree_seeds
    )
    return RandomForest(trees, params, train.n_features, k, seed, tree_seeds)
