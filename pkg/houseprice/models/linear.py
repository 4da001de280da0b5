import logging
from typing import Any

import numpy as np

from houseprice.errors import DatasetError
from houseprice.models.base_types import LinearParams, ModelFamily
from houseprice.models.interface import Component, Regressor
from houseprice.types.types import Dataset

logger = logging.getLogger(__name__)


class LinearModel(Regressor):
    kind = ModelFamily.LINEAR

    def __init__(self, coefficients: np.ndarray, intercept: float):
        self.coefficients = np.array(coefficients, dtype=float)
        self.coefficients.setflags(write=False)
        self.intercept = float(intercept)

    @property
    def n_features(self) -> int:
        return int(self.coefficients.shape[0])

    def _predict(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coefficients + self.intercept

    def params_dict(self) -> dict[str, Any]:
        return {}

    def to_payload(self) -> dict[str, Any]:
        return {"coefficients": self.coefficients.tolist(), "intercept": self.intercept}

    @classmethod
    def from_payload(cls, params: LinearParams, payload: dict[str, Any]) -> "LinearModel":
        return cls(np.array(payload["coefficients"], dtype=float), float(payload["intercept"]))

    def components(self) -> list[Component]:
        # one single-feature term per nonzero coefficient
        return [
            Component(weight=float(w), features=(j,), predict=lambda X, j=j: X[:, j])
            for j, w in enumerate(self.coefficients)
            if w != 0
        ]


def fit_linear(train: Dataset) -> LinearModel:
    """Ordinary least squares with an intercept.

    Columns are centered first so the minimum-norm least-squares solution
    (used when columns are collinear) applies to the slopes only.

    Raises:
        DatasetError: the training set is empty.
    """
    if train.n_rows == 0:
        raise DatasetError("cannot fit a linear model on an empty training set")
    x_mean = train.rows.mean(axis=0)
    y_mean = float(train.target.mean())
    coefficients, _, rank, _ = np.linalg.lstsq(train.rows - x_mean, train.target - y_mean, rcond=None)
    if rank < train.n_features:
        logger.warning(f"Design matrix has rank {rank} < {train.n_features}; using the minimum-norm solution")
    intercept = y_mean - float(x_mean @ coefficients)
    return LinearModel(coefficients, intercept)
