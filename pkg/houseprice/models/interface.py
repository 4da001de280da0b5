from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, ClassVar, Optional

import numpy as np

from houseprice.errors import DatasetError
from houseprice.models.base_types import HyperParams, ModelFamily


@dataclass(frozen=True)
class Component:
    """One additive piece of a model: ``f(x) = const + sum(weight * predict(x))``.

    ``features`` lists every column the piece can read; columns outside it
    never change its output.
    """

    weight: float
    features: tuple[int, ...]
    predict: Callable[[np.ndarray], np.ndarray]
    # (x, background_row) -> columns whose swap can change the output; None: every differing column
    players: Optional[Callable[[np.ndarray, np.ndarray], tuple[int, ...]]] = None


class Regressor(ABC):
    """Abstract base class for the fitted price regressors.

    Every fitted model (linear, SVR, tree, forest, boosted ensemble) honours
    the same contract so evaluation, persistence and explanation never need
    to know which family they are handling.

    Fitted models are immutable: nothing mutates them after construction, so
    one instance may serve predictions from several threads at once.

    Methods:
        predict_batch: Predict prices for a matrix of feature rows.
        predict: Predict the price of one feature row.
        params_dict: Hyperparameters the model was fitted with.
        to_payload: JSON-ready description of the fitted state.
        from_payload: Rebuild a model from ``params_dict`` and ``to_payload``.
        components: Additive decomposition used for exact attribution.

    Example:
        >>> model = fit_model(ModelFamily.TREE, train)
        >>> prices = model.predict_batch(test.rows)
        >>> single = model.predict(test.rows[0])
    """

    kind: ClassVar[ModelFamily]

    @property
    @abstractmethod
    def n_features(self) -> int:
        """Number of feature columns the model was trained on."""
        pass

    @abstractmethod
    def _predict(self, X: np.ndarray) -> np.ndarray:
        pass

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        """Predict prices (USD) for every row of ``X``.

        Args:
            X: (n, n_features) array of feature rows.

        Returns:
            A length-n float array of finite predictions.

        Raises:
            DatasetError: ``X`` does not have ``n_features`` columns.
        """
        return self._predict(self._check(X))

    def predict(self, row: Any) -> float:
        """Predict the price of one feature row.

        Raises:
            DatasetError: the row length differs from ``n_features``.
        """
        arr = np.asarray(row, dtype=float)
        if arr.ndim != 1:
            raise DatasetError(f"expected one feature row, got shape {arr.shape}")
        return float(self.predict_batch(arr.reshape(1, -1))[0])

    def _check(self, X: Any) -> np.ndarray:
        arr = np.asarray(X, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != self.n_features:
            raise DatasetError(
                f"{self.kind.value} model expects {self.n_features} feature(s), got array of shape {arr.shape}"
            )
        return arr

    @abstractmethod
    def params_dict(self) -> dict[str, Any]:
        """Hyperparameters used at fit time, as plain JSON values."""
        pass

    @abstractmethod
    def to_payload(self) -> dict[str, Any]:
        """Fitted state as plain JSON values.

        Floats are emitted as Python floats so a JSON round trip reproduces
        them bit for bit.
        """
        pass

    @classmethod
    @abstractmethod
    def from_payload(cls, params: HyperParams, payload: dict[str, Any]) -> "Regressor":
        """Rebuild a fitted model from its persisted form.

        Raises:
            KeyError, TypeError, ValueError: the payload is incomplete or malformed.
        """
        pass

    def components(self) -> list[Component]:
        """Additive decomposition of the prediction, constant term excluded.

        The default treats the whole model as one piece reading every column;
        families with exploitable structure (linear terms, tree ensembles)
        override it.
        """
        return [Component(weight=1.0, features=tuple(range(self.n_features)), predict=self.predict_batch)]
