"""Exact Shapley attributions under an interventional background.

The value of a coalition S for row x is the mean, over background rows b,
of the model evaluated on x's values for S and b's values elsewhere. That
value is linear in the model and in the background, so the attribution
splits exactly into one small game per (additive component, background
row). Within such a game every column the component cannot feel is a null
player and is dropped before the full coalition lattice is enumerated.
"""
import logging
import math
from functools import lru_cache
from typing import Any, Callable

import numpy as np

from houseprice.errors import DatasetError, EnumerationError
from houseprice.models.interface import Component, Regressor
from houseprice.types.types import Dataset, ShapExplanation

logger = logging.getLogger(__name__)

MAX_FEATURES = 25
CHUNK_ROWS = 1 << 15
DEFAULT_BACKGROUND_SIZE = 100


def sample_background(train: Dataset, size: int = DEFAULT_BACKGROUND_SIZE, seed: int = 0) -> Dataset:
    """Seeded draw of ``size`` training rows without replacement, in original order."""
    if train.n_rows == 0:
        raise DatasetError("cannot draw a background from an empty dataset")
    if size >= train.n_rows:
        return train
    picked = np.random.default_rng(seed).choice(train.n_rows, size=size, replace=False)
    return train.subset(np.sort(picked))


@lru_cache(maxsize=None)
def shapley_weights(k: int) -> np.ndarray:
    """``s! (k - s - 1)! / k!`` for coalition sizes s = 0 .. k-1."""
    total = math.factorial(k)
    weights = np.array([math.factorial(s) * math.factorial(k - s - 1) / total for s in range(k)])
    weights.setflags(write=False)
    return weights


def coalition_values(
    predict: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    background: np.ndarray,
    players: np.ndarray,
) -> np.ndarray:
    """Output for every subset of ``players`` taken from ``x``, the rest from ``background``.

    Entry ``m`` holds the subset whose bit i is set in ``m`` for ``players[i]``.
    """
    k = players.shape[0]
    size = 1 << k
    values = np.empty(size)
    shifts = np.arange(k)
    for start in range(0, size, CHUNK_ROWS):
        masks = np.arange(start, min(size, start + CHUNK_ROWS))
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        rows = np.tile(background, (masks.shape[0], 1))
        rows[:, players] = np.where(bits, x[players], background[players])
        values[start : start + masks.shape[0]] = predict(rows)
    return values


def game_attribution(values: np.ndarray, k: int) -> np.ndarray:
    """Shapley values of a k-player game given every coalition value."""
    masks = np.arange(1 << k)
    sizes = np.bitwise_count(masks)
    weights = shapley_weights(k)
    phi = np.empty(k)
    for i in range(k):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        phi[i] = np.sum(weights[sizes[without]] * (values[without | bit] - values[without]))
    return phi


def _players(component: Component, x: np.ndarray, b: np.ndarray) -> np.ndarray:
    if component.players is not None:
        candidates = component.players(x, b)
    else:
        candidates = component.features
    return np.array([j for j in candidates if x[j] != b[j]], dtype=np.int64)


def exact_shap(model: Regressor, row: Any, background: Dataset) -> ShapExplanation:
    """Exact interventional Shapley values of ``model`` at ``row``.

    ``base_value`` is the mean background prediction and
    ``base_value + sum(phi)`` equals the prediction up to rounding.

    Raises:
        EnumerationError: more than 25 features.
        DatasetError: empty background or a row of the wrong length.
    """
    n_features = model.n_features
    if n_features > MAX_FEATURES:
        raise EnumerationError(f"exact enumeration supports at most {MAX_FEATURES} features, model has {n_features}")
    if background.n_rows == 0:
        raise DatasetError("background must contain at least one row")
    x = np.asarray(row, dtype=float)
    if x.shape != (n_features,):
        raise DatasetError(f"expected a row of {n_features} feature(s), got shape {x.shape}")

    components = model.components()
    phi = np.zeros(n_features)
    largest = 0
    for b in background.rows:
        for component in components:
            players = _players(component, x, b)
            if players.shape[0] == 0:
                continue
            largest = max(largest, players.shape[0])
            values = coalition_values(component.predict, x, b, players)
            phi[players] += component.weight * game_attribution(values, players.shape[0])
    phi /= background.n_rows
    logger.debug(f"Explained row over {len(components)} component(s); largest game had {largest} player(s)")

    return ShapExplanation(
        feature_names=list(background.feature_names),
        phi=phi,
        base_value=float(np.mean(model.predict_batch(background.rows))),
        prediction=model.predict(x),
        row=x,
    )
