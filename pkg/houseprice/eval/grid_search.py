import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np
import yaml
from joblib import Parallel, delayed

from houseprice.errors import ConfigError, DatasetError, ParameterError
from houseprice.eval.metrics import metric_set
from houseprice.models.base_types import HyperParams, ModelFamily, parse_params
from houseprice.models.factory import fit_model
from houseprice.types.types import Dataset

logger = logging.getLogger(__name__)

DEFAULT_GRIDS_PATH = Path(__file__).with_name("grids.yaml")

Grid = Sequence[Union[HyperParams, Mapping[str, Any]]]


def load_grids(path: Optional[Union[str, Path]] = None) -> dict[ModelFamily, list[HyperParams]]:
    """Read a tuning-grid file: ``family -> [hyperparameter mapping, ...]``.

    Raises:
        ConfigError: unreadable file, bad YAML, unknown family, or invalid candidate.
    """
    path = Path(path) if path is not None else DEFAULT_GRIDS_PATH
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read grids file {path}: {str(e)}")
    except yaml.YAMLError as e:
        raise ConfigError(f"grids file {path} is not valid YAML: {str(e)}")
    if not isinstance(raw, dict):
        raise ConfigError(f"grids file {path} must map model families to candidate lists")

    grids: dict[ModelFamily, list[HyperParams]] = {}
    for name, candidates in raw.items():
        try:
            family = ModelFamily.parse(name)
            if not isinstance(candidates, list) or not candidates:
                raise ParameterError(f"grid for '{name}' must be a non-empty list")
            grids[family] = [parse_params(family, candidate or {}) for candidate in candidates]
        except ParameterError as e:
            raise ConfigError(f"grids file {path}: {str(e)}")
    return grids


@lru_cache(maxsize=1)
def default_grids() -> dict[ModelFamily, list[HyperParams]]:
    return load_grids(DEFAULT_GRIDS_PATH)


def fold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded k-fold assignment: a permutation cut into ``folds`` near-equal parts.

    Raises:
        DatasetError: some fold would be empty.
    """
    if folds < 2:
        raise ParameterError(f"cross-validation needs at least 2 folds, got {folds}")
    if n < folds:
        raise DatasetError(f"{n} training row(s) is too few for {folds}-fold cross-validation")
    order = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(order, folds)]


def cross_val_rmse(
    family: ModelFamily,
    params: HyperParams,
    train: Dataset,
    folds: list[np.ndarray],
    seed: int,
) -> float:
    """Mean held-out-fold RMSE of one candidate."""
    scores = []
    all_rows = np.arange(train.n_rows)
    for held_out in folds:
        fit_rows = np.setdiff1d(all_rows, held_out, assume_unique=True)
        model = fit_model(family, train.subset(fit_rows), params, seed=seed)
        fold = train.subset(held_out)
        scores.append(metric_set(model.predict_batch(fold.rows), fold.target).rmse)
    return float(np.mean(scores))


def grid_search(
    family: Union[str, ModelFamily],
    grid: Grid,
    train: Dataset,
    seed: int = 0,
    folds: int = 5,
    n_jobs: int = 1,
) -> tuple[HyperParams, float]:
    """Pick the candidate with the lowest mean k-fold RMSE on ``train``.

    Only the training split is passed in, so held-out test rows never take
    part in tuning. Ties keep the earliest candidate in grid order.

    Returns:
        (best hyperparameters, their mean cross-validated RMSE)

    Raises:
        ParameterError: empty grid or invalid candidate.
        DatasetError: too few rows for the fold count.
    """
    family = ModelFamily.parse(family)
    if not grid:
        raise ParameterError(f"empty tuning grid for '{family.value}'")
    candidates = [parse_params(family, candidate) for candidate in grid]
    fold_rows = fold_indices(train.n_rows, folds, seed)

    if len(candidates) == 1:
        scores = [cross_val_rmse(family, candidates[0], train, fold_rows, seed)]
    else:
        scores = Parallel(n_jobs=n_jobs)(
            delayed(cross_val_rmse)(family, candidate, train, fold_rows, seed) for candidate in candidates
        )

    best = 0
    for index, score in enumerate(scores):
        logger.debug(f"{family.value} candidate {index} {candidates[index].model_dump()}: CV RMSE {score:.2f}")
        if score < scores[best]:
            best = index
    logger.info(f"Best {family.value} candidate {best} of {len(candidates)}: CV RMSE {scores[best]:.2f}")
    return candidates[best], float(scores[best])

