from typing import Any, Mapping, Optional, Union

from houseprice.models.base_types import HyperParams, ModelFamily, parse_params
from houseprice.models.forest import RandomForest, fit_forest
from houseprice.models.gbt import BoostedTrees, fit_gbt
from houseprice.models.interface import Regressor
from houseprice.models.linear import LinearModel, fit_linear
from houseprice.models.svr import SvrModel, fit_svr
from houseprice.models.tree import DecisionTree, fit_tree
from houseprice.types.types import Dataset

MODEL_CLASSES: dict[ModelFamily, type[Regressor]] = {
    ModelFamily.LINEAR: LinearModel,
    ModelFamily.SVR: SvrModel,
    ModelFamily.TREE: DecisionTree,
    ModelFamily.FOREST: RandomForest,
    ModelFamily.GBT: BoostedTrees,
}


def fit_model(
    family: Union[str, ModelFamily],
    train: Dataset,
    params: Union[HyperParams, Mapping[str, Any], None] = None,
    seed: int = 0,
) -> Regressor:
    """Fit one model family.

    Args:
        family: "linear", "svr", "tree", "forest" or "gbt".
        train: Training dataset.
        params: Hyperparameters for the family; defaults when None.
        seed: Seed for the randomized families (forest, subsampled gbt).

    Returns:
        The fitted Regressor.

    Raises:
        ParameterError: Unknown family or invalid hyperparameters.
        DatasetError: Empty training set.
    """
    family = ModelFamily.parse(family)
    params = parse_params(family, params)
    if family == ModelFamily.LINEAR:
        return fit_linear(train)
    elif family == ModelFamily.SVR:
        return fit_svr(train, params)
    elif family == ModelFamily.TREE:
        return fit_tree(train, params)
    elif family == ModelFamily.FOREST:
        return fit_forest(train, params, seed=seed)
    else:
        return fit_gbt(train, params, seed=seed)


def predict(model: Regressor, row: Any) -> float:
    return model.predict(row)


def model_class(kind: Union[str, ModelFamily]) -> Optional[type[Regressor]]:
    try:
        return MODEL_CLASSES[ModelFamily(kind)]
    except ValueError:
        return None
