"""Model families and their hyperparameter models."""
from enum import Enum
from typing import Any, Literal, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from houseprice.errors import ParameterError


class ModelFamily(str, Enum):
    LINEAR = "linear"
    SVR = "svr"
    TREE = "tree"
    FOREST = "forest"
    GBT = "gbt"

    @classmethod
    def parse(cls, name: Union[str, "ModelFamily"]) -> "ModelFamily":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(f.value for f in cls)
            raise ParameterError(f"unknown model family '{name}'; valid names: {valid}")


class HyperParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LinearParams(HyperParams):
    pass


class TreeParams(HyperParams):
    cv_threshold: float = Field(default=0.10, ge=0)
    max_depth: Optional[int] = Field(default=12, ge=0)  # None: unbounded
    min_samples_leaf: int = Field(default=5, ge=1)


class ForestParams(TreeParams):
    n_trees: int = Field(default=200, ge=1)
    features_per_split: Optional[int] = Field(default=None, ge=1)  # None: ceil(M / 3)
    bootstrap: bool = True
    n_jobs: int = 1


class GbtParams(HyperParams):
    n_rounds: int = Field(default=300, ge=0)
    learning_rate: float = Field(default=0.1, gt=0, le=1)
    reg_lambda: float = Field(default=1.0, ge=0)
    gamma: float = Field(default=0.0, ge=0)
    max_depth: Optional[int] = Field(default=6, ge=0)
    min_samples_leaf: int = Field(default=1, ge=1)
    subsample: float = Field(default=1.0, gt=0, le=1)


class SvrParams(HyperParams):
    kernel: Literal["linear", "rbf", "polynomial"] = "rbf"
    C: float = Field(default=1e5, gt=0)
    epsilon: float = Field(default=1e4, ge=0)
    gamma: Optional[float] = Field(default=None, gt=0)  # None: 1 / M
    degree: int = Field(default=3, ge=1)
    coef0: float = 1.0
    tol: float = Field(default=1e-3, gt=0)
    max_passes: int = Field(default=100, ge=1)


PARAMS_BY_FAMILY: dict[ModelFamily, type[HyperParams]] = {
    ModelFamily.LINEAR: LinearParams,
    ModelFamily.SVR: SvrParams,
    ModelFamily.TREE: TreeParams,
    ModelFamily.FOREST: ForestParams,
    ModelFamily.GBT: GbtParams,
}


def parse_params(
    family: Union[str, ModelFamily],
    params: Union[HyperParams, Mapping[str, Any], None] = None,
) -> HyperParams:
    """Validate a hyperparameter mapping for a family; unknown keys are rejected.

    Raises:
        ParameterError: unknown family, unknown key, or out-of-range value.
    """
    family = ModelFamily.parse(family)
    cls = PARAMS_BY_FAMILY[family]
    if params is None:
        return cls()
    if isinstance(params, HyperParams):
        if type(params) is not cls:
            raise ParameterError(f"{type(params).__name__} given for model family '{family.value}'")
        return params
    try:
        return cls(**dict(params))
    except ValidationError as e:
        raise ParameterError(f"invalid {family.value} hyperparameters: {str(e)}")
