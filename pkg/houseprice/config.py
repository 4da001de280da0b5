import logging
from pathlib import Path
from typing import Any, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from houseprice.errors import ConfigError
from houseprice.eval.evaluate import EvalConfig
from houseprice.eval.grid_search import load_grids
from houseprice.models.base_types import ModelFamily
from houseprice.types.types import YearBucket

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    """Settings shared by every command; loaded from ``--config`` YAML, then overridden by flags."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    out_dir: Path = Path("out")
    seed: int = 0
    test_fraction: float = Field(default=0.2, gt=0, lt=1)
    folds: int = Field(default=5, ge=2)
    grids_path: Optional[Path] = None
    rules_path: Optional[Path] = None
    background_size: int = Field(default=100, ge=1)
    explain_rows: Optional[int] = Field(default=50, ge=1)  # None: explain the whole test split
    buckets: list[YearBucket] = Field(default_factory=lambda: list(YearBucket))
    families: list[ModelFamily] = Field(default_factory=lambda: list(ModelFamily))
    n_jobs: int = 1

    def check_paths(self) -> None:
        """Fail before any work starts when a referenced file is missing."""
        for name in ("grids_path", "rules_path"):
            path = getattr(self, name)
            if path is not None and not path.is_file():
                raise ConfigError(f"{name} {path} does not exist or is not a file")

    def eval_config(self, families: Optional[list[ModelFamily]] = None) -> EvalConfig:
        return EvalConfig(
            families=families if families is not None else list(self.families),
            test_fraction=self.test_fraction,
            folds=self.folds,
            seed=self.seed,
            n_jobs=self.n_jobs,
            grids=load_grids(self.grids_path) if self.grids_path is not None else None,
        )

    def settings(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


def load_run_config(path: Optional[Union[str, Path]] = None, **overrides: Any) -> RunConfig:
    """Read a YAML run config (or start from defaults) and apply non-None overrides.

    Raises:
        ConfigError: unreadable file, bad YAML, unknown key, or invalid value.
    """
    values: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            loaded = yaml.safe_load(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {str(e)}")
        except yaml.YAMLError as e:
            raise ConfigError(f"config {path} is not valid YAML: {str(e)}")
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"config {path} must be a mapping")
        values.update(loaded or {})
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        config = RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"invalid run config: {str(e)}")
    logger.debug(f"Run config: {config.settings()}")
    return config
