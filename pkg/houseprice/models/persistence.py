"""Single-document JSON persistence for fitted models.

Envelope: ``{"schema_version": 1, "model_kind": ..., "params": ..., "payload": ...}``
with trees nested as ``{feature, threshold, left, right}`` / ``{leaf}``.
The envelope is checked against ``model.schema.json``.
"""
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Union

import jsonschema

from houseprice.errors import LoadError, ModelLoadError, ParameterError
from houseprice.models.base_types import parse_params
from houseprice.models.factory import model_class
from houseprice.models.interface import Regressor

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SCHEMA_PATH = Path(__file__).with_name("model.schema.json")


@lru_cache(maxsize=1)
def _schema() -> dict[str, Any]:
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))


def model_document(model: Regressor) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "model_kind": model.kind.value,
        "params": model.params_dict(),
        "payload": model.to_payload(),
    }


def save_model(model: Regressor, path: Union[str, Path]) -> Path:
    path = Path(path)
    text = json.dumps(model_document(model), sort_keys=True, indent=1) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise LoadError(f"cannot write model {path}: {str(e)}")
    logger.info(f"Saved {model.kind.value} model to {path}")
    return path


def load_model(path: Union[str, Path]) -> Regressor:
    """Read a model written by ``save_model``.

    Raises:
        LoadError: the file cannot be read.
        ModelLoadError: truncated or malformed JSON, schema-version mismatch,
            unknown model kind, or a payload that does not rebuild.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise LoadError(f"cannot read model {path}: {str(e)}")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelLoadError(f"{path} is truncated or not valid JSON: {str(e)}")

    if isinstance(document, dict) and document.get("schema_version") not in (None, SCHEMA_VERSION):
        raise ModelLoadError(
            f"{path} has schema_version {document.get('schema_version')!r}, expected {SCHEMA_VERSION}"
        )
    try:
        jsonschema.validate(document, _schema())
    except jsonschema.ValidationError as e:
        raise ModelLoadError(f"{path} is not a valid model document: {e.message}")

    kind = document["model_kind"]
    cls = model_class(kind)
    if cls is None:
        raise ModelLoadError(f"{path} has unknown model kind '{kind}'")
    try:
        params = parse_params(cls.kind, document["params"])
        model = cls.from_payload(params, document["payload"])
    except ParameterError as e:
        raise ModelLoadError(f"{path} has invalid params: {str(e)}")
    except (KeyError, TypeError, ValueError) as e:
        raise ModelLoadError(f"{path} has a malformed {kind} payload: {str(e)}")
    logger.info(f"Loaded {kind} model from {path}")
    return model
