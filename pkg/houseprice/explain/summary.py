import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from houseprice.dataset.utils import format_number
from houseprice.errors import LoadError, SchemaError
from houseprice.explain.shapley import exact_shap
from houseprice.models.interface import Regressor
from houseprice.types.types import Dataset, ShapExplanation, ShapSummary

logger = logging.getLogger(__name__)

SHAP_COLUMNS = ["bucket", "row", "feature", "value", "phi"]
SHAP_SUMMARY_COLUMNS = ["bucket", "rank", "feature", "mean_abs_phi"]


def rank_importance(summary: ShapSummary) -> list[str]:
    """Features by descending mean |phi|; ties alphabetical."""
    return sorted(summary.mean_abs, key=lambda name: (-summary.mean_abs[name], name))


def summarize(explanations: list[ShapExplanation], feature_names: list[str]) -> ShapSummary:
    phi = np.array([e.phi for e in explanations]).reshape(len(explanations), len(feature_names))
    values = np.array([e.row for e in explanations]).reshape(len(explanations), len(feature_names))
    summary = ShapSummary(
        feature_names=list(feature_names),
        pairs={
            name: [(float(values[i, j]), float(phi[i, j])) for i in range(len(explanations))]
            for j, name in enumerate(feature_names)
        },
        mean_abs={
            name: float(np.mean(np.abs(phi[:, j]))) if explanations else 0.0
            for j, name in enumerate(feature_names)
        },
    )
    return summary.model_copy(update={"ranking": rank_importance(summary)})


def shap_summary(
    model: Regressor,
    rows: Dataset,
    background: Dataset,
    max_rows: Optional[int] = None,
    n_jobs: int = 1,
) -> ShapSummary:
    """Explain each row (the first ``max_rows`` when given) and rank features by mean |phi|.

    Per-feature pairs keep the raw feature value next to its attribution.
    """
    count = rows.n_rows if max_rows is None else min(rows.n_rows, max_rows)
    logger.info(f"Explaining {count} row(s) against {background.n_rows} background row(s)")
    explanations = Parallel(n_jobs=n_jobs)(
        delayed(exact_shap)(model, rows.rows[i], background) for i in range(count)
    )
    summary = summarize(list(explanations), list(rows.feature_names))
    logger.info(f"Top features: {summary.ranking[:5]}")
    return summary


def _write(frame: pd.DataFrame, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise LoadError(f"cannot write {path}: {str(e)}")
    return path


def write_shap_csv(summaries: dict[str, ShapSummary], path: Union[str, Path]) -> Path:
    """One line per (bucket, explained row, feature) with the feature value and phi."""
    body = []
    for bucket, summary in summaries.items():
        n_rows = len(next(iter(summary.pairs.values()), []))
        for i in range(n_rows):
            for name in summary.feature_names:
                value, phi = summary.pairs[name][i]
                body.append([bucket, str(i), name, format_number(value), format_number(round(phi, 6))])
    logger.info(f"Writing {len(body)} attribution(s) to {path}")
    return _write(pd.DataFrame(body, columns=SHAP_COLUMNS, dtype=str), Path(path))


def write_shap_summary_csv(summaries: dict[str, ShapSummary], path: Union[str, Path]) -> Path:
    body = [
        [bucket, str(rank), name, format_number(round(summary.mean_abs[name], 6))]
        for bucket, summary in summaries.items()
        for rank, name in enumerate(summary.ranking, start=1)
    ]
    return _write(pd.DataFrame(body, columns=SHAP_SUMMARY_COLUMNS, dtype=str), Path(path))


def read_shap_csv(path: Union[str, Path]) -> dict[str, ShapSummary]:
    """Rebuild per-bucket summaries from a file written by ``write_shap_csv``.

    Raises:
        LoadError: unreadable file.
        SchemaError: a required column is missing or a cell is not numeric.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.EmptyDataError) as e:
        raise LoadError(f"cannot read attributions {path}: {str(e)}")
    for column in SHAP_COLUMNS:
        if column not in frame.columns:
            raise SchemaError(f"attribution file {path} is missing column '{column}'")

    summaries: dict[str, ShapSummary] = {}
    for bucket, group in frame.groupby("bucket", sort=False):
        names = list(dict.fromkeys(group["feature"]))
        pairs: dict[str, list[tuple[float, float]]] = {name: [] for name in names}
        try:
            for name, value, phi in zip(group["feature"], group["value"], group["phi"]):
                pairs[name].append((float(value), float(phi)))
        except ValueError as e:
            raise SchemaError(f"attribution file {path} has a non-numeric cell: {str(e)}")
        summary = ShapSummary(
            feature_names=names,
            pairs=pairs,
            mean_abs={name: float(np.mean([abs(p) for _, p in pairs[name]])) for name in names},
        )
        summaries[str(bucket)] = summary.model_copy(update={"ranking": rank_importance(summary)})
    return summaries
