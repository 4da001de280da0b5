import logging
from pathlib import Path
from typing import Any, Optional, Union

from houseprice.errors import LoadError
from houseprice.preprocess.stats import price_trend
from houseprice.types.types import CorrMatrix, ShapSummary, StatsTable

logger = logging.getLogger(__name__)

TOP_CORRELATIONS = 5
TOP_FEATURES = 5


def _r2(value: Optional[float]) -> str:
    return "undefined" if value is None else f"{value:.4f}"


def render_summary(
    results: list[dict[str, Any]],
    corr: Optional[CorrMatrix] = None,
    shap: Optional[dict[str, ShapSummary]] = None,
    stats: Optional[StatsTable] = None,
) -> str:
    """Plain-text report: model performance, price trend, correlations, top attributions."""
    lines = ["Performance of models in dollars", ""]
    lines.append(f"{'model':<8}{'bucket':<10}{'RMSE':>14}{'MAE':>14}{'R-square':>11}")
    for row in results:
        metrics = row["metrics"]
        lines.append(
            f"{row['model']:<8}{row['bucket']:<10}{metrics.rmse:>14.2f}{metrics.mae:>14.2f}{_r2(metrics.r2):>11}"
        )

    if stats is not None:
        lines += ["", "Mean price by year"]
        for bucket in stats.buckets:
            lines.append(f"  {bucket.value:<8}{stats.mean(bucket, 'price'):>14.2f}  ({stats.row_counts.get(bucket, 0)} listings)")
        for before, after, change in price_trend(stats):
            lines.append(f"  {before.value} -> {after.value}: {change * 100:+.1f}%")

    if corr is not None and "price" in corr.names:
        lines += ["", "Strongest correlations with price"]
        for name, value in corr.price_ranking()[:TOP_CORRELATIONS]:
            lines.append(f"  {name:<20}{value:>8.3f}")

    if shap:
        lines += ["", "Most important features by mean |Shapley value|"]
        for bucket, summary in shap.items():
            top = ", ".join(f"{name} ({summary.mean_abs[name]:.0f})" for name in summary.ranking[:TOP_FEATURES])
            lines.append(f"  {bucket}: {top}")
    return "\n".join(lines) + "\n"


def write_summary(text: str, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise LoadError(f"cannot write {path}: {str(e)}")
    logger.info(f"Wrote report summary to {path}")
    return path
