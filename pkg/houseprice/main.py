import functools
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import Any, Callable, Optional

import click

from houseprice.artifacts import keys
from houseprice.artifacts.manifest import build_manifest, write_json, write_manifest
from houseprice.config import RunConfig, load_run_config
from houseprice.errors import HousePriceError
from houseprice.eval.evaluate import read_results_csv, run_evaluation, write_results_csv
from houseprice.explain.shapley import sample_background
from houseprice.explain.summary import read_shap_csv, shap_summary, write_shap_csv, write_shap_summary_csv
from houseprice.listing_parser.parser import export_csv, load_rules, parse_directory
from houseprice.models.base_types import ModelFamily
from houseprice.models.persistence import save_model
from houseprice.preprocess.build import build_dataset, write_dataset_csv
from houseprice.preprocess.pipeline import prepare_buckets
from houseprice.preprocess.stats import (
    correlation_matrix,
    read_corr_csv,
    read_stats_csv,
    summary_stats,
    write_corr_csv,
    write_stats_csv,
)
from houseprice.report.plots import render_beeswarm, render_heatmap
from houseprice.report.summary import render_summary, write_summary

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool = False) -> None:
    # Configure logging to stdout
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler(sys.stdout)],
        force=True,
    )


def error_line(error: HousePriceError) -> str:
    message = str(error).replace("\\", "\\\\").replace('"', '\\"').replace("\n", " ")
    return f'error={error.code} message="{message}"'


def command(func: Callable) -> Callable:
    """Banner the command and turn library errors into one error line plus exit status 1."""

    @functools.wraps(func)
    @click.pass_context
    def wrapper(ctx: click.Context, *args: Any, **kwargs: Any) -> None:
        logger.info("=" * 60)
        logger.info(f"Command {ctx.info_name} started")
        try:
            config: RunConfig = ctx.obj
            config.check_paths()
            func(config, *args, **kwargs)
        except HousePriceError as e:
            logger.error(f"Command {ctx.info_name} failed: {str(e)}", exc_info=True)
            click.echo(error_line(e), err=True)
            ctx.exit(1)
        logger.info(f"Command {ctx.info_name} finished")
        logger.info("=" * 60)

    return wrapper


def _finish(config: RunConfig, name: str, inputs: list[Path], outputs: list[Path], extra: Optional[dict] = None) -> None:
    settings = config.settings()
    settings.update(extra or {})
    write_manifest(config.out_dir, build_manifest(name, config.seed, inputs, outputs, settings))


@click.group()
@click.option("--seed", type=int, default=None, help="Seed for splits, folds, forests and backgrounds.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None, help="Output directory.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), default=None, help="YAML run config.")
@click.option("--verbose", is_flag=True, help="Log at DEBUG level.")
@click.pass_context
def cli(ctx: click.Context, seed: Optional[int], out_dir: Optional[Path], config_path: Optional[Path], verbose: bool) -> None:
    """House-price pipeline: parse, clean, stats, train, evaluate, explain, report."""
    configure_logging(verbose)
    try:
        ctx.obj = load_run_config(config_path, seed=seed, out_dir=out_dir)
    except HousePriceError as e:
        logger.error(f"Configuration failed: {str(e)}", exc_info=True)
        click.echo(error_line(e), err=True)
        ctx.exit(1)


@cli.command("parse")
@click.argument("html_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--rules", "rules_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--output", "output_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@command
def parse_cmd(config: RunConfig, html_dir: Path, rules_path: Optional[Path], output_path: Optional[Path]) -> None:
    """Extract listings from saved HTML pages into the listings CSV."""
    rules_path = rules_path or config.rules_path
    rules = load_rules(rules_path)
    result = parse_directory(html_dir, rules)
    if not result.pages:
        logger.warning(f"No listing pages found in {html_dir}; writing a header-only CSV")

    csv_path = export_csv(result.pages, output_path or config.out_dir / keys.PARSED_LISTINGS_FILE)
    missing = Counter(field for page in result.pages for field in page.missing_fields)
    report_path = write_json(
        {
            "listings": len(result.pages),
            "index_files": result.index_files,
            "links": result.links,
            "missing_fields": dict(sorted(missing.items())),
        },
        config.out_dir / keys.PARSE_REPORT_FILE,
    )
    inputs = [html_dir] + ([rules_path] if rules_path else [])
    _finish(config, "parse", inputs, [csv_path, report_path])


@cli.command("clean")
@click.argument("listings", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@command
def clean_cmd(config: RunConfig, listings: Path) -> None:
    """Validate, partition, filter and encode listings into one cleaned CSV per year bucket."""
    prepared = prepare_buckets(listings, config.buckets)
    outputs = [
        write_dataset_csv(dataset, config.out_dir / keys.CLEANED_FILE.format(bucket=bucket.value))
        for bucket, dataset in prepared.datasets.items()
    ]
    outputs.append(
        write_json(
            {
                "rows": len(prepared.table) + len(prepared.table.load_rejections),
                "load_rejections": [row.model_dump() for row in prepared.table.load_rejections],
                "validation_rejections": [row.model_dump() for row in prepared.report.rejected_rows],
                "missing_counts": prepared.report.missing_counts,
                "outside_year_range": prepared.out_of_range,
                "outliers": {bucket.value: n for bucket, n in prepared.outliers.items()},
                "bucket_rows": {bucket.value: d.n_rows for bucket, d in prepared.datasets.items()},
            },
            config.out_dir / keys.CLEAN_REPORT_FILE,
        )
    )
    _finish(config, "clean", [listings], outputs)


@cli.command("stats")
@click.argument("listings", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@command
def stats_cmd(config: RunConfig, listings: Path) -> None:
    """Per-bucket averages table and the correlation matrix over all buckets."""
    prepared = prepare_buckets(listings, config.buckets)
    stats_path = write_stats_csv(summary_stats(prepared.datasets), config.out_dir / keys.STATS_FILE)
    corr = correlation_matrix(build_dataset(prepared.all_records()))
    for name, value in corr.price_ranking()[:5]:
        logger.info(f"corr({name}, price) = {value:.3f}")
    corr_path = write_corr_csv(corr, config.out_dir / keys.CORR_FILE)
    _finish(config, "stats", [listings], [stats_path, corr_path])


@cli.command("train")
@click.argument("listings", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--model", "model_name", required=True, help="linear, svr, tree, forest or gbt.")
@command
def train_cmd(config: RunConfig, listings: Path, model_name: str) -> None:
    """Tune and fit one model family per bucket and save the fitted models as JSON."""
    family = ModelFamily.parse(model_name)
    prepared = prepare_buckets(listings, config.buckets)
    run = run_evaluation(prepared.datasets, config.eval_config([family]))
    outputs = [
        save_model(cell.model, config.out_dir / keys.MODEL_FILE.format(family=family.value, bucket=bucket.value))
        for (_, bucket), cell in run.fitted.items()
    ]
    chosen = {f"{c.family}/{c.bucket.value}": c.params for c in run.report.cells}
    _finish(config, "train", [listings], outputs, {"chosen_params": chosen})


@cli.command("evaluate")
@click.argument("listings", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@command
def evaluate_cmd(config: RunConfig, listings: Path) -> None:
    """Results table of RMSE, MAE and R-square per model family and year bucket."""
    prepared = prepare_buckets(listings, config.buckets)
    eval_config = config.eval_config()
    report = run_evaluation(prepared.datasets, eval_config).report
    results_path = write_results_csv(report, config.out_dir / keys.RESULTS_FILE)
    grids = {family.value: [p.model_dump() for p in eval_config.grid_for(family)] for family in eval_config.families}
    chosen = {f"{c.family}/{c.bucket.value}": {"params": c.params, "cv_rmse": c.cv_rmse} for c in report.cells}
    inputs = [listings] + ([config.grids_path] if config.grids_path else [])
    _finish(config, "evaluate", inputs, [results_path], {"grids": grids, "chosen_params": chosen})


@cli.command("explain")
@click.argument("listings", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--model", "model_name", default="gbt", show_default=True)
@command
def explain_cmd(config: RunConfig, listings: Path, model_name: str) -> None:
    """Exact Shapley attributions of the tuned model on each bucket's test split."""
    family = ModelFamily.parse(model_name)
    prepared = prepare_buckets(listings, config.buckets)
    run = run_evaluation(prepared.datasets, config.eval_config([family]))

    summaries = {}
    for (_, bucket), cell in run.fitted.items():
        background = sample_background(cell.train, config.background_size, config.seed)
        summaries[bucket.value] = shap_summary(
            cell.model, cell.test, background, max_rows=config.explain_rows, n_jobs=config.n_jobs
        )
    shap_path = write_shap_csv(summaries, config.out_dir / keys.SHAP_FILE)
    summary_path = write_shap_summary_csv(summaries, config.out_dir / keys.SHAP_SUMMARY_FILE)
    _finish(config, "explain", [listings], [shap_path, summary_path], {"model": family.value})


@cli.command("report")
@click.option("--results", "results_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--corr", "corr_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--shap", "shap_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--stats", "stats_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@command
def report_cmd(config: RunConfig, results_path: Path, corr_path: Path, shap_path: Path, stats_path: Optional[Path]) -> None:
    """Heatmap SVG, one beeswarm SVG per bucket, and a plain-text summary."""
    results = read_results_csv(results_path)
    corr = read_corr_csv(corr_path)
    shap = read_shap_csv(shap_path)
    stats = read_stats_csv(stats_path) if stats_path else None

    outputs = [render_heatmap(corr, config.out_dir / keys.HEATMAP_FILE)]
    for bucket, summary in shap.items():
        outputs.append(
            render_beeswarm(summary, config.out_dir / keys.BEESWARM_FILE.format(bucket=bucket), title=f"Shapley values, {bucket}")
        )
    outputs.append(write_summary(render_summary(results, corr, shap, stats), config.out_dir / keys.SUMMARY_FILE))
    inputs = [results_path, corr_path, shap_path] + ([stats_path] if stats_path else [])
    _finish(config, "report", inputs, outputs)


def main() -> None:
    cli(prog_name="houseprice")


if __name__ == "__main__":
    main()
