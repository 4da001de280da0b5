"""SVG figures: the correlation heatmap and the per-bucket attribution beeswarm.

Output is deterministic for identical inputs: element ids come from a fixed
hash salt, the date stamp is dropped, and text stays as SVG text.
"""
import logging
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import Normalize, to_hex  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from houseprice.errors import LoadError  # noqa: E402
from houseprice.types.types import CorrMatrix, ShapSummary  # noqa: E402

logger = logging.getLogger(__name__)

HEATMAP_CMAP = "RdBu_r"
VALUE_CMAP = "coolwarm"
SVG_PARAMS = {"svg.hashsalt": "houseprice", "svg.fonttype": "none", "font.size": 8}


def heatmap_color(value: float) -> str:
    """Fill colour of a correlation cell on the diverging [-1, 1] scale."""
    return to_hex(plt.get_cmap(HEATMAP_CMAP)(Normalize(vmin=-1.0, vmax=1.0)(value)))


def _save(fig, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    except OSError as e:
        raise LoadError(f"cannot write {path}: {str(e)}")
    finally:
        plt.close(fig)
    return path


def render_heatmap(corr: CorrMatrix, path: Union[str, Path], title: str = "Correlation of housing variables") -> Path:
    """One labelled square per matrix cell (ids ``cell-<row>-<col>``) plus a colour bar."""
    n = len(corr.names)
    with plt.rc_context(SVG_PARAMS):
        size = max(4.0, 0.35 * n + 2.0)
        fig, ax = plt.subplots(figsize=(size, size))
        for i in range(n):
            for j in range(n):
                ax.add_patch(
                    Rectangle(
                        (j, i),
                        1.0,
                        1.0,
                        facecolor=heatmap_color(float(corr.values[i, j])),
                        edgecolor="white",
                        linewidth=0.5,
                        gid=f"cell-{i}-{j}",
                    )
                )
        ax.set_xlim(0, n)
        ax.set_ylim(n, 0)
        ax.set_aspect("equal")
        ticks = np.arange(n) + 0.5
        ax.set_xticks(ticks, labels=corr.names, rotation=90)
        ax.set_yticks(ticks, labels=corr.names)
        ax.set_title(title)
        mappable = plt.cm.ScalarMappable(norm=Normalize(vmin=-1.0, vmax=1.0), cmap=HEATMAP_CMAP)
        fig.colorbar(mappable, ax=ax, fraction=0.046, pad=0.04, label="Pearson r")
        logger.info(f"Writing {n}x{n} heatmap to {path}")
        return _save(fig, Path(path))


def _swarm_offsets(phi: np.ndarray, bins: int = 40, spread: float = 0.4) -> np.ndarray:
    """Vertical offsets that stack points sharing an attribution bin."""
    offsets = np.zeros(phi.shape[0])
    if phi.shape[0] == 0:
        return offsets
    low, high = float(phi.min()), float(phi.max())
    width = (high - low) / bins if high > low else 1.0
    slots = np.floor((phi - low) / width).astype(int)
    for slot in np.unique(slots):
        members = np.nonzero(slots == slot)[0]
        ranks = np.arange(members.shape[0])
        # alternate above and below the row line: 0, +1, -1, +2, -2, ...
        signed = np.where(ranks % 2 == 1, (ranks + 1) // 2, -(ranks // 2))
        step = spread / max(1, members.shape[0] // 2)
        offsets[members] = np.clip(signed * min(step, 0.08), -spread, spread)
    return offsets


def render_beeswarm(
    summary: ShapSummary,
    path: Union[str, Path],
    title: str = "Shapley values",
    max_features: int = 20,
) -> Path:
    """Attribution beeswarm: one row per feature in rank order, points coloured by feature value.

    Each row is an SVG group with id ``feature-<name>``.
    """
    names = summary.ranking[:max_features] or summary.feature_names[:max_features]
    with plt.rc_context(SVG_PARAMS):
        fig, ax = plt.subplots(figsize=(7.0, 0.4 * len(names) + 1.5))
        cmap = plt.get_cmap(VALUE_CMAP)
        for position, name in enumerate(names):
            pairs = np.array(summary.pairs.get(name, []), dtype=float).reshape(-1, 2)
            values, phi = pairs[:, 0], pairs[:, 1]
            low, high = (float(values.min()), float(values.max())) if values.size else (0.0, 1.0)
            shade = (values - low) / (high - low) if high > low else np.full(values.shape, 0.5)
            ax.scatter(
                phi,
                position + _swarm_offsets(phi),
                c=cmap(shade),
                s=10,
                linewidths=0,
                gid=f"feature-{name}",
            )
        ax.set_yticks(np.arange(len(names)), labels=names)
        ax.set_ylim(len(names) - 0.5, -0.5)
        ax.axvline(0.0, color="#999999", linewidth=0.8)
        ax.set_xlabel("Shapley value (USD)")
        ax.set_title(title)
        mappable = plt.cm.ScalarMappable(norm=Normalize(vmin=0.0, vmax=1.0), cmap=cmap)
        bar = fig.colorbar(mappable, ax=ax, fraction=0.046, pad=0.04, ticks=[0.0, 1.0])
        bar.ax.set_yticklabels(["Low", "High"])
        bar.set_label("Feature value")
        logger.info(f"Writing beeswarm of {len(names)} feature(s) to {path}")
        return _save(fig, Path(path))
