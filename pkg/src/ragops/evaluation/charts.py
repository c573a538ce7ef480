"""Plotly HTML figures for evaluated runs."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Sequence

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go
import plotly.io as pio

from .report import EvalReport

logger = logging.getLogger(__name__)

TEMPLATE_NAME = "ragops-report"
COLORWAY = ("#2563eb", "#f97316", "#16a34a", "#9333ea", "#dc2626", "#0891b2")


def register_plotly_template() -> str:
    """Register (once) and return the report template name."""

    if TEMPLATE_NAME in pio.templates:
        return TEMPLATE_NAME
    axis_style = {"gridcolor": "#e2e8f0", "linecolor": "#cbd5e1", "ticks": "outside", "automargin": True}
    layout = {
        "font": {"family": "Inter, Helvetica, Arial, sans-serif", "color": "#0f172a"},
        "paper_bgcolor": "#ffffff",
        "plot_bgcolor": "#ffffff",
        "colorway": list(COLORWAY),
        "margin": {"l": 56, "r": 32, "t": 64, "b": 48},
        "xaxis": axis_style,
        "yaxis": axis_style,
        "legend": {"orientation": "h", "x": 0, "y": -0.2},
        "bargap": 0.18,
        "bargroupgap": 0.12,
    }
    pio.templates[TEMPLATE_NAME] = go.layout.Template(layout=layout)
    return TEMPLATE_NAME


def _bucket_frame(reports: Sequence[EvalReport], metric: str, k: int = 1) -> pd.DataFrame:
    rows = []
    for report in reports:
        for stats in report.per_bucket:
            value = stats.accuracy if metric == "accuracy" else stats.recall_at.get(k)
            if value is None:
                continue
            rows.append({"run": report.run_name, "bucket": f"B{stats.bucket}", "value": 100.0 * value})
    return pd.DataFrame(rows, columns=["run", "bucket", "value"])


def accuracy_by_bucket_figure(reports: Sequence[EvalReport]) -> go.Figure:
    frame = _bucket_frame(reports, "accuracy")
    return px.bar(
        frame, x="bucket", y="value", color="run", barmode="group",
        labels={"value": "Accuracy (%)", "bucket": "Popularity bucket (least to most popular)"},
        title="Accuracy by popularity bucket", template=register_plotly_template(),
    )


def recall_by_bucket_figure(reports: Sequence[EvalReport], k: int = 1) -> go.Figure:
    frame = _bucket_frame(reports, "recall", k)
    return px.line(
        frame, x="bucket", y="value", color="run", markers=True,
        labels={"value": f"Recall@{k} (%)", "bucket": "Popularity bucket (least to most popular)"},
        title=f"Recall@{k} by popularity bucket", template=register_plotly_template(),
    )


def bucket_distribution_figure(report: EvalReport) -> go.Figure:
    frame = pd.DataFrame(
        {"bucket": [f"B{stats.bucket}" for stats in report.per_bucket], "count": [stats.count for stats in report.per_bucket]}
    )
    return px.bar(
        frame, x="bucket", y="count", labels={"count": "Questions", "bucket": "Popularity bucket"},
        title="Questions per popularity bucket", template=register_plotly_template(),
    )


def write_figures(reports: Sequence[EvalReport], directory: Path) -> List[Path]:
    """Write the report figures as standalone HTML files; the plotly bundle is loaded from its CDN."""

    if not reports:
        return []
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    figures = {"accuracy_by_bucket": accuracy_by_bucket_figure(reports)}
    if any(report.recall_at for report in reports):
        figures["recall_at_1_by_bucket"] = recall_by_bucket_figure([r for r in reports if r.recall_at], k=1)
    figures["bucket_distribution"] = bucket_distribution_figure(reports[0])

    written = []
    for name, figure in figures.items():
        path = directory / f"{name}.html"
        figure.write_html(path, include_plotlyjs="cdn", full_html=True, div_id=name.replace("_", "-"))
        written.append(path)
    logger.info("Wrote %d figures to %s", len(written), directory)
    return written


__all__ = [
    "accuracy_by_bucket_figure",
    "bucket_distribution_figure",
    "recall_by_bucket_figure",
    "register_plotly_template",
    "write_figures",
]
