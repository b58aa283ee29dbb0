"""
Report Figures

Static HTML figures for the chi estimator and the level staircase,
styled with the shared theme.
"""

import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence

import plotly.graph_objects as go

from modules.euler_estimator import ChiCurve, PlateauReport
from modules.fileio import atomic_write_text
from modules.resonance_io import FluctuationSeries
from modules.theme import COLORS, FORMULA_COLORS, apply_plotly_theme

logger = logging.getLogger(__name__)

FORMULA_LABELS = {
    "new": "X_K(t), new series",
    "old": "X_K(t), old series",
    "old-literal": "X_K(t), old series (printed prefactor)",
}


def chi_curve_figure(
    curves: Sequence[ChiCurve],
    plateau: Optional[PlateauReport] = None,
    t0: Optional[float] = None,
    title: str = "Euler characteristic estimate",
):
    """
    Estimator curves on a log t axis, with the chi +- 1/4 band and the t0 marker.

    Args:
        curves: one or more sampled curves
        plateau: detected plateau; its band and window are drawn when found
        t0: validity threshold 1/(2 l_min), when the graph is known
        title: figure title

    Returns:
        plotly Figure
    """
    fig = go.Figure()
    for curve in curves:
        fig.add_trace(go.Scatter(
            x=curve.t,
            y=curve.x,
            mode="lines+markers",
            marker=dict(size=4),
            line=dict(color=FORMULA_COLORS.get(curve.formula, COLORS["curve_new"]), width=2),
            name=f"{FORMULA_LABELS.get(curve.formula, curve.formula)}, K={curve.K}",
        ))

    if plateau is not None and plateau.found:
        chi = plateau.chi_estimate
        fig.add_hrect(
            y0=chi - 0.25, y1=chi + 0.25,
            fillcolor=COLORS["plateau_band"], line_width=0, layer="below",
        )
        fig.add_hline(
            y=chi, line_dash="dot", line_color=COLORS["plateau_edge"],
            annotation_text=f"chi = {chi}", annotation_position="bottom right",
        )
        t_lo, t_hi = plateau.t_interval
        for edge in (t_lo, t_hi):
            fig.add_vline(x=edge, line_dash="dot", line_color=COLORS["plateau_edge"], line_width=1)

    if t0 is not None:
        fig.add_vline(
            x=t0, line_dash="dash", line_color=COLORS["t0_marker"], line_width=2,
            annotation_text=f"t0 = {t0:.3g} 1/m", annotation_position="top",
        )

    fig = apply_plotly_theme(fig, title)
    fig.update_xaxes(type="log", title_text="t (1/m)")
    fig.update_yaxes(title_text="X_K(t)")
    fig.update_layout(height=450)
    return fig


def fluctuation_figure(series: FluctuationSeries, gaps: Iterable[float] = (),
                       title: str = "Fluctuating counting function"):
    """N_fl(k) staircase residuals with candidate missing-level locations marked."""
    fig = go.Figure()
    fig.add_trace(go.Scatter(
        x=series.k,
        y=series.n_fl,
        mode="lines",
        line=dict(color=COLORS["curve_new"], width=1.5, shape="hv"),
        name="N_fl",
    ))
    for k in gaps:
        fig.add_vline(
            x=k, line_dash="dash", line_color=COLORS["gap_marker"], line_width=2,
            annotation_text="gap?", annotation_position="top",
        )
    fig = apply_plotly_theme(fig, title)
    fig.update_xaxes(title_text="k (1/m)")
    fig.update_yaxes(title_text="N_fl")
    fig.update_layout(height=350, showlegend=False)
    return fig


def write_figure(fig, path) -> Path:
    """Standalone HTML with a fixed div id, so identical inputs give identical files."""
    html = fig.to_html(include_plotlyjs="cdn", full_html=True, div_id="graphecho-figure")
    logger.debug("writing figure to %s", path)
    return atomic_write_text(path, html)
