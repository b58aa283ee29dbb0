"""
Centralized figure theme for GraphEcho reports.
Colour palette, fonts and plotly layout shared by every report figure.
"""

# Light theme for static HTML reports
COLORS = {
    "bg_primary": "#FFFFFF",
    "bg_secondary": "#F8F9FA",

    "text_primary": "#1A1A1A",
    "text_secondary": "#4A5568",
    "text_muted": "#718096",

    # Estimator curves
    "curve_new": "#3182CE",
    "curve_old": "#DD6B20",
    "curve_literal": "#805AD5",

    # Plateau band, t0 marker, gap marks
    "plateau_band": "rgba(56, 161, 105, 0.15)",
    "plateau_edge": "#38A169",
    "t0_marker": "#4A5568",
    "gap_marker": "#E53E3E",

    "border_color": "#E2E8F0",

    "chart_palette": ["#3182CE", "#38A169", "#805AD5", "#DD6B20", "#E53E3E"],
}

FONTS = {
    "primary": "'Inter', -apple-system, BlinkMacSystemFont, 'Segoe UI', sans-serif",
}

FORMULA_COLORS = {
    "new": COLORS["curve_new"],
    "old": COLORS["curve_old"],
    "old-literal": COLORS["curve_literal"],
}


def get_plotly_theme():
    """
    Returns the plotly layout shared by all report figures.
    """
    axis = {
        "gridcolor": COLORS["border_color"],
        "zeroline": False,
        "title_font": {"size": 12, "color": COLORS["text_muted"]},
        "tickfont": {"size": 11, "color": COLORS["text_secondary"]},
    }
    return {
        "paper_bgcolor": COLORS["bg_primary"],
        "plot_bgcolor": COLORS["bg_secondary"],
        "font": {"family": FONTS["primary"], "size": 12, "color": COLORS["text_primary"]},
        "xaxis": dict(axis),
        "yaxis": dict(axis),
        "legend": {
            "bgcolor": "rgba(255, 255, 255, 0.9)",
            "bordercolor": COLORS["border_color"],
            "borderwidth": 1,
            "orientation": "h",
            "yanchor": "bottom",
            "y": 1.02,
            "xanchor": "left",
            "x": 0,
            "font": {"size": 11, "color": COLORS["text_primary"]},
        },
        "colorway": COLORS["chart_palette"],
        "margin": {"t": 40, "b": 50, "l": 50, "r": 30},
    }


def apply_plotly_theme(fig, title: str = None):
    """
    Apply the report theme to a plotly figure.

    Args:
        fig: plotly figure
        title: centred title; None or blank leaves the figure untitled

    Returns:
        The same figure, restyled
    """
    fig.update_layout(**get_plotly_theme())
    text = title.strip() if isinstance(title, str) else ""
    if text:
        fig.update_layout(
            title=dict(
                text=text,
                x=0.5,
                y=0.98,
                xanchor="center",
                yanchor="top",
                font=dict(size=13, color=COLORS["text_primary"], family=FONTS["primary"]),
            ),
            margin=dict(t=70, b=50, l=50, r=30),
        )
    return fig
