"""
Search timeline visualization for the Synthlock project.

This module provides figures of a run log (one row per model-check
iteration) and of a benchmark results table.
"""

import numpy as np
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go
from plotly.subplots import make_subplots


def _empty_figure(message: str, title: str, xaxis: str, yaxis: str) -> go.Figure:
    fig = go.Figure()
    fig.add_annotation(
        text=message,
        showarrow=False,
        font=dict(size=20),
        xref="paper",
        yref="paper",
        x=0.5,
        y=0.5,
    )
    fig.update_layout(title=title, xaxis_title=xaxis, yaxis_title=yaxis, template="plotly_white")
    return fig


def create_search_timeline(log_df: pd.DataFrame) -> go.Figure:
    """
    Create a timeline of a search.

    Args:
        log_df: run log with 'iteration', 'elapsed' and 'cex_count' columns; skipped tuples are left out

    Returns:
        Plotly figure with elapsed time and collected counterexamples per iteration
    """
    required = {"iteration", "elapsed", "cex_count"}
    if log_df is not None and "verdict" in log_df.columns:
        log_df = log_df[log_df["verdict"] != "skipped"]
    if log_df is None or len(log_df) == 0 or not required <= set(log_df.columns):
        return _empty_figure("No iterations recorded", "Search Progress", "Iteration", "Seconds")

    df = log_df.sort_values("iteration")
    fig = make_subplots(specs=[[{"secondary_y": True}]])
    fig.add_trace(go.Scatter(
        x=df["iteration"],
        y=df["elapsed"],
        mode="lines+markers",
        name="Elapsed (s)",
        line=dict(color="rgba(31, 119, 180, 0.8)", width=2),
        marker=dict(size=6),
    ), secondary_y=False)
    fig.add_trace(go.Scatter(
        x=df["iteration"],
        y=df["cex_count"],
        mode="lines",
        name="Counterexamples",
        line=dict(color="rgba(255, 127, 14, 0.8)", width=2, shape="hv"),
    ), secondary_y=True)

    if "batch" in df.columns:
        # first iteration of every batch after the first
        starts = df.loc[df["batch"].diff().fillna(0).to_numpy() > 0, "iteration"]
        for iteration in starts:
            fig.add_vline(x=float(iteration), line_dash="dot", line_color="rgba(150, 150, 150, 0.6)")

    fig.update_layout(
        title="Search Progress",
        template="plotly_white",
        legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="right", x=1),
    )
    fig.update_xaxes(title_text="Iteration")
    fig.update_yaxes(title_text="Seconds", secondary_y=False)
    fig.update_yaxes(title_text="Counterexamples", secondary_y=True)
    return fig


def create_schedule_comparison(results_df: pd.DataFrame, metric: str = "iterations") -> go.Figure:
    """
    Compare batch schedules per example.

    Args:
        results_df: results table with 'example', 'schedule' and ``metric`` columns
        metric: column to plot; counts are drawn on a log scale

    Returns:
        Plotly grouped bar figure
    """
    if results_df is None or len(results_df) == 0 or metric not in results_df.columns:
        return _empty_figure("No results available", "Schedule Comparison", "Example", metric)
    if "schedule" not in results_df.columns or "example" not in results_df.columns:
        raise ValueError("Results need 'example' and 'schedule' columns")

    df = results_df.groupby(["example", "schedule"], as_index=False)[metric].mean()
    log_scale = metric in ("iterations", "reachable_states", "total_states") and bool(np.all(df[metric] > 0))
    fig = px.bar(
        df,
        x="example",
        y=metric,
        color="schedule",
        barmode="group",
        log_y=log_scale,
        title=f"{metric.replace('_', ' ').capitalize()} by Schedule",
    )
    fig.update_layout(
        xaxis_title="Example",
        yaxis_title=metric.replace("_", " ").capitalize(),
        template="plotly_white",
        legend_title="Schedule",
    )
    return fig
