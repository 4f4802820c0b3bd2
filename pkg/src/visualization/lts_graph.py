"""
LTS graph visualization for the Synthlock project.

This module draws a labeled transition system as a network graph: internal
transitions solid, environment transitions dotted, initial states highlighted.
"""

from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
import plotly.graph_objects as go

from src.lts.core import ENV, Lts


def _empty_figure(message: str, title: str) -> go.Figure:
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
    fig.update_layout(
        title={"text": title, "font": {"size": 16}},
        showlegend=False,
        plot_bgcolor="rgba(248,248,248,1)",
    )
    return fig


def lts_to_graph(lts: Lts) -> nx.MultiDiGraph:
    """
    Graph of ``lts``: one node per state, one edge per transition.

    Nodes carry ``label`` (sorted props) and ``initial``; edges carry
    ``action`` and ``kind`` (internal or env).
    """
    graph = nx.MultiDiGraph()
    for s in lts.states:
        graph.add_node(s, label=sorted(lts.label(s)), initial=s in lts.initials, name=lts.state_name(s))
    for (s, a, t) in lts.transitions:
        graph.add_edge(s, t, action=a, kind=lts.kind(a))
    return graph


def _edge_segments(pos: Dict[int, np.ndarray], edges: List[Tuple[int, int]]) -> Tuple[List, List]:
    xs: List[Optional[float]] = []
    ys: List[Optional[float]] = []
    for s, t in edges:
        start, end = pos[s], pos[t]
        if s == t:
            # small loop above the node
            angles = np.linspace(0, 2 * np.pi, 16)
            loop = start + np.stack([0.05 * np.cos(angles), 0.05 * np.sin(angles) + 0.05], axis=1)
            xs += list(loop[:, 0]) + [None]
            ys += list(loop[:, 1]) + [None]
        else:
            xs += [start[0], end[0], None]
            ys += [start[1], end[1], None]
    return xs, ys


def create_lts_graph(lts: Optional[Lts], title: str = "Process LTS") -> go.Figure:
    """
    Create a network graph visualization of an LTS.

    Args:
        lts: transition system to draw
        title: figure title

    Returns:
        Plotly figure object
    """
    if lts is None or lts.num_states == 0:
        return _empty_figure("No transition system to show", title)

    graph = lts_to_graph(lts)
    pos = {node: np.asarray(xy) for node, xy in nx.spring_layout(graph, seed=42).items()}

    internal = [(s, t) for s, t, data in graph.edges(data=True) if data["kind"] != ENV]
    env = [(s, t) for s, t, data in graph.edges(data=True) if data["kind"] == ENV]
    traces = []
    for edges, dash, name in ((internal, "solid", "internal"), (env, "dot", "environment")):
        xs, ys = _edge_segments(pos, edges)
        traces.append(go.Scatter(
            x=xs,
            y=ys,
            mode="lines",
            name=name,
            hoverinfo="none",
            line=dict(width=1.5, dash=dash, color="rgba(120, 120, 120, 0.7)"),
        ))

    # action names at edge midpoints
    labels = [
        (pos[s] + pos[t]) / 2 if s != t else pos[s] + np.array([0.0, 0.11])
        for s, t in graph.edges()
    ]
    traces.append(go.Scatter(
        x=[xy[0] for xy in labels],
        y=[xy[1] for xy in labels],
        mode="text",
        text=[data["action"] for _, _, data in graph.edges(data=True)],
        textfont=dict(size=10, color="rgba(90, 90, 90, 1)"),
        hoverinfo="none",
        showlegend=False,
    ))

    for initial, color, name in ((True, "rgba(31, 119, 180, 0.9)", "initial"),
                                 (False, "rgba(255, 127, 14, 0.8)", "state")):
        nodes = [n for n, data in graph.nodes(data=True) if data["initial"] == initial]
        traces.append(go.Scatter(
            x=[pos[n][0] for n in nodes],
            y=[pos[n][1] for n in nodes],
            mode="markers+text",
            name=name,
            text=[graph.nodes[n]["name"] for n in nodes],
            textposition="bottom center",
            hovertext=[f"{graph.nodes[n]['name']}<br>{', '.join(graph.nodes[n]['label']) or '(none)'}" for n in nodes],
            hoverinfo="text",
            marker=dict(size=18, color=color, line=dict(width=1, color="rgba(40, 40, 40, 1)")),
        ))

    fig = go.Figure(
        data=traces,
        layout=go.Layout(
            title={"text": title, "font": {"size": 16}},
            showlegend=True,
            hovermode="closest",
            margin=dict(b=20, l=5, r=5, t=40),
            xaxis=dict(showgrid=False, zeroline=False, showticklabels=False),
            yaxis=dict(showgrid=False, zeroline=False, showticklabels=False),
            plot_bgcolor="rgba(248,248,248,1)",
        ),
    )
    return fig
