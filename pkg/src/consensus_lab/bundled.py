"""Bundled example graphs and ready-to-run experiment configs.

``bundled_examples`` returns config dictionaries keyed by name; call
``write_bundled`` to materialize the configs plus their edge-list files in a
directory, after which each config can be run unchanged.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .graph import WeightedDigraph, write_edge_list


def fig1_graph() -> WeightedDigraph:
    """Four vertices, two mutually linked roots feeding two followers."""
    lap = np.array(
        [
            [1, -1, 0, 0],
            [-1, 1, 0, 0],
            [-1, 0, 1, 0],
            [-1, -1, 0, 2],
        ],
        dtype=float,
    )
    return WeightedDigraph.from_laplacian(lap)


def double_star_graph() -> WeightedDigraph:
    """Two mutually linked hubs, each broadcasting to five private leaves."""
    edges = [(0, 1, 1.0), (1, 0, 1.0)]
    edges += [(0, k, 1.0) for k in range(2, 7)]
    edges += [(1, k, 1.0) for k in range(7, 12)]
    return WeightedDigraph.from_edges(12, edges)


def fig4_graph() -> WeightedDigraph:
    """Six vertices with two separate root pairs; no spanning tree exists."""
    lap = np.array(
        [
            [1, -1, 0, 0, 0, 0],
            [-1, 1, 0, 0, 0, 0],
            [-1, 0, 2, 0, -1, 0],
            [0, -1, 0, 2, 0, -1],
            [0, 0, 0, 0, 1, -1],
            [0, 0, 0, 0, -1, 1],
        ],
        dtype=float,
    )
    return WeightedDigraph.from_laplacian(lap)


GRAPH_BUILDERS = {
    "fig1": fig1_graph,
    "double-star": double_star_graph,
    "fig4": fig4_graph,
}


def bundled_examples() -> dict[str, dict]:
    """Named experiment configs reproducing the library's reference runs."""
    return {
        "fig1-analyze": {
            "mode": "analyze",
            "graph": {"edge_list": "graphs/fig1.edges"},
            "function": {"preset": "unit-jump"},
            "delta": 1.0,
            "seed": 1,
        },
        "double-star": {
            "mode": "fixed",
            "graph": {"edge_list": "graphs/double-star.edges"},
            "function": {"preset": "unit-jump"},
            "x0": {"uniform": {"lo": -5.0, "hi": 5.0}},
            "options": {"dt": 1e-3, "t_max": 100.0},
            "seed": 7,
        },
        "fig4-nonconsensus": {
            "mode": "fixed",
            "graph": {"edge_list": "graphs/fig4.edges"},
            "function": {"preset": "unit-jump"},
            "x0": {"values": [1.0, 1.0, 0.5, -0.5, -1.0, -1.0]},
            "options": {"dt": 1e-3, "t_max": 100.0},
            "seed": 3,
        },
        "blinking-50": {
            "mode": "blinking",
            "graph": {"blinking": {"n": 50, "K": 0, "p": 0.1, "w": 0.1}},
            "durations": {"uniform": [0.0, 1.0]},
            "function": {"preset": "unit-jump"},
            "x0": {"uniform": {"lo": -5.0, "hi": 5.0}},
            "options": {"dt": 1e-3, "t_max": 400.0, "consensus_tol": 1e-3},
            "delta": 0.1,
            "seed": 11,
        },
    }


def write_bundled(directory: str | Path) -> list[Path]:
    """Materialize all bundled configs and their graph files; returns config paths."""
    directory = Path(directory)
    (directory / "graphs").mkdir(parents=True, exist_ok=True)
    for name, builder in GRAPH_BUILDERS.items():
        write_edge_list(builder(), directory / "graphs" / f"{name}.edges")
    paths = []
    for name, cfg in bundled_examples().items():
        path = directory / f"{name}.json"
        path.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
        paths.append(path)
    return paths
