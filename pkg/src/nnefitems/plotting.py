"""Figures written next to the textual reports (headless Agg backend)."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .petri.coloured import is_sync_name  # noqa: E402
from .petri.net import MarkingGraph, count_paths  # noqa: E402
from .trace import Trace  # noqa: E402


def plot_trace(trace: Trace, path: str | Path, title: str = "") -> Path:
    """Gantt chart: one row per item, one bar per layer, hatched sync bars."""
    path = Path(path)
    items = sorted({e.item for e in trace.events})
    starts: dict[tuple[str, str], int] = {}
    bars: list[tuple[str, str, int, int]] = []
    for e in sorted(trace.events, key=lambda e: e.t_ns):
        key = (e.item, e.transition)
        if e.kind == "start":
            starts[key] = e.t_ns
        elif key in starts:
            bars.append((e.item, e.transition, starts.pop(key), e.t_ns))
    origin = min((e.t_ns for e in trace.events), default=0)
    fig, ax = plt.subplots(figsize=(10, 1.2 + 0.8 * max(len(items), 1)))
    cmap = plt.get_cmap("tab10")
    for item, transition, t0, t1 in bars:
        row = items.index(item)
        sync = is_sync_name(transition)
        left = (t0 - origin) / 1e6
        width = max((t1 - t0) / 1e6, 1e-3)
        ax.barh(
            row,
            width,
            left=left,
            height=0.6,
            color="white" if sync else cmap(row % 10),
            edgecolor="black",
            hatch="//" if sync else None,
        )
        ax.annotate(transition, (left, row + 0.33), fontsize=6, rotation=45)
    for name, t in trace.rendezvous:
        x = (t - origin) / 1e6
        ax.axvline(x, color="grey", linestyle="--", linewidth=0.8)
        ax.annotate(name, (x, -0.45), fontsize=7, color="grey")
    ax.set_yticks(range(len(items)))
    ax.set_yticklabels(items)
    ax.set_ylim(max(len(items), 1) - 0.4, -0.7)
    ax.set_xlabel("time since first event (ms)")
    ax.set_title(title or "execution trace")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def marking_levels(graph: MarkingGraph) -> list[int]:
    """Number of distinct reachable markings after k firings, for each k."""
    depth = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for node in frontier:
            for _, child in graph.successors[node]:
                if child not in depth:
                    depth[child] = depth[node] + 1
                    nxt.append(child)
        frontier = nxt
    counts = Counter(depth.values())
    return [counts[k] for k in range(max(counts) + 1)]


def plot_marking_profile(graph: MarkingGraph, path: str | Path, title: str = "") -> Path:
    """Markings per firing depth, with the path count annotated."""
    path = Path(path)
    levels = marking_levels(graph)
    paths = count_paths(graph)[0]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar(range(len(levels)), levels, color="steelblue", edgecolor="black")
    ax.set_xlabel("transitions fired")
    ax.set_ylabel("reachable markings")
    ax.set_title(title or f"{graph.net.name}: {len(graph.nodes)} markings, {paths} valid path(s)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
