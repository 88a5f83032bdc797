"""Figures written to files (Agg backend, no display needed)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

LABELS = {
    "pdr": "Packet delivery ratio",
    "e2e_delay_s": "Average E2E delay (ms)",
    "throughput_kbps": "Throughput (Kbit/s)",
    "routing_load": "Routing load",
    "hop_count": "Average hop count",
}


def plot_metric(rows: list[dict], param: str, metric: str, path, group: str = "routing"):
    """One line per ``group`` value, mean ± std error bars against ``param``."""
    scale = 1000.0 if metric == "e2e_delay_s" else 1.0
    lines = defaultdict(list)
    for r in rows:
        lines[r[group]].append((float(r[param]), r[f"{metric}_mean"] * scale, r[f"{metric}_std"] * scale))
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for name, pts in sorted(lines.items()):
        pts.sort()
        xs, ys, es = zip(*pts)
        ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=name)
    ax.set_xlabel(param)
    ax.set_ylabel(LABELS.get(metric, metric))
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_trajectories(trace_rows: list[dict], path):
    """3-D flight paths from ``pos`` trace records."""
    tracks = defaultdict(list)
    for r in trace_rows:
        if r["kind"] == "pos":
            tracks[int(r["uav"])].append((float(r["x"]), float(r["y"]), float(r["z"])))
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    for uav, pts in sorted(tracks.items()):
        xs, ys, zs = zip(*pts)
        ax.plot(xs, ys, zs, linewidth=0.8)
        ax.scatter(xs[-1:], ys[-1:], zs[-1:], s=8)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_zlabel("z (m)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_connectivity(runs, path):
    """Median component and edge counts over time across seeds."""
    by_t = defaultdict(list)
    for run in runs:
        for t, comps, edges, _ in run.series:
            by_t[t].append((comps, edges))
    ts = sorted(by_t)
    med = lambda xs: sorted(xs)[len(xs) // 2] if len(xs) % 2 else sum(sorted(xs)[len(xs) // 2 - 1:len(xs) // 2 + 1]) / 2
    comps = [med([c for c, _ in by_t[t]]) for t in ts]
    edges = [med([e for _, e in by_t[t]]) for t in ts]
    secs = [t / 1e9 for t in ts]
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(5.5, 5), sharex=True)
    a1.step(secs, comps, where="post")
    a1.set_ylabel("components (median)")
    a2.plot(secs, edges)
    a2.set_ylabel("links (median)")
    a2.set_xlabel("time (s)")
    for a in (a1, a2):
        a.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_aloha(results, oracle, path):
    """Measured success ratio against an analytic curve ``oracle(g)``."""
    gs = [r.load for r in results]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    grid = [0.05 * i for i in range(1, 41)]
    ax.plot(grid, [oracle(g) for g in grid], label="e^(-2G)")
    ax.plot(gs, [r.success_ratio for r in results], "o", label="simulated")
    ax.set_xlabel("offered load G")
    ax.set_ylabel("success ratio")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
