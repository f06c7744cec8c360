"""Figure rendering from suite output files.

Reads the delimited output of a finished run directory and writes PNGs next
to it: per-agent convergence curves (mean best-so-far across replicates with
a +/- one-std band, one line per method) and, when consensus weights were
recorded, weight-matrix heatmaps at a few snapshots of the run. Figures are
derived from the CSVs only, so re-rendering never touches the data files.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .suite import TRAJECTORIES, WEIGHTS

METHOD_COLORS = {
    "arco": "tab:blue",
    "separate": "tab:orange",
    "uniform_cbo": "tab:green",
}


def _read_trajectories(path: Path):
    # curves[(method, agent)] = list of per-replicate best-so-far arrays
    series: dict[tuple[str, int, int], list[tuple[int, float]]] = defaultdict(list)
    with path.open(newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            key = (row["method"], int(row["replicate"]), int(row["agent"]))
            series[key].append((int(row["iteration"]), float(row["best_so_far"])))
    curves: dict[tuple[str, int], list[np.ndarray]] = defaultdict(list)
    for (method, _, agent), points in series.items():
        points.sort()
        curves[(method, agent)].append(np.asarray([v for _, v in points]))
    return curves


def render_convergence(out_dir: Path, dpi: int = 150) -> Path:
    curves = _read_trajectories(out_dir / TRAJECTORIES)
    agents = sorted({agent for _, agent in curves})
    methods = sorted({method for method, _ in curves})
    ncols = min(3, len(agents))
    nrows = (len(agents) + ncols - 1) // ncols
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.2 * ncols, 3.2 * nrows),
        squeeze=False, constrained_layout=True,
    )
    for slot, agent in enumerate(agents):
        ax = axes[slot // ncols][slot % ncols]
        for method in methods:
            stack = np.vstack(curves[(method, agent)])
            mean = stack.mean(axis=0)
            spread = stack.std(axis=0)
            t = np.arange(mean.size)
            color = METHOD_COLORS.get(method)
            ax.plot(t, mean, label=method, color=color)
            ax.fill_between(t, mean - spread, mean + spread, alpha=0.15, color=color)
        ax.set_title(f"agent {agent + 1}")
        ax.set_xlabel("iteration")
        ax.set_ylabel("best so far")
    for slot in range(len(agents), nrows * ncols):
        axes[slot // ncols][slot % ncols].axis("off")
    axes[0][0].legend(fontsize=8)
    target = out_dir / "convergence.png"
    fig.savefig(target, dpi=dpi)
    plt.close(fig)
    return target


def render_weights(out_dir: Path, dpi: int = 150) -> Path | None:
    path = out_dir / WEIGHTS
    if not path.exists():
        return None
    # mean W_ij per (method, iteration) across replicates
    sums: dict[tuple[str, int], dict[tuple[int, int], list[float]]] = defaultdict(
        lambda: defaultdict(list)
    )
    with path.open(newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            key = (row["method"], int(row["iteration"]))
            sums[key][(int(row["i"]), int(row["j"]))].append(float(row["w_ij"]))
    if not sums:
        return None
    method = "arco" if any(m == "arco" for m, _ in sums) else next(iter(sums))[0]
    iterations = sorted(t for m, t in sums if m == method)
    picks = sorted({iterations[0], iterations[len(iterations) // 3],
                    iterations[(2 * len(iterations)) // 3], iterations[-1]})
    k = 1 + max(i for key in sums if key[0] == method for i, _ in sums[key])
    fig, axes = plt.subplots(
        1, len(picks), figsize=(3.0 * len(picks), 3.0), squeeze=False,
        constrained_layout=True,
    )
    image = None
    for slot, t in enumerate(picks):
        w = np.full((k, k), np.nan)
        for (i, j), values in sums[(method, t)].items():
            w[i, j] = float(np.mean(values))
        ax = axes[0][slot]
        image = ax.imshow(w, vmin=0.0, vmax=1.0, cmap="viridis")
        ax.set_title(f"t = {t}")
        ax.set_xticks(range(k))
        ax.set_yticks(range(k))
    fig.colorbar(image, ax=axes[0][-1], fraction=0.046)
    fig.suptitle(f"{method} consensus weights (mean over replicates)")
    target = out_dir / "weights.png"
    fig.savefig(target, dpi=dpi)
    plt.close(fig)
    return target


def render_report(out_dir, dpi: int = 150) -> list[Path]:
    """Render every figure a run directory supports; returns written paths."""
    out = Path(out_dir)
    written = [render_convergence(out, dpi)]
    weights = render_weights(out, dpi)
    if weights is not None:
        written.append(weights)
    return written
