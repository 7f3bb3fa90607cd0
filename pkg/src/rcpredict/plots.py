"""Report figures rendered to PNG files with the Agg backend."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 7,
    "legend.frameon": False,
    "savefig.dpi": 120,
}
# no Software/date chunks so reruns give identical bytes
PNG_METADATA = {"Software": None}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=PNG_METADATA)
    plt.close(fig)
    return path


def accuracy_bars(acc: dict[str, dict[str, float]], cases: list[str], path: Path) -> Path:
    """Grouped bars: mean CV accuracy per classifier for each case."""
    kinds = list(acc)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7.5, 3.6))
        width = 0.8 / max(1, len(kinds))
        x = np.arange(len(cases))
        cmap = plt.get_cmap("tab10")
        for i, k in enumerate(kinds):
            ys = [100 * acc[k].get(c, np.nan) for c in cases]
            ax.bar(x - 0.4 + (i + 0.5) * width, ys, width, label=k, color=cmap(i % 10))
        ax.set_xticks(x, [f"Case {c}" for c in cases])
        ax.set_ylabel("accuracy (%)")
        ax.set_ylim(0, 100)
        ax.legend(ncol=5, loc="lower center", bbox_to_anchor=(0.5, 1.0))
        return _save(fig, path)


def class_distribution(counts: dict[str, list[tuple[str, int]]], path: Path) -> Path:
    """One panel per case with the number of instances per class."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(counts), figsize=(2.0 * len(counts) + 1, 2.8), squeeze=False)
        for ax, (cid, pairs) in zip(axes[0], counts.items()):
            names = [n for n, _ in pairs]
            ax.bar(range(len(pairs)), [c for _, c in pairs], color="0.4")
            ax.set_xticks(range(len(pairs)), names, rotation=45, ha="right")
            ax.set_title(f"Case {cid}")
        axes[0][0].set_ylabel("instances")
        return _save(fig, path)


def baseline_bars(cid: str, rows: list[list[str]], path: Path) -> Path:
    """Per held-out DFG: random, exhaustive best and model-chosen objective."""
    body = [r for r in rows[1:] if r[0] != "average"]
    ids = [r[0] for r in body]

    def col(i):
        return [float(r[i]) if r[i] not in ("NA", "infeasible") else np.nan for r in body]

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.12 * len(ids) + 2), 3.0))
        x = np.arange(len(ids))
        ax.plot(x, col(2), "o", ms=3, color="0.6", label="random (expected)")
        ax.plot(x, col(4), "s", ms=3, mfc="none", color="C3", label="ML")
        ax.plot(x, col(3), "_", ms=8, color="k", label="best")
        step = max(1, len(x) // 20)
        ax.set_xticks(x[::step], ids[::step], rotation=90)
        ax.set_xlabel("held-out DFG")
        ax.set_ylabel("objective")
        ax.set_title(f"Case {cid}")
        ax.legend()
        return _save(fig, path)
