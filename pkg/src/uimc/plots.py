"""Figure rendering for experiment reports.

Figures are written straight to files (Agg backend); no interactive UI.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_objective_figure(traces, path):
    """Plot one objective trace per run on a log-scaled y axis."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for run, trace in enumerate(traces):
        ax.plot(np.arange(len(trace)), trace, lw=1.2, label=f"run {run}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    ax.set_yscale("log")
    if len(traces) <= 10:
        ax.legend(fontsize=8)
    ax.set_title("objective trace")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_weight_figure(weight_trace, path):
    """Plot the per-view weight evolution of a single run."""
    arr = np.asarray(weight_trace)
    fig, ax = plt.subplots(figsize=(6, 4))
    for v in range(arr.shape[1]):
        ax.plot(np.arange(arr.shape[0]), arr[:, v], lw=1.5, label=f"view {v}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("weight")
    ax.set_ylim(bottom=0)
    ax.legend(fontsize=8)
    ax.set_title("view weight evolution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_metric_figure(summary, path):
    """Bar chart of mean metrics per method."""
    methods = list(summary.keys())
    metric_names = ("acc", "nmi", "purity")
    width = 0.8 / len(metric_names)
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = np.arange(len(methods))
    for i, name in enumerate(metric_names):
        vals = [summary[me]["mean"][name] for me in methods]
        errs = [summary[me]["std"][name] for me in methods]
        ax.bar(xs + i * width, vals, width, yerr=errs, capsize=3, label=name)
    ax.set_xticks(xs + width)
    ax.set_xticklabels(methods)
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    ax.set_title("clustering metrics")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
