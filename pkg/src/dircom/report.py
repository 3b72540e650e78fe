"""Figure rendering for benchmark and detection reports.

Figures are drawn straight onto ``matplotlib.figure.Figure`` objects (no
pyplot state) and written next to the delimited output files.
"""

from __future__ import annotations

from matplotlib.figure import Figure

from .detect import MergeTrace
from .sbm import ExperimentResult

_MARKERS = ("o", "s", "^", "v", "D", "*")


def render_benchmark_figure(result: ExperimentResult, path: str) -> None:
    """Mean overlap vs. block separation, one errorbar curve per method."""
    methods = []
    for row in result.rows:
        if row.method not in methods:
            methods.append(row.method)
    fig = Figure(figsize=(6.4, 4.4))
    ax = fig.subplots()
    for mi, method in enumerate(methods):
        rows = [r for r in result.rows if r.method == method]
        seps = [r.separation for r in rows]
        means = [r.mean_overlap for r in rows]
        err = [r.mean_overlap - r.ci_low for r in rows]
        ax.errorbar(
            seps, means, yerr=err, marker=_MARKERS[mi % len(_MARKERS)],
            capsize=3, label=method,
        )
    ax.set_xlabel("c_in - c_out")
    ax.set_ylabel("overlap with planted blocks")
    ax.set_ylim(0.45, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)


def render_modularity_curve(trace: MergeTrace, path: str) -> None:
    """Modularity after each merge of a detection run."""
    steps = [0] + [r.step + 1 for r in trace.records]
    values = [trace.initial_modularity] + [r.modularity for r in trace.records]
    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.subplots()
    ax.plot(steps, values, marker=".")
    ax.set_xlabel("merge")
    ax.set_ylabel("modularity")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
