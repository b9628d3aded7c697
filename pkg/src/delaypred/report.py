"""Figure rendering for the CLI report paths.

matplotlib is imported lazily with the Agg backend so library users who
never render pay nothing and headless machines need no display. Each
renderer writes one PNG next to the delimited output it illustrates.
"""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_trace_figure(trace, pair, path) -> None:
    """Four panels: states, control and decay envelope, the delay pair,
    and the horizon estimate used by the loop."""
    plt = _plt()
    fig, axes = plt.subplots(2, 2, figsize=(11, 7))

    ax = axes[0, 0]
    for i in range(trace.Z.shape[1]):
        ax.plot(trace.t, trace.Z[:, i], label=f"Z_{i+1}")
        ax.plot(trace.t, trace.Zhat[:, i], "--", lw=0.9, label=f"Zhat_{i+1}")
    ax.set_xlabel("t")
    ax.set_title("state and reconstruction")
    ax.legend(fontsize=7, ncol=2)

    ax = axes[0, 1]
    for j in range(trace.U.shape[1]):
        ax.plot(trace.t, trace.U[:, j], label=f"U_{j+1}")
    ax.set_xlabel("t")
    ax.set_title("control")
    ax.legend(fontsize=7)
    ax2 = ax.twinx()
    ax2.semilogy(trace.t, np.maximum(trace.gamma, 1e-300), "k:", lw=0.9)
    ax2.set_ylabel("gamma (log)")

    ax = axes[1, 0]
    ts = trace.t
    ax.plot(ts, np.asarray(pair.d1.value(ts)), label="D1")
    ax.plot(ts, np.asarray(pair.d2.value(ts)), label="D2")
    ax.set_xlabel("t")
    ax.set_title("delays")
    ax.legend(fontsize=8)

    ax = axes[1, 1]
    ax.plot(trace.t, trace.psi_hat)
    ax.set_xlabel("t")
    ax.set_title(f"prediction horizon ({trace.method})")

    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_horizon_figure(series, delay, path) -> None:
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax1.plot(series.grid, series.values)
    ax1.set_title(f"horizon ({series.method})")
    ax1.set_ylabel("psi")
    res = series.residuals(delay)
    ax2.semilogy(series.grid, np.maximum(res, 1e-18))
    ax2.set_ylabel("|phi(t + psi) - t|")
    ax2.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_bench_figure(results, path) -> None:
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    names = [r.method for r in results]
    xs = np.arange(len(names))
    ax1.bar(xs, [r.mean_ms for r in results])
    ax1.set_xticks(xs, names)
    ax1.set_ylabel("mean ms per solve")
    ax2.bar(xs, [max(r.mean_residual, 1e-18) for r in results])
    ax2.set_yscale("log")
    ax2.set_xticks(xs, names)
    ax2.set_ylabel("mean residual")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_margins_figure(report, path, eps_max: float | None = None) -> None:
    plt = _plt()
    eps_hi = eps_max if eps_max is not None else max(report.eps_star * 4, 1e-6)
    eps = np.linspace(0.0, eps_hi, 200)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, fn in (("c1", report.c1), ("c2", report.c2), ("c3", report.c3)):
        ax.plot(eps, [fn(e) for e in eps], label=name)
    ax.axvline(report.eps_star, color="k", ls=":", lw=1, label="eps*")
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.set_xlabel("eps")
    ax.set_title("margin terms vs perturbation size")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
