"""Figure rendering for the report paths of the command-line tools.

Every function writes a PNG next to the delimited output it illustrates and
returns the path written.  The Agg backend keeps this headless-safe.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_trace_figure(path, trace) -> str:
    """Cost and step-norm history of one optimization run."""
    ts = [rec.t for rec in trace]
    fig, (ax_f, ax_s) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax_f.plot(ts, [rec.f for rec in trace], marker="o", ms=3)
    ax_f.set_ylabel("cost")
    ax_f.grid(True, alpha=0.3)
    ax_s.semilogy(ts, [max(rec.step_norm, 1e-300) for rec in trace],
                  marker="o", ms=3, color="tab:red")
    ax_s.set_ylabel("step norm")
    ax_s.set_xlabel("iteration")
    ax_s.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_sparsity_figure(path, rows, cols, size: int, title: str = "") -> str:
    """Spy plot of the nonzero coordinates of the assembled operator."""
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.scatter(cols, rows, s=4, c="black", marker="s")
    ax.set_xlim(-0.5, size - 0.5)
    ax.set_ylim(size - 0.5, -0.5)
    ax.set_aspect("equal")
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_bench_figure(path, crosstalks) -> str:
    """Per-trial crosstalk bars with the mean marked."""
    fig, ax = plt.subplots(figsize=(7, 4))
    trials = list(range(len(crosstalks)))
    ax.bar(trials, crosstalks, color="tab:blue", alpha=0.8)
    if crosstalks:
        mean = sum(crosstalks) / len(crosstalks)
        ax.axhline(mean, color="tab:red", ls="--", label=f"mean {mean:.2f}%")
        ax.legend()
    ax.set_xlabel("trial")
    ax.set_ylabel("crosstalk (%)")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_stepnorm_figure(path, norms) -> str:
    """Log-scale step-norm decay of a near-solution Newton run."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(range(len(norms)), [max(v, 1e-300) for v in norms], marker="o")
    ax.set_xlabel("iteration")
    ax.set_ylabel("step norm")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
