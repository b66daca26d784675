"""Benchmark figures rendered to files next to the CSV report."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_scaling_figure(results, path):
    """Two panels over the forker sweep: fork rate and processes managed."""
    forkers = [r.forkers for r in results]
    rates = [r.fork_rate_per_second for r in results]
    managed = [r.processes_managed for r in results]

    fig, (ax_rate, ax_cap) = plt.subplots(1, 2, figsize=(9, 3.5))

    ax_rate.plot(forkers, rates, "o-", color="tab:blue")
    ax_rate.set_xscale("log", base=2)
    ax_rate.set_yscale("log")
    ax_rate.set_xlabel("forkers")
    ax_rate.set_ylabel("forks / second")
    ax_rate.set_title("Fork rate")
    ax_rate.grid(True, which="both", alpha=0.3)

    ax_cap.plot(forkers, managed, "s-", color="tab:orange")
    ax_cap.set_xscale("log", base=2)
    ax_cap.set_yscale("log")
    ax_cap.set_xlabel("forkers")
    ax_cap.set_ylabel("processes managed")
    ax_cap.set_title("Capacity")
    ax_cap.grid(True, which="both", alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
