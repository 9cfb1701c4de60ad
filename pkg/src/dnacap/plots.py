"""Figure rendering for the CLI report paths.

Figures are written next to the delimited output with fixed metadata so
reruns produce identical files; the CSV stays the machine-readable record.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_SAVE_KW = dict(dpi=150, metadata={"Software": "dnacap"})


def _new_axes(xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def render_bounds(rows: list[dict], path: str) -> None:
    """Capacity bounds against the molecule-length parameter."""
    betas = [r["beta"] for r in rows]
    lbs = [r["lb"] for r in rows]
    fig, ax = _new_axes(r"molecule length parameter $\beta$", "rate bound (nats/symbol)")
    ax.plot(betas, lbs, label="lower bound", color="tab:blue")
    ubs = [(r["beta"], r["ub"]) for r in rows if r.get("ub") is not None]
    if ubs:
        ax.plot([b for b, _ in ubs], [u for _, u in ubs], label="upper bound",
                color="tab:red", linestyle="--")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def render_reliability(rows: list[dict], path: str) -> None:
    """Error-exponent curves, one line per beta."""
    fig, ax = _new_axes("rate R (nats/symbol)", "exponent lower bound (per molecule)")
    betas = sorted({r["beta"] for r in rows})
    for beta in betas:
        pts = [(r["R"], r["exponent"]) for r in rows if r["beta"] == beta]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=f"beta = {beta:g}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def render_critical_beta(rows: list[dict], path: str) -> None:
    """Critical-beta thresholds for the BSC and their ratio."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.5, 4.2))
    ws = [r["w"] for r in rows]
    ax1.plot(ws, [r["beta_cr_unif"] for r in rows], label="uniform-input threshold")
    ax1.plot(ws, [r["beta_bar"] for r in rows], label="prior threshold", linestyle="--")
    ax1.set_xlabel("crossover probability w")
    ax1.set_ylabel("critical beta")
    ax1.set_yscale("log")
    ax1.grid(True, alpha=0.3)
    ax1.legend()
    ax2.plot(ws, [r["ratio"] for r in rows], color="tab:green")
    ax2.set_xlabel("crossover probability w")
    ax2.set_ylabel("threshold ratio")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
