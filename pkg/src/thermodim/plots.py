"""Figure rendering for the CLI report path.

Kept out of the core modules: only the CLI imports this, so library users
without a display stack never touch matplotlib.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_defect(curves, path):
    """curves: {bundle: [(n, defect)]}."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for bundle, curve in sorted(curves.items()):
        ns = [n for n, _ in curve]
        vs = [v for _, v in curve]
        ax.plot(ns, vs, "o-", ms=4, label=bundle)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel("defect(n)")
    ax.set_title("average-conformality defect")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_brackets(histories, path):
    """histories: {bundle: [BowenBracket]}."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for bundle, brackets in sorted(histories.items()):
        ks = [b.k for b in brackets]
        ax.plot(ks, [b.s_val for b in brackets], "o-", ms=4,
                label=f"{bundle} s")
        ax.plot(ks, [b.t_val for b in brackets], "s--", ms=4,
                label=f"{bundle} t")
    ax.set_xlabel("k  (iterate 2^k)")
    ax.set_ylabel("Bowen root")
    ax.set_title("sandwich brackets")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_boxdim(scales, counts, fit_dim, path):
    import numpy as np
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    x = np.log(1.0 / np.asarray(scales, float))
    y = np.log(np.asarray(counts, float))
    ax.plot(x, y, "o", ms=5)
    coef = np.polyfit(x, y, 1)
    xs = np.linspace(x.min(), x.max(), 50)
    ax.plot(xs, coef[0] * xs + coef[1], "-", lw=1,
            label=f"slope = {fit_dim:.4f}")
    ax.set_xlabel("log 1/eps")
    ax.set_ylabel("log N(eps)")
    ax.set_title("box-counting fit")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_pressure(rows, path):
    """rows: dicts with k, value, method from the pressure table."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    methods = sorted({r["method"] for r in rows})
    for method in methods:
        pts = [(r["k"], r["value"]) for r in rows if r["method"] == method]
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=4,
                label=method)
    ax.set_xlabel("k  (iterate 2^k)")
    ax.set_ylabel("pressure / 2^k")
    ax.set_title("iterate pressures vs sequence pressure")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
