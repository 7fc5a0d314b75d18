"""Optional PNG figures for CLI reports (matplotlib is only imported here)."""

from __future__ import annotations

import os


def _plt():
    try:
        import matplotlib
    except ImportError as e:
        raise ImportError("--figures needs matplotlib (pip install 'artifact[figures]')") from e
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_figures(command, payload, out):
    """Write the figures for one CLI result; returns the list of paths."""
    plt = _plt()
    paths = []

    def save(fig, name):
        path = os.path.join(out, name)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)

    if command == "bound":
        rows = payload["results"]
        keys = sorted({k for r in rows for k in r["params"]})
        fig, ax = plt.subplots(figsize=(5, 3.5))
        if keys and len(rows) > 1:
            key = keys[0]
            xs = [r["params"][key] for r in rows]
            ax.plot(xs, [r["report"]["bound"] for r in rows], "o-")
            ax.set_xlabel(key)
        else:
            ax.bar([r["report"]["theorem_id"] for r in rows], [r["report"]["bound"] for r in rows])
        ax.axhline(1.0, color="grey", lw=0.8, ls="--")
        ax.set_ylabel("TV bound")
        ax.set_title(payload["scenario"])
        save(fig, "bound.png")
    elif command == "verify":
        th = payload["theoretical"]["bound"]
        lo, se = payload["empirical_lower"], payload["empirical_se"]
        fig, ax = plt.subplots(figsize=(4, 3.5))
        ax.bar(["empirical lower", "bound"], [lo, th], yerr=[3 * se, 0], capsize=4, color=["tab:blue", "tab:orange"])
        ax.set_yscale("log" if th > 0 and lo > 0 and th / lo > 100 else "linear")
        ax.set_title(payload["scenario"])
        save(fig, "verify.png")
    elif command == "discretize":
        rows = payload["rows"]
        r = [row["r_V"] for row in rows]
        ex = [row["report"]["bound"] - row["r_V"] for row in rows]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.loglog(r, ex, "o-", label=f"slope {payload['slope_log_excess_vs_log_rV']:.3f}")
        ax.set_xlabel("r_V")
        ax.set_ylabel("d2 bound - r_V")
        ax.legend()
        save(fig, "discretize.png")
    elif command == "simulate" and payload.get("burn_in_trace"):
        t, c = zip(*payload["burn_in_trace"])
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(t, c, ".-")
        ax.axhline(payload["mean_count"], color="grey", ls="--", lw=0.8)
        ax.set_xlabel("time")
        ax.set_ylabel("point count")
        save(fig, "burn_in.png")
    elif command == "couple":
        fig, ax = plt.subplots(figsize=(4, 3.5))
        ax.bar(["mean tau", "c1 bound"], [payload["mean_tau"], payload["c1"]], yerr=[3 * payload["se"], 0], capsize=4)
        save(fig, "couple.png")
    return paths
