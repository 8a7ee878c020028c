"""Figure rendering for the CLI report paths (matplotlib, Agg backend)."""

from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .charts import profile_from_state

_STYLE = {"figure.figsize": (7.0, 5.5), "axes.grid": True, "grid.alpha": 0.25,
          "font.size": 10, "savefig.dpi": 150, "savefig.bbox": "tight"}


def render_portrait(grid, path: str):
    """Quiver of the planar field with vanishing curves and equilibria."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        pts = np.array(grid.points)
        H = np.array(grid.H)
        if len(pts):
            mag = np.hypot(H[:, 0], H[:, 1]) + 1e-300
            ax.quiver(pts[:, 0], pts[:, 1], H[:, 0] / mag, H[:, 1] / mag, mag,
                      cmap="viridis", width=2.4e-3, alpha=0.75, norm=None)
        colors = {"L": "k", "C1": "tab:red", "C4": "tab:orange"}
        for name, curve in grid.rmap.curves.items():
            if not curve:
                continue
            c = np.array(curve)
            ax.plot(c[:, 0], c[:, 1], color=colors.get(name, "gray"), lw=1.6,
                    label=name)
        for (x, y) in grid.rmap.equilibria:
            ax.plot([x], [y], "o", color="tab:blue", ms=7, mec="k")
        xmin, xmax, ymin, ymax = grid.rmap.bbox
        ax.set_xlim(max(xmin, 0.0), xmax)
        ax.set_ylim(ymin, ymax)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        p = grid.rmap.params
        ax.set_title(f"case {grid.rmap.case}: N={p.N:g}, p={p.p:g}, M={p.M:g}")
        ax.legend(loc="upper left", fontsize=8)
        fig.savefig(path)
        plt.close(fig)


def render_trajectory(traj, path: str):
    """Component series plus the reconstructed radial profile."""
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(10.5, 4.4))
        ts = np.array(traj.times)
        Y = np.array(traj.states)
        from .charts import get_chart
        names = get_chart(traj.chart).components if traj.chart in \
            ("planar_W4", "emden_U2", "riccati_U5", "eikonal_U9",
             "order3_N1", "order3_M2_desing") else None
        for j in range(Y.shape[1]):
            lbl = names[j] if names else f"y{j}"
            axes[0].plot(ts, Y[:, j], label=lbl)
        axes[0].set_xlabel("t = ln r" if names else "t")
        axes[0].legend(fontsize=8)
        axes[0].set_title(f"{traj.chart}; event: {traj.event.kind}")
        if names and traj.params is not None:
            rs, us = [], []
            for t, s in zip(traj.times, traj.states):
                r, u, _ = profile_from_state(traj.chart, t, s, traj.params)
                if u > 0 and math.isfinite(u):
                    rs.append(r)
                    us.append(u)
            if rs:
                axes[1].loglog(rs, us)
            axes[1].set_xlabel("r")
            axes[1].set_ylabel("u(r)")
            axes[1].set_title("reconstructed profile")
        fig.savefig(path)
        plt.close(fig)


def render_shoot(result, path: str):
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        if result.trajectory is not None:
            Y = np.array(result.trajectory.states)
            ax.plot(Y[:, 0], Y[:, 1], lw=1.4)
        ax.plot([result.source[0]], [result.source[1]], "s", color="tab:green",
                ms=8, label="source")
        ax.plot([result.target[0]], [result.target[1]], "o", color="tab:red",
                ms=8, label="target")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        status = "connected" if result.success else "no connection"
        ax.set_title(f"{status}; distance {result.terminal_distance:.2e} "
                     f"({result.method})")
        ax.legend(fontsize=8)
        fig.savefig(path)
        plt.close(fig)


PORTRAIT_SCRIPT = """\
#!/usr/bin/env python3
# Companion plotting script: renders the exported portrait CSV/JSON.
# Usage: python plot_portrait.py field.csv portrait.json [out.png]
import json, sys
import matplotlib.pyplot as plt
import numpy as np

csv_path, json_path = sys.argv[1], sys.argv[2]
out = sys.argv[3] if len(sys.argv) > 3 else "portrait_replot.png"
data = np.genfromtxt(csv_path, delimiter=",", names=True, dtype=None,
                     encoding="utf-8")
side = json.load(open(json_path))
fig, ax = plt.subplots(figsize=(7, 5.5))
mag = np.hypot(data["H1"], data["H2"]) + 1e-300
ax.quiver(data["x"], data["y"], data["H1"]/mag, data["H2"]/mag, mag,
          cmap="viridis", width=2.4e-3, alpha=0.75)
for name, curve in side["curves"].items():
    c = np.array(curve)
    if len(c):
        ax.plot(c[:, 0], c[:, 1], lw=1.6, label=name)
for x, y in side["equilibria"]:
    ax.plot([x], [y], "o", ms=7, mec="k")
ax.set_xlabel("x"); ax.set_ylabel("y"); ax.legend()
ax.set_title("case " + side["case"])
fig.savefig(out, dpi=150, bbox_inches="tight")
print("wrote", out)
"""
