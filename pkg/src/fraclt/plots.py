"""Figures written next to CLI reports.  matplotlib is imported lazily and is optional."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import CapabilityError


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise CapabilityError("plotting needs matplotlib (pip install 'artifact[plot]')") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    fig.clf()
    return path


def plot_partition(partition, path) -> Path:
    """Leaves of a covering coloured by mass / lambda; d = 1 or 2 only."""
    plt = _pyplot()
    from matplotlib.collections import PatchCollection
    from matplotlib.patches import Rectangle

    d = partition.dim
    if d not in (1, 2):
        raise CapabilityError("partition plots are available for d = 1 and d = 2")
    ratio = partition.leaf_masses() / partition.lam
    fig, ax = plt.subplots(figsize=(5, 5 if d == 2 else 1.6))
    patches = []
    for i in partition.leaf_nodes:
        Q = partition.nodes[i].cube
        lo = Q.lo
        patches.append(Rectangle((lo[0], lo[1] if d == 2 else 0.0), Q.side, Q.side if d == 2 else 1.0))
    coll = PatchCollection(patches, cmap="viridis", edgecolor="k", linewidth=0.3)
    coll.set_array(ratio)
    coll.set_clim(0.0, 1.0)
    ax.add_collection(coll)
    root = partition.root
    ax.set_xlim(root.lo[0], root.hi[0])
    ax.set_ylim((root.lo[1], root.hi[1]) if d == 2 else (0, 1))
    if d == 2:
        ax.set_aspect("equal")
    else:
        ax.set_yticks([])
    fig.colorbar(coll, ax=ax, label="leaf mass / lambda")
    ax.set_title(f"k={partition.k}, lambda={partition.lam:g}, {len(partition.leaf_nodes)} leaves")
    return _save(fig, path)


def plot_sweep(rows, x: str, y: str, path, logx: bool = False, logy: bool = False) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    xs = np.array([r[x] for r in rows], dtype=float)
    ys = np.array([r[y] for r in rows], dtype=float)
    ax.plot(xs, ys, "o-", ms=3)
    ax.set_xscale("log" if logx else "linear")
    ax.set_yscale("log" if logy else "linear")
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_scaling(result, path) -> Path:
    """Best product-state quotient against the coupling with the fitted power law."""
    plt = _pyplot()
    lam = np.array([r["lambda"] for r in result.rows])
    q = np.array([r["quotient"] for r in result.rows])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(lam, q, "o", ms=4, label="best product state")
    ax.loglog(lam, np.exp(result.intercept) * lam ** result.slope, "-",
              label=f"slope {result.slope:.4f} (expected {result.expected:.4f})")
    ax.set_xlabel("lambda")
    ax.set_ylabel("quotient")
    ax.legend(frameon=False)
    ax.grid(alpha=0.3, which="both")
    return _save(fig, path)
