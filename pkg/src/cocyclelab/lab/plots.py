"""Static SVG figures; fixed hash salt and no timestamp so files are reproducible."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "cocyclelab"


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def line_field(L, path, stride: int | None = None, title: str = "") -> Path:
    """Unoriented line segments of a :class:`LineField` on a thinned grid."""
    n1, n2 = L.theta.shape
    stride = stride or max(1, max(n1, n2) // 24)
    x1, x2 = L.grid_points()
    sl = (slice(None, None, stride), slice(None, None, stride))
    th = L.theta[sl]
    fig, ax = plt.subplots(figsize=(5 * L.cover[0] / max(L.cover), 5 * L.cover[1] / max(L.cover)))
    ax.quiver(x1[sl], x2[sl], np.cos(th), np.sin(th), pivot="middle", headwidth=0, headlength=0, headaxislength=0,
              color="k", width=0.003)
    ax.set_xlim(0, L.cover[0])
    ax.set_ylim(0, L.cover[1])
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(title or f"line field (residual {L.residual:.2g})")
    return _save(fig, path)


def obstructions(report, path, title: str = "") -> Path:
    """Periodic obstruction magnitude per orbit, grouped by period."""
    per = report.table.periods
    v = np.abs(report.values)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(per, np.maximum(v, 1e-17), s=4, color="k")
    ax.axhline(report.tol, color="r", lw=0.8, label="tolerance")
    ax.set_yscale("log")
    ax.set_xlabel("period")
    ax.set_ylabel("|obstruction|")
    ax.legend()
    ax.set_title(title or f"{report.kind} obstructions")
    return _save(fig, path)


def lemma_growth(rows, path, title: str = "") -> Path:
    n = [r["period"] for r in rows if r["max_c"] is not None]
    top = [r["max_c"] for r in rows if r["max_c"] is not None]
    cum = [r["max_c_cumulative"] for r in rows if r["max_c"] is not None]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(n, top, "o-", color="k", label="max c(q), least period n")
    ax.plot(n, cum, "s--", color="0.5", label="running max")
    ax.set_xlabel("period n")
    ax.set_ylabel("c(q)")
    ax.legend()
    ax.set_title(title or "growth of c(q) near a point")
    return _save(fig, path)


def ratios(periods, values, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(periods, values, s=4, color="k")
    ax.axhline(1, color="0.5", lw=0.8)
    ax.axhline(2, color="0.5", lw=0.8)
    ax.set_xlabel("period")
    ax.set_ylabel("alpha+ / beta+")
    ax.set_title(title or "periodic ratios")
    return _save(fig, path)
