"""Deterministic SVG figures.

Every artist gets a ``gid`` (``vertex-3``, ``edge-0``, ``dot-1-2``, ...) so
the output can be inspected structurally. The y axis points up.
"""

from __future__ import annotations

import io
import math
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.backends.backend_svg import FigureCanvasSVG  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Circle, Polygon  # noqa: E402

from .atbd import AlmostToricDiagram2D, edge_interior_points, is_lattice_point  # noqa: E402
from .complex import DualComplex  # noqa: E402
from .negvertex import (LN2, NegVertexConfig, amoeba_boundary, critical_points,  # noqa: E402
                        downward_flowlines)

_RC = {
    "svg.hashsalt": "fibrations",
    "svg.fonttype": "none",
    "path.simplify": False,
    "font.family": "DejaVu Sans",
}

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


@contextmanager
def _figure(size=(5.0, 5.0)) -> Iterator[Figure]:
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=size)
        FigureCanvasSVG(fig)
        yield fig


def _svg_bytes(fig: Figure) -> bytes:
    buf = io.BytesIO()
    with matplotlib.rc_context(_RC):
        fig.savefig(buf, format="svg", bbox_inches="tight", metadata={"Date": None, "Creator": None})
    return buf.getvalue()


def _write(data: bytes, path) -> bytes:
    if path is not None:
        Path(path).write_bytes(data)
    return data


def render_complex(d: DualComplex, path=None) -> bytes:
    """Vertices on a circle, edges as segments (bent when parallel), 2-cells shaded."""
    n = len(d.components)
    pos = {i: (math.cos(2 * math.pi * i / n + math.pi / 2), math.sin(2 * math.pi * i / n + math.pi / 2))
           for i in range(n)}
    with _figure() as fig:
        ax = fig.add_subplot()
        for k, cid in enumerate(d.cells_of_dim(2)):
            pts = [pos[v] for v in d.cells[cid].vertices]
            ax.add_patch(Polygon(pts, closed=True, facecolor="#dddddd", edgecolor="none", gid=f"face-{k}"))
        for k, cid in enumerate(d.cells_of_dim(1)):
            cell = d.cells[cid]
            (x0, y0), (x1, y1) = pos[cell.vertices[0]], pos[cell.vertices[1]]
            bend = 0.15 * cell.index * (-1) ** cell.index
            mx, my = (x0 + x1) / 2 - bend * (y1 - y0), (y0 + y1) / 2 + bend * (x1 - x0)
            t = np.linspace(0, 1, 21)
            xs = (1 - t) ** 2 * x0 + 2 * t * (1 - t) * mx + t ** 2 * x1
            ys = (1 - t) ** 2 * y0 + 2 * t * (1 - t) * my + t ** 2 * y1
            ax.plot(xs, ys, color="black", lw=1.5, gid=f"edge-{k}")
        for i in range(n):
            ax.plot(*pos[i], "o", color=PALETTE[i % len(PALETTE)], ms=10, gid=f"vertex-{i}")
            ax.annotate(d.components[i], pos[i], xytext=(8, 8), textcoords="offset points")
        ax.set_aspect("equal")
        ax.set_xlim(-1.4, 1.4)
        ax.set_ylim(-1.4, 1.4)
        ax.set_axis_off()
        return _write(_svg_bytes(fig), path)


def render_diagram(d: AlmostToricDiagram2D, path=None, title: str | None = None) -> bytes:
    """Edges coloured by label, dots at interior lattice points, crosses at nodes, dotted cuts."""
    labels = sorted({lab for lab in d.edge_labels if lab is not None})
    colour = {lab: PALETTE[i % len(PALETTE)] for i, lab in enumerate(labels)}
    pts = np.array([[float(x) for x in p] for p in d.polygon])
    with _figure() as fig:
        ax = fig.add_subplot()
        ax.add_patch(Polygon(pts, closed=True, facecolor="#f2f2f2", edgecolor="none", gid="interior"))
        for i, (a, b) in enumerate(d.edges):
            lab = d.edge_labels[i]
            ax.plot([float(a[0]), float(b[0])], [float(a[1]), float(b[1])],
                    color=colour.get(lab, "black"), lw=2, gid=f"edge-{i}", label=lab)
            if d.show_dots and is_lattice_point(a) and is_lattice_point(b):
                for k, q in enumerate(edge_interior_points(a, b)):
                    ax.plot(float(q[0]), float(q[1]), "o", color="black", ms=4, gid=f"dot-{i}-{k}")
        for j, node in enumerate(d.nodes):
            p = node.position
            q = d.cut_exit(j)
            ax.plot([float(p[0]), float(q[0])], [float(p[1]), float(q[1])], ls=":", color="black",
                    lw=1.5, gid=f"cut-{j}")
            ax.plot(float(p[0]), float(p[1]), "x", color="black", ms=9, mew=2, gid=f"node-{j}")
        if labels:
            ax.legend(loc="upper left", bbox_to_anchor=(1.0, 1.0), frameon=False, fontsize=8)
        if title:
            ax.set_title(title)
        ax.set_aspect("equal")
        pad = 0.5
        ax.set_xlim(pts[:, 0].min() - pad, pts[:, 0].max() + pad)
        ax.set_ylim(pts[:, 1].min() - pad, pts[:, 1].max() + pad)
        ax.grid(True, lw=0.3, color="#cccccc")
        return _write(_svg_bytes(fig), path)


def render_amoeba(cfg: NegVertexConfig | None = None, path=None, resolution: int = 400,
                  extent: float = 3.0) -> bytes:
    """Amoeba of ``u1 + u2 + 1 = 0`` with level circles of psi, critical points and flowlines."""
    cfg = cfg or NegVertexConfig()
    report = critical_points(cfg)
    with _figure((6.0, 6.0)) as fig:
        ax = fig.add_subplot()
        ax.add_patch(Polygon([(-extent, -extent), (extent, -extent), (extent, extent), (-extent, extent)],
                             closed=True, facecolor="#e8e8e8", edgecolor="none", gid="amoeba"))
        # white out the three complement components
        upper_left, lower_left, lower_right = amoeba_boundary(resolution, log_radius=extent + 1)
        ax.fill_between(upper_left[:, 0], upper_left[:, 1], extent + 1, color="white", gid="complement-0")
        ax.fill_between(lower_left[:, 0], lower_left[:, 1], -extent - 1, color="white", gid="complement-1")
        ax.fill_between(lower_right[:, 0], lower_right[:, 1], -extent - 1, color="white", gid="complement-2")
        for k, arc in enumerate((upper_left, lower_left, lower_right)):
            ax.plot(arc[:, 0], arc[:, 1], color="black", lw=1.5, gid=f"boundary-{k}")
        c = cfg.c
        for k, name in enumerate(("P1", "P2")):
            p = getattr(report, name)
            radius = math.hypot(p.R1 - c, p.R2 - c)
            ax.add_patch(Circle((c, c), radius, fill=False, ls="--", color="gray", gid=f"level-{k}"))
        for name, trace in downward_flowlines(cfg).items():
            ls = "-" if name.endswith("upper") else ":"
            ax.plot(trace.points[:, 0], trace.points[:, 1], color="#d62728", lw=1.5, ls=ls,
                    gid=f"flow-{name}")
        for name in ("P1", "P2", "P3"):
            p = getattr(report, name)
            ax.plot(p.R1, p.R2, "o", color="#1f77b4", ms=6, gid=f"critical-{name}")
            ax.annotate(name, (p.R1, p.R2), xytext=(5, 5), textcoords="offset points", color="#1f77b4")
        ax.plot(c, c, ".", color="black", gid="centre")
        ax.annotate("(c, c)", (c, c), xytext=(-1.6 + c, -0.9 + c), arrowprops={"arrowstyle": "->"})
        ax.annotate("(−ln 2, −ln 2)", (-LN2, -LN2), xytext=(-extent + 0.1, -0.3),
                    arrowprops={"arrowstyle": "->"}, gid="label-P1")
        ax.axhline(0, color="black", lw=0.5)
        ax.axvline(0, color="black", lw=0.5)
        ax.set_xlim(-extent, extent)
        ax.set_ylim(-extent, extent)
        ax.set_aspect("equal")
        ax.set_xlabel("R1")
        ax.set_ylabel("R2")
        return _write(_svg_bytes(fig), path)


def count_gids(svg: bytes | str, prefix: str) -> int:
    """Number of SVG groups whose id starts with ``prefix``."""
    text = svg.decode() if isinstance(svg, bytes) else svg
    return text.count(f'id="{prefix}')
