"""Deterministic renderers: SVG and PGM plots, DOT graph exports.

Rendering is pure: the same inputs yield byte-identical output, and every
file embeds a metadata comment (parameters, not wall-clock anything).
Time runs downward in all space-time views.  State 0 renders dark and
state 1 light.

The pixmap renderers use exact arithmetic for their geometry: with
time_scale s pixels per time unit, pixel row r samples the instant
t0 + r/s, and a memory interval [a, b) owns exactly the rows with
a <= t0 + r/s < b.  That makes the plots point-samplable: reading a pixel
back answers "which state was cell i holding at this instant", which the
test-suite cross-checks against the state query API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ._version import __version__
from .ca import AsyncRun, StateTransitionGraph, state_to_string
from .errors import DimensionError, TropicalError
from .semiring import Scalar, format_scalar, is_eps
from .spectral import CriticalGraph, PrecedenceGraph
from .trajectory import Trajectory


@dataclass(frozen=True)
class PlotSpec:
    """Geometry and palette shared by the renderers.

    time_scale: pixels per time unit (vertical), default 2.
    cell_px: pixels per cell (horizontal).
    """

    time_scale: int = 2
    cell_px: int = 8
    margin: int = 12
    color0: str = "#20242c"
    color1: str = "#f2ead7"
    background: str = "#ffffff"
    contour_color: str = "#c03a2b"
    gray0: int = 0
    gray1: int = 255
    gray_bg: int = 127
    metadata: tuple = ()  # sorted (key, value) pairs baked into the output

    def with_metadata(self, mapping) -> "PlotSpec":
        items = tuple(sorted((str(k), str(v)) for k, v in dict(mapping).items()))
        return PlotSpec(
            self.time_scale,
            self.cell_px,
            self.margin,
            self.color0,
            self.color1,
            self.background,
            self.contour_color,
            self.gray0,
            self.gray1,
            self.gray_bg,
            items,
        )


def _fmt(v: Scalar) -> str:
    """Deterministic coordinate text: ints bare, rationals via repr of the
    exact float conversion, floats via repr."""
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return repr(float(v))
    return repr(v)


def _svg_header(width, height, ps: PlotSpec) -> list:
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        _comment_svg(ps),
        f'<rect x="0" y="0" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'fill="{ps.background}"/>',
    ]
    return lines


def _comment_svg(ps: PlotSpec) -> str:
    parts = [f"tropical-ca {__version__}"]
    parts += [f"{k}={v}" for k, v in ps.metadata]
    return "<!-- " + " | ".join(parts) + " -->"


def _comment_lines(ps: PlotSpec, prefix: str) -> list:
    lines = [f"{prefix} tropical-ca {__version__}"]
    lines += [f"{prefix} {k}: {v}" for k, v in ps.metadata]
    return lines


def _ceil_exact(v) -> int:
    return math.ceil(v)


def _times_extent(states) -> tuple:
    lo = min(min(x) for x in states)
    hi = max(max(x) for x in states)
    return lo, hi


# -- contour plots -------------------------------------------------------------


def contour_plot(traj: Trajectory, ps: PlotSpec, states=None) -> str:
    """Polyline per cycle k through the points (cell i, x_i(k)), time
    downward.  With CA states given, each vertex carries a state marker.
    A single-cell system degenerates to a column of markers."""
    n = traj.size
    if states is not None and len(states) != len(traj.states):
        raise DimensionError("one CA state per contour required")
    t0, t1 = _times_extent(traj.states)
    width = 2 * ps.margin + (n - 1) * ps.cell_px
    height = 2 * ps.margin + (t1 - t0) * ps.time_scale

    def xpix(i):
        return ps.margin + i * ps.cell_px

    def ypix(t):
        return ps.margin + (t - t0) * ps.time_scale

    lines = _svg_header(width, height, ps)
    for k, x in enumerate(traj.states):
        pts = " ".join(f"{_fmt(xpix(i))},{_fmt(ypix(x[i]))}" for i in range(n))
        if n > 1:
            lines.append(
                f'<polyline points="{pts}" fill="none" '
                f'stroke="{ps.contour_color}" stroke-width="1"/>'
            )
        if states is not None:
            for i in range(n):
                fill = ps.color1 if states[k][i] else ps.color0
                lines.append(
                    f'<circle cx="{_fmt(xpix(i))}" cy="{_fmt(ypix(x[i]))}" '
                    f'r="3" fill="{fill}" stroke="#555555" stroke-width="0.5"/>'
                )
        elif n == 1:
            lines.append(
                f'<circle cx="{_fmt(xpix(0))}" cy="{_fmt(ypix(x[0]))}" '
                f'r="2" fill="{ps.contour_color}"/>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# -- asynchronous space-time ---------------------------------------------------


def spacetime_async(run: AsyncRun, ps: PlotSpec, stage: str = "plain") -> str:
    """Memory blocks of an asynchronous run as SVG.

    stage "plain": filled hold intervals only (the finished picture).
    stage "contours": hold intervals with the update contours overlaid.
    """
    if stage not in ("plain", "contours"):
        raise ValueError(f"unknown stage {stage!r}")
    n = run.spec.size
    traj = run.trajectory
    t0, t1 = _times_extent(traj.states)
    width = 2 * ps.margin + n * ps.cell_px
    height = 2 * ps.margin + (t1 - t0) * ps.time_scale

    def ypix(t):
        return ps.margin + (t - t0) * ps.time_scale

    lines = _svg_header(width, height, ps)
    for i in range(n):
        x = ps.margin + i * ps.cell_px
        for (a, b, bit) in run.hold_intervals(i):
            fill = ps.color1 if bit else ps.color0
            lines.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(ypix(a))}" '
                f'width="{ps.cell_px}" height="{_fmt((b - a) * ps.time_scale)}" '
                f'fill="{fill}"/>'
            )
    if stage == "contours":
        half = Fraction(ps.cell_px, 2)
        for x_vec in traj.states:
            pts = " ".join(
                f"{_fmt(ps.margin + i * ps.cell_px + half)},{_fmt(ypix(x_vec[i]))}"
                for i in range(n)
            )
            lines.append(
                f'<polyline points="{pts}" fill="none" '
                f'stroke="{ps.contour_color}" stroke-width="1"/>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def spacetime_async_pixmap(run: AsyncRun, ps: PlotSpec) -> str:
    """PGM (P2) raster of the memory blocks, exactly point-samplable.

    Pixel row r of cell column c answers: what did cell (c // cell_px)
    hold at time t0 + r / time_scale?  Rows outside a cell's computed
    window stay at the background gray.
    """
    n = run.spec.size
    traj = run.trajectory
    t0, _ = _times_extent(traj.states)
    t1 = max(run.update_times(i)[run.k_max] for i in range(n))
    s = ps.time_scale
    height = max(1, _ceil_exact((t1 - t0) * s))
    width = n * ps.cell_px
    grid = [[ps.gray_bg] * width for _ in range(height)]
    for i in range(n):
        for (a, b, bit) in run.hold_intervals(i):
            r_lo = _ceil_exact((a - t0) * s)
            r_hi = _ceil_exact((b - t0) * s)  # exclusive
            gray = ps.gray1 if bit else ps.gray0
            for r in range(r_lo, min(r_hi, height)):
                row = grid[r]
                for c in range(i * ps.cell_px, (i + 1) * ps.cell_px):
                    row[c] = gray
    lines = ["P2"]
    lines += _comment_lines(ps, "#")
    lines.append(f"{width} {height}")
    lines.append("255")
    lines += [" ".join(str(v) for v in row) for row in grid]
    return "\n".join(lines) + "\n"


def pixmap_parse(text: str):
    """Read back a P2 pixmap as (width, height, rows)."""
    tokens = []
    for line in text.splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            tokens += body.split()
    if tokens[0] != "P2":
        raise ValueError("not a P2 pixmap")
    width, height, _maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    values = [int(t) for t in tokens[4:]]
    if len(values) != width * height:
        raise ValueError("pixmap size mismatch")
    rows = [values[r * width : (r + 1) * width] for r in range(height)]
    return width, height, rows


# -- synchronous space-time ----------------------------------------------------


def spacetime_sync(states, ps: PlotSpec) -> str:
    """Classical CA diagram: one row of square cells per step, downward."""
    if not states:
        raise DimensionError("need at least one state")
    n = len(states[0])
    width = 2 * ps.margin + n * ps.cell_px
    height = 2 * ps.margin + len(states) * ps.cell_px
    lines = _svg_header(width, height, ps)
    for k, s in enumerate(states):
        y = ps.margin + k * ps.cell_px
        for i, bit in enumerate(s):
            fill = ps.color1 if bit else ps.color0
            x = ps.margin + i * ps.cell_px
            lines.append(
                f'<rect x="{x}" y="{y}" width="{ps.cell_px}" '
                f'height="{ps.cell_px}" fill="{fill}"/>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def spacetime_sync_pixmap(states, ps: PlotSpec) -> str:
    """One pixel per cell per step (row k = state s(k))."""
    if not states:
        raise DimensionError("need at least one state")
    n = len(states[0])
    lines = ["P2"]
    lines += _comment_lines(ps, "#")
    lines.append(f"{n} {len(states)}")
    lines.append("255")
    for s in states:
        lines.append(" ".join(str(ps.gray1 if b else ps.gray0) for b in s))
    return "\n".join(lines) + "\n"


# -- graph exports ---------------------------------------------------------------


def stg_dot(stg: StateTransitionGraph, ps: PlotSpec = PlotSpec()) -> str:
    """State transition graph in DOT; attractor states and the arcs along
    each attractor cycle are drawn bold."""
    lines = ["digraph stg {"]
    lines += _comment_lines(ps, "  //")
    lines.append("  rankdir=TB;")
    lines.append('  node [shape=box, fontname="monospace"];')
    for code in range(1 << stg.size):
        label = state_to_string(stg.decode(code))
        style = ', penwidth=2, color="#c03a2b"' if stg.on_attractor[code] else ""
        lines.append(f'  "{label}" [label="{label}"{style}];')
    for code in range(1 << stg.size):
        src = state_to_string(stg.decode(code))
        dst = state_to_string(stg.decode(stg.successors[code]))
        style = ' [penwidth=2, color="#c03a2b"]' if stg.on_attractor[code] else ""
        lines.append(f'  "{src}" -> "{dst}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def build_event_dag(run: AsyncRun, k_lo: int, k_hi: int):
    """Events and covering pairs of the happened-before order.

    Events: one send per cell per cycle in [k_lo, k_hi] (the instant
    processing completes and the new state is published) and one receive
    per cell per cycle in (k_lo, k_hi] (the instant the last awaited
    message arrives).  Receive times are recomputed from the message
    arrivals, not read off the trajectory.

    Arcs: send_j(k-1) -> receive_i(k) for each arc j -> i (a message,
    labelled with its tau), and receive_i(k) -> send_i(k) (processing,
    labelled with xi_i).

    Returns (events, arcs): events maps id -> (kind, cell, cycle, time);
    arcs is a list of (from_id, to_id, label).
    """
    if not (0 <= k_lo <= k_hi <= run.k_max):
        raise ValueError(f"cycle range [{k_lo}, {k_hi}] outside run 0..{run.k_max}")
    n = run.spec.size
    tau = run.params.tau
    times = run.trajectory.states
    events = {}
    arcs = []
    for k in range(k_lo, k_hi + 1):
        for i in range(n):
            events[f"s{i + 1}_{k}"] = ("send", i, k, times[k][i])
    for k in range(max(k_lo + 1, 1), k_hi + 1):
        for i in range(n):
            preds = run.spec.predecessors(i)
            receive = max(times[k - 1][j] + tau[(i, j)] for j in preds)
            events[f"r{i + 1}_{k}"] = ("receive", i, k, receive)
            for j in preds:
                arcs.append(
                    (
                        f"s{j + 1}_{k - 1}",
                        f"r{i + 1}_{k}",
                        f"tau={format_scalar(tau[(i, j)])}",
                    )
                )
            arcs.append(
                (
                    f"r{i + 1}_{k}",
                    f"s{i + 1}_{k}",
                    f"xi={format_scalar(run.params.xi[i])}",
                )
            )
    return events, arcs


def event_dag_dot(run: AsyncRun, k_lo: int, k_hi: int, ps: PlotSpec = PlotSpec()) -> str:
    """DOT rendering of the event DAG with timestamps in the labels."""
    events, arcs = build_event_dag(run, k_lo, k_hi)
    lines = ["digraph events {"]
    lines += _comment_lines(ps, "  //")
    lines.append("  rankdir=TB;")
    for eid in sorted(events):
        kind, cell, cycle, t = events[eid]
        shape = "ellipse" if kind == "send" else "box"
        label = f"{kind} cell {cell + 1} cycle {cycle}\\nt={format_scalar(t)}"
        lines.append(f'  "{eid}" [shape={shape}, label="{label}"];')
    for (a, b, label) in arcs:
        lines.append(f'  "{a}" -> "{b}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def critical_graph_dot(
    graph: PrecedenceGraph, crit: CriticalGraph, ps: PlotSpec = PlotSpec()
) -> str:
    """Precedence graph with the critical subgraph highlighted."""
    if graph.node_count != crit.node_count:
        raise DimensionError("graph and critical graph sizes differ")
    critical_nodes = set(crit.nodes)
    critical_arcs = set(crit.arcs)
    lines = ["digraph precedence {"]
    lines += _comment_lines(ps, "  //")
    for v in range(graph.node_count):
        style = ', penwidth=2, color="#c03a2b"' if v in critical_nodes else ""
        lines.append(f'  "{v + 1}" [shape=circle{style}];')
    for (j, i, w) in graph.arcs:
        style = (
            ', penwidth=2, color="#c03a2b"' if (j, i) in critical_arcs else ""
        )
        lines.append(
            f'  "{j + 1}" -> "{i + 1}" [label="{format_scalar(w)}"{style}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
