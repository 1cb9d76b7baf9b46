"""The explicit triply periodic surface built from (a, b, c), its sections by
planes x2 = s, and the empirical diffusion exponent of a traced section.

Geometry is exact: plates, holes, walls and lattice vectors are rationals.
A section at a generic level is a disjoint union of axis-parallel segments in
the (x1, x3) plane that stitch into 1-manifold polylines: horizontal runs
along the two plate levels of each period interrupted by vertical wall
crossings of height exactly 1/2.  The tracer walks this structure with O(1)
exact work per event; section_segments exposes the per-cell segment list so
the walk can be cross-checked against generic endpoint stitching.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

Frac = Fraction
Cell = Tuple[int, int, int]

FIFTH = Fraction(1, 5)
QUarter = Fraction(1, 4)


class BadParameters(ValueError):
    """build_surface needs a > b > c > 0 with a + b + c = 1."""


class DegenerateLevel(ValueError):
    """The plane level hits a feature boundary of the cell exactly."""

    def __init__(self, cell, feature: str):
        super().__init__(f"degenerate level at cell {cell}: {feature}")
        self.cell = cell
        self.feature = feature


class JunctionAnomaly(RuntimeError):
    """Continuation at a junction was not unique (degenerate level)."""


class ToleranceFailure(RuntimeError):
    """Stitching fell below the requested tolerance."""


class TooShort(ValueError):
    """Trace too short for a diffusion-exponent fit."""


@dataclass(frozen=True)
class SurfaceModel:
    """Plates, holes, walls and lattice of the triply periodic surface."""

    a: Fraction
    b: Fraction
    c: Fraction

    @property
    def lattice(self) -> Tuple[tuple, tuple, tuple]:
        a, b, c = self.a, self.b, self.c
        return ((Frac(1), -b - c, Frac(0)),
                (Frac(1), a + c, Frac(0)),
                (Frac(0), a + b, Frac(1)))

    @property
    def rectangles(self) -> Dict[str, Tuple[tuple, tuple]]:
        """T1..T4 as ((x1_lo, x1_hi), (x2_lo, x2_hi)) in cell coordinates."""
        a, b, c = self.a, self.b, self.c
        return {
            "T1": ((Frac(0), Frac(1)), (Frac(0), a + b + 2 * c)),
            "T2": ((FIFTH, 2 * FIFTH), (Frac(0), c)),
            "T3": ((3 * FIFTH, 4 * FIFTH), (a, a + c)),
            "T4": ((FIFTH, 2 * FIFTH), (a + b, a + b + c)),
        }

    @property
    def plates(self) -> List[dict]:
        r = self.rectangles
        return [
            {"height": Fraction(1, 4), "outer": r["T1"], "holes": {"T2": r["T2"], "T3": r["T3"]}},
            {"height": Fraction(3, 4), "outer": r["T1"], "holes": {"T3": r["T3"], "T4": r["T4"]}},
        ]

    @property
    def walls(self) -> List[dict]:
        r = self.rectangles
        return [
            {"tube": "T2", "rect": r["T2"], "x3": (Frac(0), Fraction(1, 4))},
            {"tube": "T3", "rect": r["T3"], "x3": (Fraction(1, 4), Fraction(3, 4))},
            {"tube": "T4", "rect": r["T4"], "x3": (Fraction(3, 4), Frac(1))},
        ]

    def cell_offset(self, cell: Cell) -> Tuple[Fraction, Fraction, Fraction]:
        m1, m2, m3 = cell
        e1, e2, e3 = self.lattice
        return tuple(m1 * e1[i] + m2 * e2[i] + m3 * e3[i] for i in range(3))


def build_surface(a, b, c) -> SurfaceModel:
    """Exact surface model; parameters must satisfy a > b > c > 0, sum 1."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    if not (a > b > c > 0):
        raise BadParameters(f"need a > b > c > 0, got {(a, b, c)}")
    if a + b + c != 1:
        raise BadParameters(f"need a + b + c = 1, got {a + b + c}")
    model = SurfaceModel(a, b, c)
    for name, ((x_lo, x_hi), (y_lo, y_hi)) in model.rectangles.items():
        if name != "T1" and not (0 <= x_lo < x_hi <= 1 and 0 <= y_lo < y_hi <= 1):
            raise BadParameters(f"{name} escapes the unit square")
    return model


# ---------------------------------------------------------------------------
# Per-cell section segments (generic interface)


@dataclass(frozen=True)
class Segment:
    axis: str                      # "x1" (horizontal) or "x3" (vertical)
    fixed: Fraction                # x3 of a horizontal / x1 of a vertical
    lo: Fraction
    hi: Fraction
    provenance: Tuple[str, Cell]

    @property
    def endpoints(self) -> Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]:
        if self.axis == "x1":
            return ((self.lo, self.fixed), (self.hi, self.fixed))
        return ((self.fixed, self.lo), (self.fixed, self.hi))

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo


def _hole_windows(model: SurfaceModel, height: Fraction):
    a, b, c = model.a, model.b, model.c
    if height == Fraction(1, 4):
        return [("T2", Frac(0), c, (FIFTH, 2 * FIFTH)),
                ("T3", a, a + c, (3 * FIFTH, 4 * FIFTH))]
    return [("T3", a, a + c, (3 * FIFTH, 4 * FIFTH)),
            ("T4", a + b, Frac(1), (FIFTH, 2 * FIFTH))]


def section_segments(model: SurfaceModel, s, cell: Cell) -> List[Segment]:
    """Axis-parallel segments contributed by one translated fundamental domain
    to the section x2 = s.  Exact; raises DegenerateLevel when s sits on a
    feature boundary of this cell."""
    s = Fraction(s)
    a, b, c = model.a, model.b, model.c
    v1, v2, v3 = model.cell_offset(cell)
    u = s - v2
    segs: List[Segment] = []

    boundaries = {
        "plate edge": (Frac(0), 1 + c),
        "T2 edge": (Frac(0), c),
        "T3 edge": (a, a + c),
        "T4 edge": (a + b, Frac(1)),
    }
    for name, (lo, hi) in boundaries.items():
        if u == lo or u == hi:
            raise DegenerateLevel(cell, name)

    if not (0 < u < 1 + c):
        return segs

    for plate in model.plates:
        h = plate["height"]
        x3 = v3 + h
        cuts: List[Tuple[Fraction, Fraction]] = []
        for hole, w_lo, w_hi, (x_lo, x_hi) in _hole_windows(model, h):
            if w_lo < u < w_hi:
                cuts.append((v1 + x_lo, v1 + x_hi))
        cuts.sort()
        left = v1 + 0
        for c_lo, c_hi in cuts:
            segs.append(Segment("x1", x3, left, c_lo, ("plate", cell)))
            left = c_hi
        segs.append(Segment("x1", x3, left, v1 + 1, ("plate", cell)))

    wall_ranges = {
        "T2": (Frac(0), c, (FIFTH, 2 * FIFTH), (v3, v3 + Fraction(1, 4))),
        "T3": (a, a + c, (3 * FIFTH, 4 * FIFTH), (v3 + Fraction(1, 4), v3 + Fraction(3, 4))),
        "T4": (a + b, Frac(1), (FIFTH, 2 * FIFTH), (v3 + Fraction(3, 4), v3 + 1)),
    }
    for tube, (w_lo, w_hi, (x_lo, x_hi), (z_lo, z_hi)) in wall_ranges.items():
        if w_lo < u < w_hi:
            segs.append(Segment("x3", v1 + x_lo, z_lo, z_hi, (f"wall {tube}", cell)))
            segs.append(Segment("x3", v1 + x_hi, z_lo, z_hi, (f"wall {tube}", cell)))
    return segs


# ---------------------------------------------------------------------------
# The tracer


@dataclass
class Trace:
    s: float
    vertices: np.ndarray           # (N, 2) float: (x1, x3)
    arclengths: np.ndarray         # (N,) cumulative, strictly increasing
    start_index: int
    seed_cell: Cell
    status: str                    # completed | closed-loop | tolerance-failure

    def series_from_start(self, direction: int = +1):
        """(t, positions) along one direction from the start vertex."""
        if direction >= 0:
            verts = self.vertices[self.start_index:]
            ts = self.arclengths[self.start_index:] - self.arclengths[self.start_index]
        else:
            verts = self.vertices[self.start_index::-1]
            ts = self.arclengths[self.start_index] - self.arclengths[self.start_index::-1]
        return ts, verts

    def total_arclength(self, direction: int = +1) -> float:
        ts, _ = self.series_from_start(direction)
        return float(ts[-1]) if len(ts) else 0.0


@dataclass
class _WalkState:
    cell: Cell
    height: Fraction              # 1/4 or 3/4
    u: Fraction
    x: Fraction
    direction: int                # +1 or -1

    def key(self):
        return (self.cell, self.height, self.x, self.direction)


def _active_hole(model: SurfaceModel, height: Fraction, u: Fraction,
                 tol: Optional[Fraction] = None):
    """(tube, x_span, vertical_move) of the unique active hole, or None.

    vertical_move: ("up" | "down", cell_shift_e3, new_height).  With a
    tolerance, levels within tol of a hole-window boundary are rejected.
    """
    a, b, c = model.a, model.b, model.c
    if height == Fraction(1, 4):
        windows = (Frac(0), c, a, a + c)
    else:
        windows = (a, a + c, a + b, Frac(1))
    if tol is not None:
        for w in windows:
            if abs(u - w) <= tol:
                raise JunctionAnomaly(f"level within tolerance of hole boundary u = {u}")
    elif u in windows:
        raise JunctionAnomaly(f"level on hole boundary, u = {u}")
    if height == Fraction(1, 4):
        if 0 < u < c:
            return ("T2", (FIFTH, 2 * FIFTH), ("down", -1, Fraction(3, 4)))
        if a < u < a + c:
            return ("T3", (3 * FIFTH, 4 * FIFTH), ("up", 0, Fraction(3, 4)))
    else:
        if a < u < a + c:
            return ("T3", (3 * FIFTH, 4 * FIFTH), ("down", 0, Fraction(1, 4)))
        if a + b < u < 1:
            return ("T4", (FIFTH, 2 * FIFTH), ("up", +1, Fraction(1, 4)))
    return None


def locate_start(model: SurfaceModel, s, x1, x3) -> _WalkState:
    """Resolve the plate point (x1, x3) on the section x2 = s to a walk state."""
    s = Fraction(s)
    x1 = Fraction(x1)
    x3 = Fraction(x3)
    a, b, c = model.a, model.b, model.c
    frac3 = x3 - int(math.floor(x3))
    if frac3 == Fraction(1, 4):
        height = Fraction(1, 4)
    elif frac3 == Fraction(3, 4):
        height = Fraction(3, 4)
    else:
        raise ValueError(f"start x3 = {x3} is not on a plate level")
    m3 = int(x3 - height)
    p = int(math.floor(x1))
    period = 1 + c
    # v2 = -(b+c) p + (1+c) m2 + (a+b) m3 and we need 0 < s - v2 < 1+c
    t = s + (b + c) * p - (a + b) * m3
    m2 = int(t // period)
    if t == m2 * period:
        raise JunctionAnomaly("start level coincides with a plate edge")
    cell = (p - m2, m2, m3)
    v1, v2, v3 = model.cell_offset(cell)
    u = s - v2
    assert 0 < u < period and v1 == p and v3 == m3
    hole = _active_hole(model, height, u)
    if hole is not None:
        lo, hi = hole[1]
        if v1 + lo <= x1 <= v1 + hi:
            raise ValueError(f"start point {x1} lies on/in the {hole[0]} hole span")
    return _WalkState(cell, height, u, x1, +1)


def _walk(model: SurfaceModel, state: _WalkState, max_arclength: float,
          tolerance: float, max_events: int = 50_000_000):
    """Walk one direction; yields (vertex, kind) turn events.

    Returns (vertices, status): vertices include the final partial position.
    """
    a, b, c = model.a, model.b, model.c
    period = 1 + c
    tol = Fraction(tolerance).limit_denominator(10**12)
    cell = list(state.cell)
    height = state.height
    u = state.u
    x = state.x
    d = state.direction
    x3 = Fraction(cell[2]) + height
    verts: List[Tuple[Fraction, Fraction]] = []
    arclen = Fraction(0)
    anchor = None  # first event-anchored state; recurrence means a closed loop

    def guard(value: Fraction, name: str):
        if abs(value) <= tol:
            raise JunctionAnomaly(f"{name} within tolerance of a boundary")

    events = 0
    while float(arclen) < max_arclength and events < max_events:
        events += 1
        key = (tuple(cell), height, x, d)
        if events == 2:
            anchor = key
        elif events > 2 and key == anchor:
            verts.append((x, x3))
            return verts, arclen, "closed-loop"
        hole = _active_hole(model, height, u, tol)
        v1 = cell[0] + cell[1]
        target = None
        if hole is not None:
            lo, hi = hole[1]
            wall_lo, wall_hi = v1 + lo, v1 + hi
            if d > 0 and x < wall_lo:
                target = wall_lo
            elif d < 0 and x > wall_hi:
                target = wall_hi
        if target is not None:
            # run to the hole rim, then cross the tube vertically
            arclen += abs(target - x)
            x = target
            verts.append((x, x3))
            move, shift, new_height = hole[2]
            dz = Fraction(1, 2) if move == "up" else Fraction(-1, 2)
            x3 = x3 + dz
            arclen += Fraction(1, 2)
            verts.append((x, x3))
            cell[2] += shift
            u = u - (a + b) * shift
            height = new_height
            d = -d
            continue
        # otherwise cross into the neighbor column
        if d > 0:
            edge = Fraction(v1 + 1)
            arclen += edge - x
            x = edge
            guard(u - (a + c), "column crossing")
            if u < a + c:
                cell[0] += 1
                u = u + (b + c)
            else:
                cell[1] += 1
                u = u - (a + c)
        else:
            edge = Fraction(v1)
            arclen += x - edge
            x = edge
            guard(u - (b + c), "column crossing")
            if u < b + c:
                cell[1] -= 1
                u = u + (a + c)
            else:
                cell[0] -= 1
                u = u - (b + c)
        guard(u, "plate edge")
        guard(u - period, "plate edge")
    verts.append((x, x3))
    return verts, arclen, "completed"


def trace(model: SurfaceModel, s, start: Tuple, max_arclength: float,
          tolerance: float = 1e-9) -> Trace:
    """Trace the section component through ``start`` in both directions.

    ``start`` is a point (x1, x3) on a plate segment of the section x2 = s.
    Walks until each direction accumulates max_arclength, the component
    closes, or a junction anomaly surfaces (raised to the caller, who may
    redraw s).
    """
    st = locate_start(model, s, start[0], start[1])
    x30 = Fraction(st.cell[2]) + st.height

    fwd = _WalkState(tuple(st.cell), st.height, st.u, st.x, +1)
    back = _WalkState(tuple(st.cell), st.height, st.u, st.x, -1)
    fv, flen, fstatus = _walk(model, fwd, max_arclength, tolerance)
    if fstatus == "closed-loop":
        bv, bstatus = [], "closed-loop"
    else:
        bv, blen, bstatus = _walk(model, back, max_arclength, tolerance)

    pts: List[Tuple[Fraction, Fraction]] = [p for p in reversed(bv)] + [(st.x, x30)] + fv
    verts = np.array([[float(p[0]), float(p[1])] for p in pts])
    deltas = np.abs(np.diff(verts, axis=0)).sum(axis=1)
    ts = np.concatenate([[0.0], np.cumsum(deltas)])
    status = "closed-loop" if fstatus == "closed-loop" else (
        "completed" if (fstatus == bstatus == "completed") else "tolerance-failure")
    return Trace(float(s), verts, ts, len(bv), tuple(st.cell), status)


# ---------------------------------------------------------------------------
# Diffusion exponent


def displacement_series(tr: Trace, direction: int = +1):
    """(t_i, d_i) at the trace vertices along one direction from the start."""
    ts, verts = tr.series_from_start(direction)
    d = np.hypot(verts[:, 0] - verts[0, 0], verts[:, 1] - verts[0, 1])
    return ts, d


def dyadic_running_max(tr: Trace, direction: int = +1, t_min: float = 1.0):
    """Running max of d(x, x_t) sampled at dyadic arclengths t = t_min 2^k."""
    ts, verts = tr.series_from_start(direction)
    if len(ts) < 2:
        raise TooShort("empty trace direction")
    total = float(ts[-1])
    x0 = verts[0]
    out_t, out_m = [], []
    t = t_min
    run = 0.0
    i = 1
    while t <= total:
        while i < len(ts) and ts[i] <= t:
            run = max(run, float(np.hypot(*(verts[i] - x0))))
            i += 1
        if i < len(ts):
            # interpolate the position at exactly t on the segment i-1 -> i
            f = (t - ts[i - 1]) / (ts[i] - ts[i - 1])
            p = verts[i - 1] + f * (verts[i] - verts[i - 1])
            cand = float(np.hypot(*(p - x0)))
        else:
            cand = 0.0
        out_t.append(t)
        out_m.append(max(run, cand))
        t *= 2.0
    return np.array(out_t), np.array(out_m)


def diffusion_exponent(tr: Trace, direction: int = 0, t_min: float = 1.0):
    """Least-squares slope of log running-max displacement vs log t over the
    upper half of the dyadic range; returns (nu_hat, diagnostics).

    direction +1 or -1 measures one side of the leaf; 0 (default) takes the
    pointwise max of both one-sided running maxima, the limsup surrogate for
    the whole leaf through the start point.
    """
    sides = [direction] if direction in (+1, -1) else [+1, -1]
    curves = []
    for d in sides:
        ts, _ = tr.series_from_start(d)
        if len(ts) >= 2 and ts[-1] >= 2 * t_min:
            curves.append(dyadic_running_max(tr, d, t_min))
    if not curves:
        raise TooShort("trace has no usable direction")
    if max(float(t[-1]) for t, _ in curves) < 1e3:
        raise TooShort(f"arclength {max(float(t[-1]) for t, _ in curves):.3g} < 1e3")
    if len(curves) == 2:
        k = min(len(curves[0][0]), len(curves[1][0]))
        t_dy = curves[0][0][:k]
        m_dy = np.maximum(curves[0][1][:k], curves[1][1][:k])
    else:
        t_dy, m_dy = curves[0]
    keep = m_dy > 0
    t_dy, m_dy = t_dy[keep], m_dy[keep]
    lo = len(t_dy) // 2
    xs = np.log(t_dy[lo:])
    ys = np.log(m_dy[lo:])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    diag = {
        "n_points": int(len(xs)),
        "t_range": (float(t_dy[lo]), float(t_dy[-1])),
        "rms_residual": float(np.sqrt(np.mean(resid ** 2))),
        "direction": direction,
        "running_max": [list(map(float, t_dy)), list(map(float, m_dy))],
    }
    return float(slope), diag


def synthetic_trace(vertices: Sequence[Tuple[float, float]], s: float = 0.0) -> Trace:
    """Trace object from an explicit polyline (for tracer soundness checks)."""
    verts = np.asarray(vertices, dtype=float)
    deltas = np.abs(np.diff(verts, axis=0)).sum(axis=1)
    ts = np.concatenate([[0.0], np.cumsum(deltas)])
    return Trace(s, verts, ts, 0, (0, 0, 0), "completed")


# ---------------------------------------------------------------------------
# Export


def export_trace(tr: Trace, path: str, fmt: str = "csv") -> None:
    """CSV columns (t, x1, x3, d) from the start along the forward direction,
    or an SVG polyline of the whole trace."""
    try:
        if fmt == "csv":
            ts, verts = tr.series_from_start(+1)
            d = np.hypot(verts[:, 0] - verts[0, 0], verts[:, 1] - verts[0, 1])
            with open(path, "w") as fh:
                fh.write("t,x1,x3,d\n")
                for t, (x1, x3), dd in zip(ts, verts, d):
                    fh.write(f"{float(t)!r},{float(x1)!r},{float(x3)!r},{float(dd)!r}\n")
        elif fmt == "svg":
            v = tr.vertices
            lo = v.min(axis=0) - 1.0
            hi = v.max(axis=0) + 1.0
            pts = " ".join(f"{x},{y}" for x, y in v)
            with open(path, "w") as fh:
                fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" '
                         f'viewBox="{lo[0]} {lo[1]} {hi[0]-lo[0]} {hi[1]-lo[1]}">\n')
                fh.write(f'<polyline points="{pts}" fill="none" '
                         f'stroke="black" stroke-width="0.05"/>\n</svg>\n')
        else:
            raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


class IoFailure(OSError):
    pass


def import_trace_csv(path: str):
    """Re-read an exported CSV; floats round-trip bit-exactly via repr."""
    ts, xs, zs, ds = [], [], [], []
    with open(path) as fh:
        next(fh)
        for line in fh:
            t, x1, x3, d = line.strip().split(",")
            ts.append(float(t)); xs.append(float(x1)); zs.append(float(x3)); ds.append(float(d))
    return np.array(ts), np.array(xs), np.array(zs), np.array(ds)


def trace_manifest(tr: Trace, model: SurfaceModel, seed=None, tolerance: float = 1e-9,
                   retries: int = 0) -> dict:
    return {
        "parameters": {"a": str(model.a), "b": str(model.b), "c": str(model.c)},
        "level": tr.s,
        "seed": seed,
        "tolerance": tolerance,
        "retries": retries,
        "status": tr.status,
        "vertices": int(len(tr.vertices)),
        "arclength": float(tr.arclengths[-1]),
        "seed_cell": list(tr.seed_cell),
    }
