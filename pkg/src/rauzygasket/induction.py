"""Rauzy induction on special systems: single and accelerated steps, the
renormalized Markov map on the parameter simplex, gasket membership depth,
cylinder geometry, and escape-time rendering of the gasket.

Branch decisions are subtract-and-compare, so the exact paths run on
rationals; the floating paths (mpmath / numpy) refuse to guess whenever a
comparison margin drops below 2^-(precision/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from .core import (
    DEFAULT_PRECISION,
    DegenerateOrder,
    IntMatrix3,
    SimplexPoint,
    SpecialSystem,
    ZeroCoordinate,
    make_system,
)


class HoleReached(Exception):
    """The induction produced a hole; carries the simple steps survived."""

    def __init__(self, steps_survived: int):
        super().__init__(f"hole reached after {steps_survived} simple step(s)")
        self.steps_survived = steps_survived


class PrecisionExhausted(ArithmeticError):
    """A branch decision fell below the working precision."""

    def __init__(self, step: int, message: str = ""):
        super().__init__(message or f"precision exhausted at step {step}")
        self.step = step


class PathStep(NamedTuple):
    """One accelerated induction step: branch in {2,3} and n >= 1 simple steps."""

    branch: int
    n: int


Word = Tuple[PathStep, ...]


def word(pairs: Iterable[Sequence[int]]) -> Word:
    w = tuple(PathStep(int(b), int(n)) for b, n in pairs)
    for s in w:
        if s.branch not in (2, 3) or s.n < 1:
            raise ValueError(f"invalid path step {s}")
    return w


_TAU_SUCC = {2: (1, 0, 2), 3: (1, 2, 0)}


def advance_vertex(tau: Tuple[int, int, int], branch: int) -> Tuple[int, int, int]:
    """Vertex reached from ``tau`` along a branch-2 or branch-3 arrow."""
    idx = _TAU_SUCC[branch]
    return (tau[idx[0]], tau[idx[1]], tau[idx[2]])


def winners(w: Word, tau0: Tuple[int, int, int] = (1, 2, 3)) -> List[int]:
    """Winner label of each accelerated step along the word from vertex tau0."""
    tau = tau0
    out = []
    for step in w:
        out.append(tau[0])
        tau = advance_vertex(tau, step.branch)
    return out


def is_complete(w: Word, tau0: Tuple[int, int, int] = (1, 2, 3)) -> bool:
    return set(winners(w, tau0)) == {1, 2, 3}


def random_word(rng: np.random.Generator, length: int, n_max: int = 6) -> Word:
    branches = rng.integers(2, 4, size=length)
    counts = rng.integers(1, n_max + 1, size=length)
    return tuple(PathStep(int(b), int(n)) for b, n in zip(branches, counts))


# ---------------------------------------------------------------------------
# Single step


class Hole:
    """Outcome of a step that uncovered part of the support interval."""

    is_hole = True

    def __repr__(self):
        return "Hole()"


HOLE = Hole()


@dataclass(frozen=True)
class NextStep:
    """Surviving step: the new system, the winning label, and the exact
    length transfer M with old-lengths = M . new-lengths (label coordinates)."""

    next: SpecialSystem
    winner: int
    length_transfer: IntMatrix3

    is_hole = False


StepOutcome = Union[Hole, NextStep]


def step_produces_hole(s: SpecialSystem) -> bool:
    """True iff one step uncovers a hole, i.e. a <= b + c on sorted values.

    The boundary a = b + c counts as a hole: it violates genericity and the
    strict survival condition.
    """
    a, b, c = s.sorted_lengths
    return a <= b + c


def _winner_transfer(winner: int) -> IntMatrix3:
    rows = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    rows[winner - 1] = [1, 1, 1]
    return IntMatrix3.from_rows(rows)


def rauzy_step(s: SpecialSystem) -> StepOutcome:
    """One transmission-plus-reduction step, exact, in label coordinates."""
    a, b, c = s.sorted_lengths
    if a <= b + c:
        return HOLE
    winner = s.tau[0]
    new = list(s.lengths)
    new[winner - 1] = a - b - c
    total = sum(new)
    lengths = tuple(x / total for x in new)
    if len(set(lengths)) != 3:
        raise DegenerateOrder(f"step produced equal lengths {lengths}")
    tau = tuple(sorted((1, 2, 3), key=lambda i: lengths[i - 1], reverse=True))
    # old = M . new holds for the unnormalized triple; renormalization is a
    # global scale and does not disturb the identity on projective classes.
    m = _winner_transfer(winner)
    return NextStep(SpecialSystem(lengths, tau), winner, m)


def accelerated_step(s: SpecialSystem) -> Tuple[PathStep, SpecialSystem, IntMatrix3]:
    """Iterate single steps while the same label wins; stop at the order change.

    Returns the merged step (branch, n), the renormalized next system and the
    exact label-space product M of the single-step transfer matrices.
    Raises HoleReached (with the simple-step count survived) if a hole shows
    up before the order changes.
    """
    winner0 = s.tau[0]
    m = IntMatrix3.identity()
    cur = s
    n = 0
    while True:
        out = rauzy_step(cur)
        if out.is_hole:
            raise HoleReached(n)
        n += 1
        m = m @ out.length_transfer
        cur = out.next
        if cur.tau[0] != winner0:
            break
    # branch 2 if the previous winner is now in second place, 3 if in third
    branch = 2 if cur.tau[1] == winner0 else 3
    return PathStep(branch, n), cur, m


def accelerated_matrix(branch: int, n: int) -> IntMatrix3:
    """Sorted-coordinate transfer matrix of one accelerated step
    (old sorted = matrix . new sorted)."""
    if branch == 2:
        return IntMatrix3.from_rows([[n, 1, n], [1, 0, 0], [0, 0, 1]])
    if branch == 3:
        return IntMatrix3.from_rows([[n, n, 1], [1, 0, 0], [0, 1, 0]])
    raise ValueError(f"branch must be 2 or 3, got {branch}")


# ---------------------------------------------------------------------------
# Closed-form accelerated step on sorted triples (exact or floating)


def _sorted_step_exact(a: Fraction, b: Fraction, c: Fraction):
    """Closed-form accelerated step on an exactly sorted triple a >= b >= c.

    Returns (branch, n, new_sorted_unnormalized).  Test-equivalent to the
    iterate-until-change loop (property-tested).  Ties never make the
    hole-versus-survive decision ambiguous, so this path tolerates them;
    when the order change itself is a tie the branch label defaults to 2
    (the two sorted readings give the same vector).
    """
    bc = b + c
    if a <= bc:
        raise HoleReached(0)
    q = int((a - b) // bc)
    x = a - q * bc
    # x lies in [b, b + bc)
    if x <= bc:
        raise HoleReached(q)
    xp = x - bc
    if xp >= c:
        return 2, q + 1, (b, xp, c)
    return 3, q + 1, (b, c, xp)


def _sorted_step_mpf(a, b, c, eps, step_index: int):
    """Same as _sorted_step_exact on mpmath floats, with margin checks."""
    bc = b + c
    if abs(a - bc) < eps:
        raise PrecisionExhausted(step_index)
    if a < bc:
        raise HoleReached(0)
    q = int(mpmath.floor((a - b) / bc))
    x = a - q * bc
    # floor on floats can be off by one near exact multiples; fix up
    while x < b and q > 0:
        q -= 1
        x += bc
    while x - bc >= b:
        q += 1
        x -= bc
    if abs(x - b) < eps or abs(x - bc) < eps:
        raise PrecisionExhausted(step_index)
    if x < bc:
        raise HoleReached(q)
    xp = x - bc
    if abs(xp - c) < eps:
        raise PrecisionExhausted(step_index)
    if xp > c:
        return 2, q + 1, (b, xp, c)
    return 3, q + 1, (b, c, xp)


def markov_map(p):
    """Renormalized accelerated induction: T(l) = M^-1 l / ||M^-1 l||_1.

    Exact on SpecialSystem, precision-tracked on SimplexPoint.  Raises
    HoleReached if the point leaves the gasket.
    """
    if isinstance(p, SpecialSystem):
        _, nxt, _ = accelerated_step(p)
        return nxt
    if isinstance(p, SimplexPoint):
        with mpmath.workprec(p.precision):
            a, b, c = p.sorted_desc()
            if min(a, b, c) <= 0:
                raise ZeroCoordinate("simplex point must be strictly positive")
            eps = mpmath.mpf(2) ** (-(p.precision // 2))
            _, _, new = _sorted_step_mpf(a, b, c, eps, 0)
            total = new[0] + new[1] + new[2]
            coords = tuple(v / total for v in new)
        return SimplexPoint(coords, p.precision)
    raise TypeError(f"unsupported point type {type(p)!r}")


def orbit_steps(p, max_steps: int):
    """Generate (PathStep, sorted_point) pairs along the accelerated orbit.

    Exact (tie-tolerant) on SpecialSystem or rational triples; stops silently
    at a hole; raises PrecisionExhausted on the floating path when a branch
    decision is uncertain.
    """
    if isinstance(p, SpecialSystem) or (isinstance(p, (tuple, list)) and len(p) == 3):
        vals = p.sorted_lengths if isinstance(p, SpecialSystem) else tuple(
            sorted((Fraction(x) for x in p), reverse=True))
        total = sum(vals)
        a, b, c = (v / total for v in vals)
        for _ in range(max_steps):
            try:
                br, n, new = _sorted_step_exact(a, b, c)
            except HoleReached:
                return
            total = sum(new)
            a, b, c = (v / total for v in new)
            yield PathStep(br, n), (a, b, c)
    elif isinstance(p, SimplexPoint):
        with mpmath.workprec(p.precision):
            a, b, c = p.sorted_desc()
            eps = mpmath.mpf(2) ** (-(p.precision // 2))
            for k in range(max_steps):
                try:
                    br, n, new = _sorted_step_mpf(a, b, c, eps, k)
                except HoleReached:
                    return
                total = new[0] + new[1] + new[2]
                a, b, c = (v / total for v in new)
                yield PathStep(br, n), SimplexPoint((a, b, c), p.precision)
    else:
        raise TypeError(f"unsupported point type {type(p)!r}")


def gasket_depth(p, max_depth: int) -> int:
    """Accelerated steps survived before a hole, capped at max_depth."""
    depth = 0
    for _ in orbit_steps(p, max_depth):
        depth += 1
    return depth


# ---------------------------------------------------------------------------
# Cylinders


def cylinder(w: Word):
    """Cylinder of a word: sorted-space matrix M (old = M . new over the whole
    word) and the three vertices of the subsimplex, i.e. normalized columns
    of M as exact rational triples."""
    if not w:
        raise ValueError("cylinder of the empty word")
    m = IntMatrix3.identity()
    for step in w:
        m = m @ accelerated_matrix(step.branch, step.n)
    cols = []
    for j in range(3):
        col = [m.rows[i][j] for i in range(3)]
        total = sum(col)
        cols.append(tuple(Fraction(x, total) for x in col))
    return m, tuple(cols)


def cylinder_barycenter(w: Word) -> Tuple[Fraction, Fraction, Fraction]:
    """Exact barycentric representative of the cylinder (image of (1,1,1)/3)."""
    m, _ = cylinder(w)
    sums = [sum(m.rows[i]) for i in range(3)]
    total = sum(sums)
    return tuple(Fraction(s, total) for s in sums)


def barycenter_system(w: Word) -> SpecialSystem:
    b = cylinder_barycenter(w)
    return make_system(*b)


# ---------------------------------------------------------------------------
# Hilbert metric


def hilbert_ratio(p, q):
    """Cross-ratio bound max_i(p_i/q_i) * max_i(q_i/p_i), exact on rationals."""
    pc = p.coords if isinstance(p, SimplexPoint) else tuple(p)
    qc = q.coords if isinstance(q, SimplexPoint) else tuple(q)
    if any(x <= 0 for x in pc) or any(x <= 0 for x in qc):
        raise ZeroCoordinate("hilbert distance needs strictly positive points")
    exact = all(isinstance(x, (int, Fraction)) for x in pc + qc)
    if exact:
        ratios = [Fraction(a) / Fraction(b) for a, b in zip(pc, qc)]
    else:
        ratios = [a / b for a, b in zip(pc, qc)]
    return max(ratios) / min(ratios)


def hilbert_distance(p, q) -> float:
    """Hilbert projective distance log(max_i p_i/q_i * max_i q_i/p_i)."""
    r = hilbert_ratio(p, q)
    if isinstance(r, Fraction):
        return math.log(r.numerator) - math.log(r.denominator)
    return float(mpmath.log(r)) if isinstance(r, mpmath.mpf) else math.log(r)


# ---------------------------------------------------------------------------
# Escape-time raster of the gasket

OUTSIDE = -2
EXHAUSTED = -1


def depth_grid(resolution: int, max_depth: int, precision: int = 53) -> np.ndarray:
    """Barycentric raster of gasket_depth over the parameter triangle.

    Returns an int array (resolution x resolution): depth >= 0, EXHAUSTED for
    pixels whose branch decisions fell under the precision margin, OUTSIDE for
    pixels outside the triangle.  Pixel centers are mapped onto an equilateral
    triangle inscribed in the image.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    res = resolution
    ys, xs = np.mgrid[0:res, 0:res]
    px = (xs + 0.5) / res
    py = (res - 1 - ys + 0.5) / res

    # equilateral triangle with unit-ish side centered in the unit square
    side = 0.98
    h = side * math.sqrt(3) / 2
    ax, ay = 0.5 - side / 2, 0.5 - h / 2
    bx, by = 0.5 + side / 2, 0.5 - h / 2
    cx, cy = 0.5, 0.5 + h / 2
    det = (by - cy) * (ax - cx) + (cx - bx) * (ay - cy)
    l1 = ((by - cy) * (px - cx) + (cx - bx) * (py - cy)) / det
    l2 = ((cy - ay) * (px - cx) + (ax - cx) * (py - cy)) / det
    l3 = 1.0 - l1 - l2

    inside = (l1 > 0) & (l2 > 0) & (l3 > 0)
    grid = np.full((res, res), OUTSIDE, dtype=np.int32)

    tri = np.stack([l1[inside], l2[inside], l3[inside]], axis=0)
    depths = _depth_batch(tri, max_depth, precision)
    grid[inside] = depths
    return grid


def _depth_batch(tri: np.ndarray, max_depth: int, precision: int) -> np.ndarray:
    """Vectorized closed-form accelerated induction on columns of tri."""
    if precision > 53:
        return np.array([
            gasket_depth(SimplexPoint.from_floats(tri[:, i], precision), max_depth)
            for i in range(tri.shape[1])
        ], dtype=np.int32)

    vals = np.sort(tri, axis=0)[::-1]
    a, b, c = vals[0].copy(), vals[1].copy(), vals[2].copy()
    npix = a.shape[0]
    depth = np.zeros(npix, dtype=np.int32)
    status = np.zeros(npix, dtype=np.int8)  # 0 live, 1 holed, 2 exhausted
    eps = 2.0 ** (-precision // 2)

    live = status == 0
    for _ in range(max_depth):
        if not live.any():
            break
        al, bl, cl = a[live], b[live], c[live]
        bc = bl + cl
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.floor((al - bl) / bc)
        q = np.maximum(q, 0.0)
        x = al - q * bc
        # floor fix-ups against float rounding
        over = x - bc > bl
        x = np.where(over, x - bc, x)
        under = x <= bl
        x = np.where(under, x + bc, x)

        tight = (np.abs(x - bl) < eps) | (np.abs(x - bc) < eps)
        hole = (~tight) & (x < bc)
        survive = (~tight) & (~hole)
        xp = x - bc
        tight |= survive & (np.abs(xp - cl) < eps)
        survive &= ~tight

        na = np.where(xp > cl, bl, bl)
        nb = np.where(xp > cl, xp, cl)
        nc = np.where(xp > cl, cl, xp)
        total = na + nb + nc
        na, nb, nc = na / total, nb / total, nc / total

        idx = np.flatnonzero(live)
        status[idx[hole]] = 1
        status[idx[tight]] = 2
        surv_idx = idx[survive]
        a[surv_idx] = na[survive]
        b[surv_idx] = nb[survive]
        c[surv_idx] = nc[survive]
        depth[surv_idx] += 1
        live = status == 0

    out = depth.astype(np.int32)
    out[status == 2] = EXHAUSTED
    return out


def survival_fractions(grid: np.ndarray, max_depth: int) -> List[float]:
    """Fraction of in-triangle pixels with depth >= k, for k = 0..max_depth."""
    inside = grid != OUTSIDE
    total = int(inside.sum())
    fracs = []
    for k in range(max_depth + 1):
        fracs.append(float(((grid >= k) & inside).sum()) / total)
    return fracs


_RAMP = [
    (255, 255, 255), (254, 235, 200), (252, 210, 150), (248, 180, 110),
    (240, 140, 80), (220, 100, 60), (190, 70, 50), (150, 45, 45),
    (110, 30, 45), (75, 20, 45), (45, 12, 40), (22, 6, 30),
]


def depth_color(depth: int, max_depth: int):
    """Escape-time color ramp: depth 0 white, deeper steps darker, survivors
    (depth == max_depth) black, EXHAUSTED bright red, OUTSIDE light gray."""
    if depth == OUTSIDE:
        return (235, 235, 235)
    if depth == EXHAUSTED:
        return (255, 0, 0)
    if depth >= max_depth:
        return (0, 0, 0)
    return _RAMP[min(depth, len(_RAMP) - 1)]


def write_ppm(grid: np.ndarray, max_depth: int, path: str) -> None:
    """Binary PPM (P6, 8-bit RGB, row-major) with the documented color ramp."""
    res_y, res_x = grid.shape
    lut = {}
    img = np.zeros((res_y, res_x, 3), dtype=np.uint8)
    for val in np.unique(grid):
        lut[int(val)] = depth_color(int(val), max_depth)
    for val, color in lut.items():
        img[grid == val] = color
    with open(path, "wb") as fh:
        fh.write(f"P6\n{res_x} {res_y}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def write_depth_csv(grid: np.ndarray, path: str) -> None:
    with open(path, "w") as fh:
        fh.write("row,col,depth\n")
        res_y, res_x = grid.shape
        for i in range(res_y):
            row = grid[i]
            for j in range(res_x):
                fh.write(f"{i},{j},{int(row[j])}\n")


def render_gasket(resolution: int, max_depth: int, precision: int = 53) -> np.ndarray:
    """Depth raster of the parameter triangle (see depth_grid)."""
    return depth_grid(resolution, max_depth, precision)
