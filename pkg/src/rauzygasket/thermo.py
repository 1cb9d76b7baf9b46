"""Thermodynamic formalism at desk scale: the roof function of the accelerated
induction, a truncated transfer operator on the countable shift, the pressure
curve and its root kappa_0, the associated Gibbs Markov chain, and seedable
sampling of symbol streams.

The shift states are (vertex, branch, n): the accelerated-graph vertex the
step leaves from, whether the order change is of branch-2 or branch-3 type,
and the number n <= N_max of simple steps merged.  Roof values are evaluated
at one representative point per (branch, n): the periodic point of the
shortest loop through the state when that loop's matrix is strictly positive
(branch 3 closes in three arrows), else the exact cylinder barycenter
(branch-2 loops close in two arrows but their matrices are reducible).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import IntMatrix3, SimplexPoint, ZeroCoordinate, mat_inverse_unimodular
from .cocycle import step_factor
from .induction import PathStep, Word, accelerated_matrix, advance_vertex, cylinder

VERTICES: Tuple[Tuple[int, int, int], ...] = tuple(sorted(itertools.permutations((1, 2, 3))))


class NoConvergence(ArithmeticError):
    def __init__(self, iterations: int):
        super().__init__(f"power iteration did not converge in {iterations} iterations")
        self.iterations = iterations


class NoSignChange(ValueError):
    """Pressure does not change sign on the requested bracket."""


class TooLarge(ValueError):
    """Periodic-orbit enumeration guard (period must stay small)."""


# ---------------------------------------------------------------------------
# Roof function


def roof_mass(w, point) -> Fraction:
    """Exact l1 mass ||M^-1 lambda||_1 swallowed by the return along w.

    ``w`` is a PathStep or a Word; ``point`` a rational triple (unit sum).
    The roof is -log of this value.
    """
    steps = (w,) if isinstance(w, PathStep) else tuple(w)
    lam = tuple(Fraction(x) for x in point)
    if any(x <= 0 for x in lam):
        raise ZeroCoordinate("roof needs a strictly positive point")
    m = IntMatrix3.identity()
    for s in steps:
        m = m @ accelerated_matrix(s.branch, s.n)
    inv = mat_inverse_unimodular(m)
    img = inv.apply(lam)
    return img[0] + img[1] + img[2]


def roof(w, point) -> float:
    """Roof value r = -log||M^-1 lambda||_1 > 0 of the return word at point."""
    mass = roof_mass(w, point)
    if mass <= 0:
        raise ZeroCoordinate(f"degenerate preimage mass {mass}")
    return math.log(mass.denominator) - math.log(mass.numerator)


def _roof_float(branch: int, n: int, x: np.ndarray) -> float:
    """Roof of a single accelerated step at a sorted float triple."""
    mass = float(x[0] - (n - 1) * (x[1] + x[2]))
    return -math.log(mass)


def _perron_direction(m: IntMatrix3, tol: float = 1e-14) -> np.ndarray:
    a = np.array(m.rows, dtype=float)
    v = np.full(3, 1.0 / 3.0)
    for _ in range(400):
        w = a @ v
        w /= w.sum()
        if np.abs(w - v).max() < tol:
            return w
        v = w
    raise NoConvergence(400)


def state_representative(branch: int, n: int) -> np.ndarray:
    """Sorted representative point of the (branch, n) cell, as floats.

    Branch-3 states use the periodic point of the loop (3,n),(3,1),(3,1)
    (its cylinder matrix is strictly positive, so the fixed direction is
    interior and its first step really is (3,n); asserted).  Branch-2 states
    fall back to the cylinder barycenter: the loops closing in two arrows
    have reducible matrices whose fixed direction sits on the simplex
    boundary.  The barycenter lies on the cell's own boundary (it maps onto
    the simplex center), but the roof formula extends continuously there.
    """
    if branch == 3:
        loop = (PathStep(3, n), PathStep(3, 1), PathStep(3, 1))
        m, _ = cylinder(loop)  # B_loop^T for the loop starting with (3, n)
        if m.min_entry() >= 1:
            x = _perron_direction(m)
            first = _first_step_float(x)
            if first != (3, n):
                raise AssertionError(f"representative of (3,{n}) stepped {first}")
            return x
    m = accelerated_matrix(branch, n)
    sums = np.array([sum(r) for r in m.rows], dtype=float)
    return sums / sums.sum()


def _first_step_float(x: np.ndarray) -> Tuple[int, int]:
    a, b, c = float(x[0]), float(x[1]), float(x[2])
    bc = b + c
    q = int((a - b) // bc)
    t = a - q * bc
    if t - bc >= b:
        q += 1
        t -= bc
    if t <= bc:
        return (0, q)
    xp = t - bc
    return (2, q + 1) if xp > c else (3, q + 1)


def state_roof(branch: int, n: int) -> float:
    x = state_representative(branch, n)
    return _roof_float(branch, n, x)


# ---------------------------------------------------------------------------
# Transfer model


@dataclass(frozen=True)
class ShiftState:
    tau: Tuple[int, int, int]
    branch: int
    n: int


@dataclass
class TransferModel:
    states: List[ShiftState]
    kappa: float
    n_max: int
    roof_values: np.ndarray          # per state
    weights: np.ndarray              # exp(-kappa * roof) per state
    index: Dict[ShiftState, int]
    successor_vertex: List[Tuple[int, int, int]]
    targets: List[np.ndarray]        # per state: indices of allowed successors
    representative_rule: str = "loop-perron(branch 3) / cylinder-barycenter(branch 2)"

    def tail_bound(self) -> float:
        """Geometric-style bound on the dropped weight mass beyond N_max."""
        total = 0.0
        for br in (2, 3):
            n = self.n_max + 1
            while True:
                w = math.exp(-self.kappa * math.log((2 * n + 3) / 3))
                total += 6 * w
                n += 1
                if w < 1e-16 or n > self.n_max + 100000:
                    break
        return total

    def row_sum(self, state: ShiftState) -> float:
        i = self.index[state]
        return float(self.weights[self.targets[i]].sum())


_ROOF_CACHE: Dict[Tuple[int, int], float] = {}


def cached_state_roof(branch: int, n: int) -> float:
    key = (branch, n)
    if key not in _ROOF_CACHE:
        _ROOF_CACHE[key] = state_roof(branch, n)
    return _ROOF_CACHE[key]


def build_transfer(n_max: int, kappa: float) -> TransferModel:
    """Finite truncation of the weighted shift: 6 vertices x 2 branches x N_max."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    states = [ShiftState(tau, br, n)
              for tau in VERTICES for br in (2, 3) for n in range(1, n_max + 1)]
    index = {s: i for i, s in enumerate(states)}
    roof_values = np.array([cached_state_roof(s.branch, s.n) for s in states])
    weights = np.exp(-kappa * roof_values)
    succ = [advance_vertex(s.tau, s.branch) for s in states]
    by_vertex: Dict[Tuple[int, int, int], List[int]] = {v: [] for v in VERTICES}
    for i, s in enumerate(states):
        by_vertex[s.tau].append(i)
    targets = [np.array(by_vertex[v], dtype=np.int64) for v in succ]
    return TransferModel(states, float(kappa), n_max, roof_values, weights,
                         index, succ, targets)


def _matvec(model: TransferModel, v: np.ndarray) -> np.ndarray:
    """(L v)(s) = sum over allowed successors s' of weight(s') v(s')."""
    out = np.empty_like(v)
    wv = model.weights * v
    # all states with the same successor vertex share a row
    cache: Dict[Tuple[int, int, int], float] = {}
    for i, vert in enumerate(model.successor_vertex):
        if vert not in cache:
            cache[vert] = float(wv[model.targets[i]].sum())
        out[i] = cache[vert]
    return out


def pressure(model: TransferModel, iterations: int = 2000, tolerance: float = 1e-12) -> float:
    """log of the leading eigenvalue of the weighted adjacency operator."""
    v = np.full(len(model.states), 1.0 / len(model.states))
    lam_old = None
    for _ in range(iterations):
        w = _matvec(model, v)
        lam = float(w.sum() / v.sum())
        w /= w.sum()
        if lam_old is not None and abs(lam - lam_old) < tolerance * max(1.0, lam):
            return math.log(lam)
        lam_old = lam
        v = w
    raise NoConvergence(iterations)


def solve_kappa0(n_max: int, bracket: Tuple[float, float] = (0.5, 40.0),
                 tolerance: float = 1e-10) -> float:
    """Bisection root of pressure(kappa) = 0 on the truncated model."""
    lo, hi = bracket
    plo = pressure(build_transfer(n_max, lo))
    phi = pressure(build_transfer(n_max, hi))
    if plo == 0:
        return lo
    if phi == 0:
        return hi
    if (plo > 0) == (phi > 0):
        raise NoSignChange(f"pressure({lo}) = {plo:.4g}, pressure({hi}) = {phi:.4g}")
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        pm = pressure(build_transfer(n_max, mid))
        if pm == 0:
            return mid
        if (pm > 0) == (plo > 0):
            lo, plo = mid, pm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Gibbs chain


@dataclass
class GibbsChain:
    model: TransferModel
    eigenvalue: float
    right: np.ndarray
    left: np.ndarray
    transition: np.ndarray          # dense row-stochastic matrix
    stationary: np.ndarray

    def entropy_rate(self) -> float:
        p = self.transition
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(p > 0, p * np.log(p), 0.0)
        return float(-(self.stationary @ plogp.sum(axis=1)))

    def mean_roof(self) -> float:
        return float(self.stationary @ self.model.roof_values)


def gibbs_chain(model: TransferModel, iterations: int = 5000,
                tolerance: float = 1e-13) -> GibbsChain:
    """Perron normalization p(s->s') = w(s') h(s') / (Lambda h(s))."""
    nstates = len(model.states)
    w = model.weights
    # dense weighted adjacency: row u, column v
    mat = np.zeros((nstates, nstates))
    for i in range(nstates):
        mat[i, model.targets[i]] = w[model.targets[i]]
    lam = None
    h = np.full(nstates, 1.0)
    for _ in range(iterations):
        nh = mat @ h
        lam_new = float(nh.sum() / h.sum())
        nh /= nh.max()
        if lam is not None and abs(lam_new - lam) < tolerance * lam_new and \
           np.abs(nh - h).max() < 1e-13:
            h = nh
            lam = lam_new
            break
        h, lam = nh, lam_new
    else:
        raise NoConvergence(iterations)
    left = np.full(nstates, 1.0)
    for _ in range(iterations):
        nl = mat.T @ left
        nl /= nl.max()
        if np.abs(nl - left).max() < 1e-13:
            left = nl
            break
        left = nl
    else:
        raise NoConvergence(iterations)
    p = mat * h[None, :] / (lam * h[:, None])
    pi = left * h
    pi /= pi.sum()
    return GibbsChain(model, lam, h, left, p, pi)


def sample_states(chain: GibbsChain, length: int, seed: int) -> np.ndarray:
    """State-index stream of the stationary chain, deterministic given seed."""
    rng = np.random.default_rng(seed)
    p = chain.transition
    cum = np.cumsum(p, axis=1)
    start = int(rng.choice(len(chain.stationary), p=chain.stationary))
    out = np.empty(length, dtype=np.int64)
    us = rng.random(length)
    cur = start
    for k in range(length):
        cur = int(np.searchsorted(cum[cur], us[k], side="right"))
        out[k] = cur
    return out


def sample_word(chain: GibbsChain, length: int, seed: int) -> Word:
    """Word of PathSteps distributed by the Gibbs chain."""
    idx = sample_states(chain, length, seed)
    states = chain.model.states
    return tuple(PathStep(states[i].branch, states[i].n) for i in idx)


def sample_step_arrays(chain: GibbsChain, length: int, seed: int):
    """(branches, counts) arrays for the sampled word; fast path that uses the
    vertex symmetry of the model (transition rows depend on the source state
    only through its successor vertex, and weights only on (branch, n))."""
    model = chain.model
    # distribution over (branch, n) read off one row class
    sample_states_of_row = model.targets[0]
    row = chain.transition[0, sample_states_of_row]
    row = row / row.sum()
    rng = np.random.default_rng(seed)
    draw = rng.choice(len(row), size=length, p=row)
    sts = [model.states[i] for i in sample_states_of_row]
    branches = np.array([s.branch for s in sts], dtype=np.int8)[draw]
    counts = np.array([s.n for s in sts], dtype=np.int64)[draw]
    return branches, counts


def zm_partition(m: int, kappa: float, start_state: ShiftState,
                 model: Optional[TransferModel] = None, n_max: int = 10) -> float:
    """Exact sum over periodic words of period m through start_state, by
    brute-force path enumeration on the truncated graph (the pressure oracle).
    """
    if m > 5:
        raise TooLarge("period must be <= 5")
    if model is None:
        model = build_transfer(n_max, kappa)
    i0 = model.index[start_state]
    w = model.weights
    total = 0.0

    def extend(cur: int, depth: int, acc: float):
        nonlocal total
        if depth == m:
            if cur == i0:
                total += acc
            return
        for j in model.targets[cur]:
            extend(int(j), depth + 1, acc * w[j])

    # multiply the weight of each state entered; around a closed cycle this
    # equals the product over the visited states x_0 .. x_{m-1}
    extend(i0, 0, 1.0)
    return total


def abramov_entropy_ratio(chain: GibbsChain) -> float:
    """h_mu(sigma) / integral of the roof: the flow's entropy via Abramov."""
    return chain.entropy_rate() / chain.mean_roof()
