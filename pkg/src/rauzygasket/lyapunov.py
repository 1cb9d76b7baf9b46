"""Lyapunov spectrum estimation for the induction cocycles along symbol
streams (Gibbs-sampled, periodic, or read off a direct orbit), and the
diffusion-rate ratio -lambda_3 / lambda_1.

The estimator is the standard QR deflation: push an orthonormal frame through
block products of cocycle factors, re-orthonormalize, and average the log
diagonal stretches.  Exponents are normalized per accelerated step; the
diffusion ratio is normalization-invariant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .core import SimplexPoint, SpecialSystem
from .induction import PathStep, PrecisionExhausted, Word, orbit_steps


class Overflow(ArithmeticError):
    """Block product overflowed the working dtype; reduce block_len."""


class NonHyperbolic(ValueError):
    """Top exponent is not resolved away from zero."""


DEFAULT_DTYPE = np.longdouble  # extended precision on x86-64
DEFAULT_BLOCK_LEN = 8


@dataclass
class Spectrum:
    lam: Tuple[float, float, float]
    stderr: Tuple[float, float, float]
    steps: int
    variant: str
    source: str = "stream"
    seed: Optional[int] = None

    def __post_init__(self):
        if not (self.lam[0] >= self.lam[1] >= self.lam[2]):
            raise ValueError(f"exponents not sorted: {self.lam}")

    @property
    def total(self) -> float:
        return sum(self.lam)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "lambda": list(self.lam),
            "stderr": list(self.stderr),
            "steps": self.steps,
            "seed": self.seed,
            "source": self.source,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _factor_array(branch: int, n: int, variant: str, dtype) -> np.ndarray:
    if variant == "B":
        block = np.array([[1, 0, 0], [n, 1, 0], [n, 0, 1]], dtype=dtype)
    else:
        block = np.array([[1, -n, -n], [0, 1, 0], [0, 0, 1]], dtype=dtype)
    if branch == 2:
        return block[[1, 0, 2], :]
    return block[[1, 2, 0], :]


def _steps_to_arrays(stream) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(stream, tuple) and len(stream) == 2 and isinstance(stream[0], np.ndarray):
        return stream[0].astype(np.int64), stream[1].astype(np.int64)
    steps = list(stream)
    branches = np.array([s.branch for s in steps], dtype=np.int64)
    counts = np.array([s.n for s in steps], dtype=np.int64)
    return branches, counts


def _gram_schmidt(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Modified Gram-Schmidt on the 3 columns of z; returns (Q, diag(R))."""
    q = np.empty_like(z)
    diag = np.empty(3, dtype=z.dtype)
    v0 = z[:, 0]
    r0 = np.sqrt((v0 * v0).sum())
    q[:, 0] = v0 / r0
    v1 = z[:, 1] - (q[:, 0] @ z[:, 1]) * q[:, 0]
    r1 = np.sqrt((v1 * v1).sum())
    q[:, 1] = v1 / r1
    v2 = z[:, 2] - (q[:, 0] @ z[:, 2]) * q[:, 0]
    v2 = v2 - (q[:, 1] @ v2) * q[:, 1]
    r2 = np.sqrt((v2 * v2).sum())
    q[:, 2] = v2 / r2
    diag[0], diag[1], diag[2] = r0, r1, r2
    return q, diag


def lyapunov_spectrum(stream, variant: str = "B", block_len: int = DEFAULT_BLOCK_LEN,
                      total_steps: Optional[int] = None, burn_in: float = 0.1,
                      dtype=DEFAULT_DTYPE, source: str = "stream",
                      seed: Optional[int] = None, batches: int = 25) -> Spectrum:
    """QR-deflation estimate of the three exponents along a symbol stream.

    ``stream`` is an iterable of PathSteps or a (branches, counts) array pair.
    The first ``burn_in`` fraction of steps aligns the frame and is excluded
    from the averages; exponents are per accelerated step; stderr comes from
    batch means over the counted span.
    """
    branches, counts = _steps_to_arrays(stream)
    if total_steps is not None:
        branches, counts = branches[:total_steps], counts[:total_steps]
    nsteps = len(branches)
    if nsteps < 10 * block_len:
        raise ValueError(f"stream too short: {nsteps} steps")
    skip = int(nsteps * burn_in)

    # factor lookup per (branch, count); counts are bounded in practice
    uniq = np.unique(np.stack([branches, counts]), axis=1)
    table = {}
    for b, n in uniq.T:
        table[(int(b), int(n))] = _factor_array(int(b), int(n), variant, dtype)

    q = np.eye(3, dtype=dtype)
    sums = np.zeros(3, dtype=np.float64)
    counted = 0
    batch_acc = []
    cur_batch = np.zeros(3)
    cur_batch_steps = 0
    batch_size = max(1, (nsteps - skip) // batches)
    limit = np.finfo(dtype).max / 1e8

    pos = 0
    while pos < nsteps:
        end = min(pos + block_len, nsteps)
        z = q
        for k in range(pos, end):
            z = table[(int(branches[k]), int(counts[k]))] @ z
            if abs(z).max() > limit:
                raise Overflow(f"block product overflowed at step {k}; reduce block_len")
        q, diag = _gram_schmidt(z)
        if not np.isfinite(diag).all() or (diag <= 0).any():
            raise Overflow(f"degenerate QR diagonal at step {end}")
        logs = np.log(diag.astype(np.float64))
        if pos >= skip:
            sums += logs
            counted += end - pos
            cur_batch += logs
            cur_batch_steps += end - pos
            if cur_batch_steps >= batch_size:
                batch_acc.append(cur_batch / cur_batch_steps)
                cur_batch = np.zeros(3)
                cur_batch_steps = 0
        pos = end

    lam = sums / counted
    if len(batch_acc) >= 4:
        arr = np.array(batch_acc)
        se = arr.std(axis=0, ddof=1) / math.sqrt(len(arr))
    else:
        se = np.full(3, float("nan"))
    order = np.argsort(lam)[::-1]
    return Spectrum(tuple(float(x) for x in lam[order]),
                    tuple(float(x) for x in se[order]),
                    counted, variant, source=source, seed=seed)


def periodic_stream(w: Word, periods: int) -> Tuple[np.ndarray, np.ndarray]:
    branches = np.tile(np.array([s.branch for s in w], dtype=np.int64), periods)
    counts = np.tile(np.array([s.n for s in w], dtype=np.int64), periods)
    return branches, counts


def diffusion_rate(s: Spectrum) -> Tuple[float, float]:
    """-lambda_3 / lambda_1 with first-order error propagation."""
    l1, _, l3 = s.lam
    s1, _, s3 = s.stderr
    if not math.isfinite(s1):
        s1 = s3 = 0.0
    if l1 <= s1 or l1 <= 0:
        raise NonHyperbolic(f"lambda_1 = {l1} within error {s1}")
    ratio = -l3 / l1
    err = math.hypot(s3 / l1, l3 * s1 / (l1 * l1))
    return ratio, err


def direct_orbit_exponents(start, precision: int = 1024, total_steps: int = 1000,
                           variant: str = "B", block_len: int = DEFAULT_BLOCK_LEN,
                           allow_partial: bool = False, min_steps: int = 200) -> Spectrum:
    """Spectrum from the true symbol stream of one induction orbit.

    ``start`` is a SpecialSystem (exact iteration) or SimplexPoint (floating
    at its stated precision).  Raises PrecisionExhausted(step) if the orbit
    cannot be resolved for total_steps, unless allow_partial and at least
    min_steps were collected.
    """
    if isinstance(start, SpecialSystem):
        point = start
    elif isinstance(start, SimplexPoint):
        point = SimplexPoint(start.coords, precision) if precision != start.precision else start
    else:
        point = SimplexPoint.from_floats(tuple(start), precision)
    steps = []
    try:
        for step, _ in orbit_steps(point, total_steps):
            steps.append(step)
    except PrecisionExhausted as exc:
        if not (allow_partial and len(steps) >= min_steps):
            raise PrecisionExhausted(len(steps),
                                     f"orbit resolved only {len(steps)} steps") from exc
    if len(steps) < total_steps and not allow_partial:
        # the orbit fell into a hole: the start was not gasket-deep enough
        raise ValueError(f"orbit left the gasket after {len(steps)} steps")
    return lyapunov_spectrum(steps, variant=variant, block_len=block_len,
                             source="orbit")


def spectrum_batch(branches: np.ndarray, counts: np.ndarray, variant: str = "B",
                   block_len: int = DEFAULT_BLOCK_LEN, burn_in: float = 0.1,
                   dtype=DEFAULT_DTYPE) -> np.ndarray:
    """Exponent triples for a batch of streams, shape (S, L) -> (S, 3).

    Same estimator as lyapunov_spectrum, vectorized over the batch axis.
    """
    s_count, nsteps = branches.shape
    skip = int(nsteps * burn_in)
    keymap = {}
    uniq = np.unique(np.stack([branches.ravel(), counts.ravel()]), axis=1)
    mats = np.empty((uniq.shape[1], 3, 3), dtype=dtype)
    for i, (b, n) in enumerate(uniq.T):
        keymap[(int(b), int(n))] = i
        mats[i] = _factor_array(int(b), int(n), variant, dtype)
    idx = np.empty((s_count, nsteps), dtype=np.int64)
    for s in range(s_count):
        for k in range(nsteps):
            idx[s, k] = keymap[(int(branches[s, k]), int(counts[s, k]))]

    q = np.broadcast_to(np.eye(3, dtype=dtype), (s_count, 3, 3)).copy()
    sums = np.zeros((s_count, 3))
    counted = 0
    pos = 0
    limit = np.finfo(dtype).max / 1e8
    while pos < nsteps:
        end = min(pos + block_len, nsteps)
        z = q
        for k in range(pos, end):
            z = np.einsum("sij,sjk->sik", mats[idx[:, k]], z)
        if np.abs(z).max() > limit:
            raise Overflow("batch block overflow")
        q, diag = _gram_schmidt_batch(z)
        if pos >= skip:
            sums += np.log(diag.astype(np.float64))
            counted += end - pos
        pos = end
    lam = sums / counted
    return -np.sort(-lam, axis=1)


def _gram_schmidt_batch(z: np.ndarray):
    q = np.empty_like(z)
    diag = np.empty((z.shape[0], 3), dtype=z.dtype)
    v0 = z[:, :, 0]
    r0 = np.sqrt((v0 * v0).sum(axis=1))
    q[:, :, 0] = v0 / r0[:, None]
    v1 = z[:, :, 1] - (q[:, :, 0] * z[:, :, 1]).sum(axis=1)[:, None] * q[:, :, 0]
    r1 = np.sqrt((v1 * v1).sum(axis=1))
    q[:, :, 1] = v1 / r1[:, None]
    v2 = z[:, :, 2] - (q[:, :, 0] * z[:, :, 2]).sum(axis=1)[:, None] * q[:, :, 0]
    v2 = v2 - (q[:, :, 1] * v2).sum(axis=1)[:, None] * q[:, :, 1]
    r2 = np.sqrt((v2 * v2).sum(axis=1))
    q[:, :, 2] = v2 / r2[:, None]
    diag[:, 0], diag[:, 1], diag[:, 2] = r0, r1, r2
    return q, diag
