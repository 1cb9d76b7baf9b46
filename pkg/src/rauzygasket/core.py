"""Exact arithmetic foundation: parameter triples, 3x3 integer matrices, cubics.

Everything in this module is exact: parameters are `fractions.Fraction`,
matrices have arbitrary-precision integer entries, and root isolation works
by sign evaluation of integer polynomials at rational points.  High-precision
floating triples (`SimplexPoint`, backed by mpmath) exist only for long
renormalized orbits where exact denominators would blow up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

import mpmath

DEFAULT_PRECISION = 256

Triple = Tuple[Fraction, Fraction, Fraction]


class NonPositiveLength(ValueError):
    """A length parameter was zero or negative."""


class DegenerateOrder(ValueError):
    """Two lengths coincide; the generic strict ordering is required."""


class NotUnimodular(ValueError):
    """Matrix inverse requested for a matrix with |det| != 1."""


class UncertifiedRoots(ArithmeticError):
    """Root isolation could not certify the requested property."""


class ZeroCoordinate(ValueError):
    """A strictly positive simplex point was required."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(str(x)) if isinstance(x, str) else Fraction(x)


@dataclass(frozen=True)
class SpecialSystem:
    """Exact parameter triple of a special system, in original label order.

    ``lengths`` are positive rationals with unit sum; ``tau`` lists the labels
    (1-based) in strictly decreasing order of length, so ``lengths[tau[0]-1]``
    is the largest value.
    """

    lengths: Triple
    tau: Tuple[int, int, int]

    @property
    def sorted_lengths(self) -> Triple:
        l = self.lengths
        return (l[self.tau[0] - 1], l[self.tau[1] - 1], l[self.tau[2] - 1])

    def simplex_point(self, precision: int = DEFAULT_PRECISION) -> "SimplexPoint":
        return SimplexPoint.from_rationals(self.lengths, precision)


def make_system(l1, l2, l3) -> SpecialSystem:
    """Build a SpecialSystem from three positive rationals, rescaled to unit sum.

    Raises NonPositiveLength / DegenerateOrder (equal lengths are excluded:
    only the generic case with no integral linear relation is handled).
    """
    raw = tuple(_as_fraction(x) for x in (l1, l2, l3))
    if any(x <= 0 for x in raw):
        raise NonPositiveLength(f"lengths must be positive, got {raw}")
    total = sum(raw)
    lengths = tuple(x / total for x in raw)
    if len(set(lengths)) != 3:
        raise DegenerateOrder(f"lengths must be pairwise distinct, got {lengths}")
    tau = tuple(sorted((1, 2, 3), key=lambda i: lengths[i - 1], reverse=True))
    return SpecialSystem(lengths, tau)  # type: ignore[arg-type]


@dataclass(frozen=True)
class SimplexPoint:
    """Non-negative high-precision triple with unit sum and a stated precision."""

    coords: tuple
    precision: int = DEFAULT_PRECISION

    @classmethod
    def from_rationals(cls, triple: Iterable, precision: int = DEFAULT_PRECISION) -> "SimplexPoint":
        fr = [_as_fraction(x) for x in triple]
        total = sum(fr)
        with mpmath.workprec(precision):
            coords = tuple(
                mpmath.mpf((x / total).numerator) / mpmath.mpf((x / total).denominator)
                for x in fr
            )
        return cls(coords, precision)

    @classmethod
    def from_floats(cls, triple: Iterable, precision: int = DEFAULT_PRECISION) -> "SimplexPoint":
        with mpmath.workprec(precision):
            vals = [mpmath.mpf(x) for x in triple]
            total = mpmath.fsum(vals)
            coords = tuple(v / total for v in vals)
        return cls(coords, precision)

    def sorted_desc(self) -> tuple:
        return tuple(sorted(self.coords, reverse=True))


# ---------------------------------------------------------------------------
# 3x3 integer matrices


@dataclass(frozen=True)
class IntMatrix3:
    """Immutable 3x3 matrix with arbitrary-precision integer entries."""

    rows: Tuple[Tuple[int, int, int], Tuple[int, int, int], Tuple[int, int, int]]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix3":
        return cls(tuple(tuple(int(x) for x in r) for r in rows))  # type: ignore[arg-type]

    @classmethod
    def identity(cls) -> "IntMatrix3":
        return cls(((1, 0, 0), (0, 1, 0), (0, 0, 1)))

    @classmethod
    def permutation(cls, perm: Sequence[int]) -> "IntMatrix3":
        """Matrix P with (P v)_i = v_perm[i] for 0-based perm of positions."""
        rows = [[0, 0, 0] for _ in range(3)]
        for i, j in enumerate(perm):
            rows[i][j] = 1
        return cls.from_rows(rows)

    def __matmul__(self, other: "IntMatrix3") -> "IntMatrix3":
        a, b = self.rows, other.rows
        return IntMatrix3(tuple(
            tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3))
            for i in range(3)
        ))

    def apply(self, v: Sequence) -> tuple:
        return tuple(sum(self.rows[i][k] * v[k] for k in range(3)) for i in range(3))

    @property
    def T(self) -> "IntMatrix3":
        r = self.rows
        return IntMatrix3(tuple(tuple(r[j][i] for j in range(3)) for i in range(3)))

    def det(self) -> int:
        (a, b, c), (d, e, f), (g, h, i) = self.rows
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def adjugate(self) -> "IntMatrix3":
        (a, b, c), (d, e, f), (g, h, i) = self.rows
        return IntMatrix3((
            (e * i - f * h, c * h - b * i, b * f - c * e),
            (f * g - d * i, a * i - c * g, c * d - a * f),
            (d * h - e * g, b * g - a * h, a * e - b * d),
        ))

    def min_entry(self) -> int:
        return min(min(r) for r in self.rows)

    def to_lists(self):
        return [list(r) for r in self.rows]

    def __str__(self) -> str:
        return "\n".join(" ".join(str(x) for x in r) for r in self.rows)


def mat_mul(a: IntMatrix3, b: IntMatrix3) -> IntMatrix3:
    return a @ b


def mat_transpose(m: IntMatrix3) -> IntMatrix3:
    return m.T


def mat_inverse_unimodular(m: IntMatrix3) -> IntMatrix3:
    """Exact integer inverse; requires |det| = 1."""
    d = m.det()
    if d not in (1, -1):
        raise NotUnimodular(f"det = {d}")
    adj = m.adjugate()
    if d == 1:
        return adj
    return IntMatrix3(tuple(tuple(-x for x in r) for r in adj.rows))


# ---------------------------------------------------------------------------
# Monic integer cubics


@dataclass(frozen=True)
class Cubic:
    """Monic cubic t^3 + p2 t^2 + p1 t + p0 with integer coefficients."""

    p2: int
    p1: int
    p0: int

    def __call__(self, x):
        return ((x + self.p2) * x + self.p1) * x + self.p0

    def derivative_at(self, x):
        return (3 * x + 2 * self.p2) * x + self.p1

    def coefficients(self) -> Tuple[int, int, int, int]:
        return (1, self.p2, self.p1, self.p0)

    def __str__(self) -> str:
        def term(c, s):
            if c == 0:
                return ""
            sign = "+" if c > 0 else "-"
            mag = abs(c)
            coef = "" if (mag == 1 and s) else str(mag)
            return f" {sign} {coef}{s}".rstrip()
        return ("t^3" + term(self.p2, "t^2") + term(self.p1, "t") + term(self.p0, "")).strip()


def char_poly(m: IntMatrix3) -> Cubic:
    """Exact characteristic polynomial det(tI - M) of a 3x3 integer matrix."""
    tr = m.rows[0][0] + m.rows[1][1] + m.rows[2][2]
    (a, b, c), (d, e, f), (g, h, i) = m.rows
    minors = (e * i - f * h) + (a * i - c * g) + (a * e - b * d)
    return Cubic(p2=-tr, p1=minors, p0=-m.det())


def discriminant(c: Cubic) -> int:
    """Discriminant of the monic cubic (positive iff three distinct real roots)."""
    b, cc, d = c.p2, c.p1, c.p0
    return 18 * b * cc * d - 4 * b**3 * d + b * b * cc * cc - 4 * cc**3 - 27 * d * d


def is_perfect_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def rational_roots(c: Cubic):
    """Integer roots of the monic cubic (all rational roots are integers)."""
    if c.p0 == 0:
        roots = [0]
        # remaining quadratic t^2 + p2 t + p1
        disc = c.p2 * c.p2 - 4 * c.p1
        if is_perfect_square(disc):
            s = math.isqrt(disc)
            for num in (-c.p2 + s, -c.p2 - s):
                if num % 2 == 0:
                    roots.append(num // 2)
        return sorted(set(roots))
    hits = set()
    n = abs(c.p0)
    d = 1
    while d * d <= n:
        if n % d == 0:
            for cand in (d, -d, n // d, -(n // d)):
                if c(cand) == 0:
                    hits.add(cand)
        d += 1
    return sorted(hits)


def _sturm_chain(c: Cubic):
    # Sequences of exact Fraction polynomial coefficient tuples, high degree first.
    p = [Fraction(x) for x in (1, c.p2, c.p1, c.p0)]
    dp = [Fraction(x) for x in (3, 2 * c.p2, c.p1)]

    def polyrem(num, den):
        num = list(num)
        while len(num) >= len(den) and any(num):
            if num[0] == 0:
                num.pop(0)
                continue
            q = num[0] / den[0]
            for i in range(len(den)):
                num[i] -= q * den[i]
            num.pop(0)
        while num and num[0] == 0:
            num.pop(0)
        return num

    chain = [p, dp]
    while len(chain[-1]) > 1:
        rem = polyrem(chain[-2], chain[-1])
        if not rem:
            break
        chain.append([-x for x in rem])
    return chain


def _eval_poly(coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in coeffs:
        acc = acc * x + c
    return acc


def _sign_variations(chain, x: Fraction) -> int:
    signs = []
    for coeffs in chain:
        v = _eval_poly(coeffs, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(c: Cubic, lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in (lo, hi], by exact Sturm count."""
    chain = _sturm_chain(c)
    return _sign_variations(chain, lo) - _sign_variations(chain, hi)


def cauchy_bound(c: Cubic) -> int:
    return 1 + max(abs(c.p2), abs(c.p1), abs(c.p0))


def isolate_real_roots(c: Cubic, precision: int = 64):
    """Bracket every distinct real root to width < 2^-precision.

    Returns a list of exact (lo, hi) Fraction pairs in increasing order.
    Multiple roots (discriminant 0) are returned as degenerate (r, r) pairs
    when rational; irrational multiple roots cannot occur for monic integer
    cubics, so this is exhaustive.
    """
    disc = discriminant(c)
    if disc == 0:
        rs = rational_roots(c)
        if not rs:
            raise UncertifiedRoots("vanishing discriminant without rational root")
        return [(Fraction(r), Fraction(r)) for r in rs]

    bound = cauchy_bound(c)
    chain = _sturm_chain(c)

    def var(x):
        return _sign_variations(chain, x)

    intervals = []
    stack = [(Fraction(-bound), Fraction(bound))]
    width_goal = Fraction(1, 2**precision)
    while stack:
        lo, hi = stack.pop()
        n = var(lo) - var(hi)
        if n == 0:
            continue
        if n == 1:
            # refine by bisection on sign changes of the Sturm count
            while hi - lo > width_goal:
                mid = (lo + hi) / 2
                if var(lo) - var(mid) == 1:
                    hi = mid
                else:
                    lo = mid
            intervals.append((lo, hi))
        else:
            mid = (lo + hi) / 2
            if c(mid) == 0:
                intervals.append((mid, mid))
                eps = Fraction(1, 2**(precision + 4))
                stack.append((lo, mid - eps))
                stack.append((mid + eps, hi))
            else:
                stack.append((lo, mid))
                stack.append((mid, hi))
    return sorted(intervals)
