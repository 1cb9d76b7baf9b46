"""The two integer cocycles over the accelerated induction and the exact
certificates consumed by the simplicity criterion: Pisot structure,
Galois-pinching, and the twisting test for a pair of loop matrices.

Conventions (pinned by reproducing the two loop matrices of the final
estimation section exactly): one accelerated step with branch j and count n
contributes the factor P_j . B(n) for the length cocycle and P_j . A(n) for
the orientation cocycle, and factors accumulate on the left in time order.
Then (B_w^T)^-1 = A_w holds for every word, and the sorted-coordinate
length transfer of the word is B_w^T.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .core import (
    Cubic,
    IntMatrix3,
    UncertifiedRoots,
    char_poly,
    discriminant,
    is_perfect_square,
    isolate_real_roots,
    mat_inverse_unimodular,
    rational_roots,
)
from .induction import PathStep, Word, advance_vertex


class NonPositiveN(ValueError):
    """Block count must be a positive integer."""


class TieOrNonPositive(ValueError):
    """Fully subtractive step needs strictly positive, distinct coordinates."""


PERM_2 = IntMatrix3.from_rows([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
PERM_3 = IntMatrix3.from_rows([[0, 1, 0], [0, 0, 1], [1, 0, 0]])

B1_MATRIX = IntMatrix3.from_rows([[12, 6, 5], [11, 6, 5], [2, 1, 1]])
B2_MATRIX = IntMatrix3.from_rows([[10, 5, 4], [9, 5, 4], [2, 1, 1]])


def b_block(n: int) -> IntMatrix3:
    """Length-cocycle block for n same-winner steps: [[1,0,0],[n,1,0],[n,0,1]]."""
    if n < 1:
        raise NonPositiveN(f"n must be >= 1, got {n}")
    return IntMatrix3.from_rows([[1, 0, 0], [n, 1, 0], [n, 0, 1]])


def a_block(n: int) -> IntMatrix3:
    """Orientation-cocycle block: [[1,-n,-n],[0,1,0],[0,0,1]]."""
    if n < 1:
        raise NonPositiveN(f"n must be >= 1, got {n}")
    return IntMatrix3.from_rows([[1, -n, -n], [0, 1, 0], [0, 0, 1]])


def step_factor(step: PathStep, variant: str = "B") -> IntMatrix3:
    """Cocycle factor of one accelerated step (permutation times block)."""
    perm = PERM_2 if step.branch == 2 else PERM_3
    block = b_block(step.n) if variant == "B" else a_block(step.n)
    return perm @ block


@dataclass(frozen=True)
class CocyclePath:
    """Ordered cocycle product along a word, with order-tracking permutation."""

    word: Word
    variant: str
    product: IntMatrix3
    permutation: Tuple[int, int, int]


def path_cocycle(w: Word, variant: str = "B") -> CocyclePath:
    """Exact product of per-step factors, last step leftmost (time order)."""
    if not w:
        raise ValueError("empty word")
    if variant not in ("B", "A"):
        raise ValueError(f"variant must be 'B' or 'A', got {variant!r}")
    prod = IntMatrix3.identity()
    tau = (1, 2, 3)
    for step in w:
        prod = step_factor(step, variant) @ prod
        tau = advance_vertex(tau, step.branch)
    return CocyclePath(tuple(w), variant, prod, tau)


def is_positive_path(w: Word) -> bool:
    """True iff the B-product of the word has all entries >= 1."""
    return path_cocycle(w, "B").product.min_entry() >= 1


def fully_subtractive_step(x: Sequence) -> tuple:
    """Subtract the smallest coordinate from the two others."""
    if len(x) != 3 or any(v <= 0 for v in x):
        raise TieOrNonPositive(f"need three positive values, got {x}")
    m = min(x)
    if sum(1 for v in x if v == m) > 1:
        raise TieOrNonPositive(f"tied minimum in {x}")
    return tuple(v if v == m else v - m for v in x)


# ---------------------------------------------------------------------------
# Certificates


@dataclass(frozen=True)
class Certificate:
    matrix: IntMatrix3
    poly: Cubic
    disc: int
    irreducible: bool
    all_real: bool
    galois_s3: bool
    pisot: Optional[bool]
    facts: Tuple[str, ...]

    @property
    def pinching(self) -> bool:
        return self.irreducible and self.all_real and self.galois_s3

    def to_dict(self) -> dict:
        return {
            "matrix": self.matrix.to_lists(),
            "char_poly": {"p2": self.poly.p2, "p1": self.poly.p1, "p0": self.poly.p0,
                          "text": str(self.poly)},
            "discriminant": self.disc,
            "pinching": self.pinching,
            "pisot": self.pisot,
            "facts": list(self.facts),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def is_pisot(m: IntMatrix3, precision: int = 64) -> bool:
    """Certified Pisot test: a simple real eigenvalue > 1 dominates and every
    other eigenvalue has modulus < 1.

    Certification uses exact sign evaluation only: real roots are bracketed by
    rational bisection, and for a complex pair the modulus bound comes from
    the coefficient relation |z|^2 = |p0| / lambda_1.
    """
    poly = char_poly(m)
    disc = discriminant(poly)
    if disc == 0:
        return False
    brackets = isolate_real_roots(poly, precision)
    if disc > 0:
        # three distinct real roots
        (l3lo, l3hi), (l2lo, l2hi), (l1lo, l1hi) = brackets
        if not (l1lo > 1):
            return False
        if not (abs(l2lo) < 1 and abs(l2hi) < 1 and abs(l3lo) < 1 and abs(l3hi) < 1):
            if abs(l2lo) >= 1 or abs(l2hi) >= 1 or abs(l3lo) >= 1 or abs(l3hi) >= 1:
                # bracket straddles or exceeds the unit circle: refine once more
                tight = isolate_real_roots(poly, precision * 2)
                (l3lo, l3hi), (l2lo, l2hi), (l1lo, l1hi) = tight
                if max(abs(l2lo), abs(l2hi), abs(l3lo), abs(l3hi)) >= 1:
                    return False
        return True
    # one real root, a complex conjugate pair of modulus sqrt(|p0|/root)
    (rlo, rhi), = brackets
    if not (rlo > 1):
        return False
    # modulus^2 = |p0| / root < 1  <=>  root > |p0|
    return rlo > abs(poly.p0)


def is_galois_pinching(m: IntMatrix3) -> Tuple[bool, Certificate]:
    """Irreducible over Q, all roots real, Galois group S3 (non-square disc)."""
    poly = char_poly(m)
    disc = discriminant(poly)
    irreducible = not rational_roots(poly)
    all_real = disc > 0
    galois_s3 = disc > 0 and not is_perfect_square(disc)
    facts = (
        f"char_poly = {poly}",
        f"irreducible over Q: {irreducible} (no integer root divides {poly.p0})",
        f"discriminant = {disc} ({'positive: all roots real' if all_real else 'not positive'})",
        f"discriminant {'is not' if not is_perfect_square(disc) else 'is'} a perfect square",
    )
    pisot = None
    if irreducible and all_real:
        try:
            pisot = is_pisot(m)
        except UncertifiedRoots:
            pisot = None
    cert = Certificate(m, poly, disc, irreducible, all_real, galois_s3, pisot, facts)
    return cert.pinching, cert


@dataclass(frozen=True)
class TwistingCertificate:
    first: Certificate
    second: Certificate
    polys_distinct: bool
    disc_product: int
    disc_product_square: bool

    @property
    def twisting(self) -> bool:
        return (self.first.pinching and self.second.pinching
                and self.polys_distinct and not self.disc_product_square)

    def to_dict(self) -> dict:
        return {
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "polys_distinct": self.polys_distinct,
            "disc_product": self.disc_product,
            "disc_product_square": self.disc_product_square,
            "twisting": self.twisting,
        }


def is_twisting_pair(m1: IntMatrix3, m2: IntMatrix3) -> Tuple[bool, TwistingCertificate]:
    """Desk-scale disjoint-splitting-fields test for a pinching pair.

    Requires: both matrices Galois-pinching, distinct characteristic
    polynomials, and disc1*disc2 not a perfect square (so the two quadratic
    resolvent subfields differ, which separates the splitting fields for
    distinct irreducible cubics).
    """
    ok1, c1 = is_galois_pinching(m1)
    ok2, c2 = is_galois_pinching(m2)
    distinct = c1.poly != c2.poly
    prod = c1.disc * c2.disc
    cert = TwistingCertificate(c1, c2, distinct, prod, is_perfect_square(prod))
    return cert.twisting, cert


def loop_word(counts: Sequence[int], branch: int = 3) -> Word:
    """Closed loop on the accelerated graph (branch-3 arrows close in 3 steps,
    branch-2 arrows in 2) with the given per-step counts."""
    return tuple(PathStep(branch, int(n)) for n in counts)


def dominant_root_brackets(poly: Cubic, precision: int = 64):
    """Exact rational brackets of all real roots, sorted ascending."""
    return isolate_real_roots(poly, precision)
