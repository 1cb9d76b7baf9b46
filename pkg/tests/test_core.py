from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rauzygasket.core import (
    Cubic,
    DegenerateOrder,
    IntMatrix3,
    NonPositiveLength,
    NotUnimodular,
    char_poly,
    count_real_roots,
    discriminant,
    is_perfect_square,
    isolate_real_roots,
    make_system,
    mat_inverse_unimodular,
    rational_roots,
)
from rauzygasket.cocycle import B1_MATRIX, B2_MATRIX, b_block, step_factor
from rauzygasket.induction import random_word


def test_make_system_sorted():
    s = make_system("0.6", "0.25", "0.15")
    assert s.lengths == (Fraction(3, 5), Fraction(1, 4), Fraction(3, 20))
    assert s.tau == (1, 2, 3)


def test_make_system_permuted():
    s = make_system("0.25", "0.6", "0.15")
    assert s.tau == (2, 1, 3)
    assert s.sorted_lengths[0] == Fraction(3, 5)


def test_make_system_rescales():
    s = make_system(3, 2, 1)
    assert sum(s.lengths) == 1
    assert s.lengths == (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6))


def test_make_system_rejects_ties():
    with pytest.raises(DegenerateOrder):
        make_system(1, 1, 1)
    with pytest.raises(NonPositiveLength):
        make_system(1, 0, 2)


def test_char_poly_b1():
    assert char_poly(B1_MATRIX) == Cubic(-19, 9, -1)


def test_char_poly_b2():
    assert char_poly(B2_MATRIX) == Cubic(-16, 8, -1)


def test_char_poly_identity():
    assert char_poly(IntMatrix3.identity()) == Cubic(-3, 3, -1)


def test_discriminants():
    assert discriminant(Cubic(-19, 9, -1)) == 1940
    assert discriminant(Cubic(-16, 8, -1)) == 229
    assert discriminant(Cubic(-3, 3, -1)) == 0


def test_perfect_square():
    assert not is_perfect_square(1940)
    assert not is_perfect_square(229)
    assert not is_perfect_square(444260)
    assert is_perfect_square(443556)  # 666^2


def test_unitriangular_inverse():
    m = b_block(2)
    inv = mat_inverse_unimodular(m)
    assert inv == IntMatrix3.from_rows([[1, 0, 0], [-2, 1, 0], [-2, 0, 1]])
    assert m @ inv == IntMatrix3.identity()


def test_inverse_requires_unimodular():
    with pytest.raises(NotUnimodular):
        mat_inverse_unimodular(IntMatrix3.from_rows([[2, 0, 0], [0, 1, 0], [0, 0, 1]]))


def test_transpose_of_winner_matrix():
    r1 = IntMatrix3.from_rows([[1, 1, 1], [0, 1, 0], [0, 0, 1]])
    assert r1.T == IntMatrix3.from_rows([[1, 0, 0], [1, 1, 0], [1, 0, 1]])


def test_unimodularity_of_path_products():
    # |det| = 1 for word products of cocycle blocks and permutations
    rng = np.random.default_rng(0)
    for _ in range(1000):
        w = random_word(rng, int(rng.integers(1, 15)))
        m = IntMatrix3.identity()
        for s in w:
            m = step_factor(s, "B") @ m
        assert m.det() in (1, -1)


def test_rational_roots_monic():
    assert rational_roots(Cubic(-3, 3, -1)) == [1]
    assert rational_roots(Cubic(-19, 9, -1)) == []
    assert rational_roots(Cubic(0, -4, 0)) == [-2, 0, 2]


def test_isolation_brackets_roots():
    poly = Cubic(-19, 9, -1)
    brackets = isolate_real_roots(poly, 64)
    assert len(brackets) == 3
    for lo, hi in brackets:
        assert hi - lo <= Fraction(1, 2**64)
        if lo != hi:
            assert poly(lo) * poly(hi) < 0
    # product of roots is -p0 = 1 within the interval bounds
    prod_lo = brackets[0][0] * brackets[1][0] * brackets[2][0]
    prod_hi = brackets[0][1] * brackets[1][1] * brackets[2][1]
    assert prod_lo <= 1 <= prod_hi


def test_isolation_multiple_root():
    assert isolate_real_roots(Cubic(-3, 3, -1), 32) == [(1, 1)]


def test_sturm_count_matches_discriminant_sign():
    rng = np.random.default_rng(1)
    for _ in range(200):
        c = Cubic(int(rng.integers(-9, 10)), int(rng.integers(-9, 10)),
                  int(rng.integers(-9, 10)))
        disc = discriminant(c)
        if disc == 0:
            continue
        bound = 1 + max(abs(c.p2), abs(c.p1), abs(c.p0))
        n = count_real_roots(c, Fraction(-bound), Fraction(bound))
        assert n == (3 if disc > 0 else 1)


@given(st.integers(1, 60), st.integers(1, 60), st.integers(1, 60))
@settings(max_examples=60, deadline=None)
def test_make_system_normalizes(x, y, z):
    if len({x, y, z}) != 3:
        return
    s = make_system(x, y, z)
    assert sum(s.lengths) == 1
    a, b, c = s.sorted_lengths
    assert a > b > c > 0
