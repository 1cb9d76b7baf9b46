#!/usr/bin/env python3
"""Exact integer certificates for the two loop matrices that drive the
spectrum-simplicity argument.

Everything here is integer arithmetic: characteristic polynomials and
discriminants are exact, root brackets come from rational bisection, and the
Galois facts reduce to two integer predicates (irreducibility and a
non-square discriminant).
"""

from rauzygasket import (
    B1_MATRIX,
    B2_MATRIX,
    char_poly,
    discriminant,
    is_galois_pinching,
    is_pisot,
    is_twisting_pair,
    isolate_real_roots,
    loop_word,
    path_cocycle,
)

# The two matrices arise as cocycle products along one 3-cycle loop of the
# accelerated graph, with per-step simple-iteration counts (1,1,5) and (1,1,4).
for counts, expected in (((1, 1, 5), B1_MATRIX), ((1, 1, 4), B2_MATRIX)):
    prod = path_cocycle(loop_word(counts), "B").product
    assert prod == expected
    print(f"loop counts {counts} ->")
    print(prod)
    poly = char_poly(prod)
    print("  char poly:", poly, "| discriminant:", discriminant(poly))
    print("  real-root brackets:",
          [(float(lo), float(hi)) for lo, hi in isolate_real_roots(poly, 40)])
    print("  pisot:", is_pisot(prod))
    ok, cert = is_galois_pinching(prod)
    print("  galois-pinching:", ok)
    for fact in cert.facts:
        print("   -", fact)
    print()

twisting, cert = is_twisting_pair(B1_MATRIX, B2_MATRIX)
print("pair is twisting:", twisting)
print("discriminant product:", cert.disc_product,
      "(666^2 =", 666 ** 2, ", 667^2 =", 667 ** 2, ")")
