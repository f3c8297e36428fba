"""Independent reference computations used by the tests.

None of these call into the package's algorithms; they recompute the
expected quantity from first principles (point counting, sympy polynomial
arithmetic, brute-force hull membership, closed-form cyclotomic data).
"""
from fractions import Fraction
import random

from sympy import GF, Poly, symbols

x = symbols("x")


def count_points(a, p):
    """#E(F_p) for y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6, point at infinity included."""
    a1, a2, a3, a4, a6 = a
    n = 1
    for X in range(p):
        for Y in range(p):
            if (Y * Y + a1 * X * Y + a3 * Y - (X**3 + a2 * X * X + a4 * X + a6)) % p == 0:
                n += 1
    return n


def frobenius_trace(a, p):
    return p + 1 - count_points(a, p)


def unramified_mul(a, b, modulus_high_to_low, p, N):
    """Product in (Z/p^N)[x]/(m) via sympy; a, b are low-to-high coefficient tuples."""
    pa = Poly(list(reversed(a)), x)
    pb = Poly(list(reversed(b)), x)
    m = Poly(list(modulus_high_to_low), x)
    r = (pa * pb).rem(m)
    coeffs = [int(c) % p**N for c in reversed(r.all_coeffs())]
    coeffs += [0] * (len(a) - len(coeffs))
    return tuple(coeffs[: len(a)])


def is_irreducible_mod_p(modulus_high_to_low, p):
    return Poly(list(modulus_high_to_low), x, domain=GF(p)).is_irreducible


def hull_vertices_bruteforce(points):
    """Lower-hull vertices by definition: a point is a vertex iff no other point lies
    below-or-on it in the sense of a chord through points on both sides."""
    verts = []
    for i, (xi, yi) in enumerate(points):
        dominated = False
        for a, (xa, ya) in enumerate(points):
            for b, (xb, yb) in enumerate(points):
                if xa < xi < xb:
                    chord = ya + Fraction(yb - ya, xb - xa) * (xi - xa)
                    if chord <= yi:
                        dominated = True
        if not dominated:
            verts.append((xi, yi))
    return verts


def cyclotomic_different(p, r):
    """v(D) for Q_p(zeta_{p^r})/Q_p from Phi'(zeta) = p^r zeta^{-1} / (zeta^{p^{r-1}} - 1):
    r - v(zeta^{p^{r-1}} - 1) = r - 1/(p-1)."""
    return r - Fraction(1, p - 1)


def random_frobenius_system(rng: random.Random, p, g, singular):
    """Coefficient matrix over F_p, forced singular or nonsingular, with nonzero rows."""
    while True:
        A = [[rng.randrange(p) for _ in range(g)] for _ in range(g)]
        if singular:
            # last row a combination of the others
            coeffs = [rng.randrange(p) for _ in range(g - 1)]
            A[-1] = [sum(c * A[i][j] for i, c in enumerate(coeffs)) % p for j in range(g)]
        if any(not any(r) for r in A):
            continue
        if (det_mod(A, p) == 0) == singular:
            return A


def det_mod(A, p):
    """Determinant over F_p by Leibniz expansion (independent of the package)."""
    from itertools import permutations

    n = len(A)
    total = 0
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        prod = sign
        for i in range(n):
            prod *= A[i][perm[i]]
        total += prod
    return total % p


def forms_from_matrix(A, d):
    g = len(A)
    forms = []
    for row in A:
        form = {}
        for j, c in enumerate(row):
            if c:
                e = [0] * g
                e[j] = d
                form[tuple(e)] = c
        forms.append(form)
    return forms


# Frozen oracle outputs (recomputed and compared in test_oracles.py).
FROZEN = {
    "points_p3_x3+x": 4,
    "points_p3_x3+x2+x+1": 6,
    "points_p5_x3+1": 6,
    "points_p5_x3+x+1": 9,
    "cyclotomic_different_p3_r2": Fraction(3, 2),
}
