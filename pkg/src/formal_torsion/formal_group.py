"""Commutative formal group laws over W, their [n]-series, and axiom checks.

A law of dimension g is a SeriesTuple of g series in 2g variables ordered
(X_1..X_g, Y_1..Y_g). Everything is built without dividing by integers
except the Lubin-Tate solver, which runs at a guarded working precision.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from math import floor, log

from .errors import ContextMismatch, NonUnit, ShapeMismatch, SingularReduction, TruncationExceeded
from .power_series import MultiSeries, SeriesTuple, identity_tuple
from .ramified_ext import evaluate_series
from .scalar_arith import PrimeConfig, Valuation, vmin


def default_truncation(p, h_max):
    """Truncation degree able to resolve heights up to h_max."""
    return p**h_max + p + 2


@dataclass(frozen=True, eq=False)
class FormalGroupLaw:
    cfg: PrimeConfig
    dim: int
    law: SeriesTuple
    provenance: dict
    children: tuple = ()

    @property
    def D(self):
        return self.law.D

    def mul_by_int(self, n):
        """[n](X) as a g-tuple in g variables, via [k] = F(X, [k-1](X))."""
        if n < 1:
            raise ValueError("n must be >= 1")
        X = identity_tuple(self.cfg, self.dim, self.D)
        cur = X
        for _ in range(n - 1):
            cur = self.law.compose(list(X) + list(cur))
        return cur

    def mul_by_p(self):
        fp = self.mul_by_int(self.cfg.p)
        return MulPSeries(fp)

    def describe(self):
        return dict(self.provenance)


class MulPSeries(SeriesTuple):
    """The [p]-series (f_1, ..., f_g); linear part is p times the identity."""

    def __new__(cls, components):
        obj = super().__new__(cls, components)
        cfg, g = obj.cfg, len(obj)
        for i, s in enumerate(obj):
            for j in range(g):
                exps = [0] * g
                exps[j] = 1
                want = cfg.coerce(cfg.p if i == j else 0)
                if s.raw_coefficient(exps) != want:
                    raise ValueError("linear part of a [p]-series must be p * identity")
        return obj


# -- constructors ---------------------------------------------------------------


def _block_vars(cfg, g, D):
    V = MultiSeries.variables(cfg, 2 * g, D)
    return V[:g], V[g:]


def build_multiplicative(cfg, D):
    """F(X, Y) = X + Y + XY."""
    (X,), (Y,) = _block_vars(cfg, 1, D)
    return FormalGroupLaw(cfg, 1, SeriesTuple([X + Y + X * Y]), {"type": "multiplicative"})


def build_additive(cfg, D):
    (X,), (Y,) = _block_vars(cfg, 1, D)
    return FormalGroupLaw(cfg, 1, SeriesTuple([X + Y]), {"type": "additive"})


def lubin_tate_endomorphism(cfg, h, D, nvars=1, index=0):
    """f(T) = p T + T^(p^h) in variable ``index``."""
    T = MultiSeries.variable(cfg, nvars, D, index)
    return T.scale(cfg.p) + T ** (cfg.p**h)


def lubin_tate_guard(p, h, D):
    """Extra p-adic digits for the degree-by-degree solver."""
    return 2 + floor(log(max(D, 1)) / log(p**h) + 1e-9)


def build_lubin_tate(cfg, h, D, guard=None):
    """The unique law with F = X + Y mod degree 2 and F(f(X), f(Y)) = f(F(X, Y)),
    f(x) = p x + x^(p^h), solved one total degree at a time."""
    if h < 1:
        raise ValueError("height must be >= 1")
    q = cfg.p**h
    if q > D:
        raise TruncationExceeded(f"Lubin-Tate height {h} needs D >= {q}, got {D}")
    guard = lubin_tate_guard(cfg.p, h, D) if guard is None else guard
    wcfg = cfg.with_precision(cfg.N + guard)
    p = cfg.p
    F = MultiSeries(wcfg, 2, D, {(1, 0): 1, (0, 1): 1})
    for k in range(2, D + 1):
        Fk = F.with_truncation(k)
        fX = lubin_tate_endomorphism(wcfg, h, k, 2, 0)
        fY = lubin_tate_endomorphism(wcfg, h, k, 2, 1)
        lhs = Fk.compose([fX, fY])
        rhs = Fk.scale(p)
        if k >= q:
            rhs = rhs + Fk ** q
        err = (lhs - rhs).graded_part(k)
        if err.is_zero():
            continue
        # p^k Phi - p Phi + err = 0
        unit = wcfg.inv(wcfg.coerce(1 - p ** (k - 1)))
        phi = {}
        for exps, c in err.raw_items():
            phi[exps] = wcfg.mul(wcfg.divide_exact_p(c), unit)
        F = F + MultiSeries(wcfg, 2, D, phi)
    law = SeriesTuple([F.with_config(cfg)])
    return FormalGroupLaw(cfg, 1, law, {"type": "lubin_tate", "h": h})


def weierstrass_invariants(cfg, a):
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return {"b2": b2, "b4": b4, "b6": b6, "b8": b8, "discriminant": disc}


def build_elliptic(cfg, D, a=None, short=None):
    """Formal group of y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 in t = -x/y.

    ``a`` is (a1, a2, a3, a4, a6) as integers; ``short`` = (A, B) means
    y^2 = x^3 + A x + B.
    """
    if (a is None) == (short is None):
        raise ValueError("give exactly one of a=(a1,a2,a3,a4,a6) or short=(A,B)")
    if short is not None:
        A, B = short
        a = (0, 0, 0, A, B)
    a = tuple(int(c) for c in a)
    if len(a) != 5:
        raise ValueError("need five Weierstrass coefficients")
    disc = weierstrass_invariants(cfg, a)["discriminant"]
    if disc % cfg.p == 0:
        raise SingularReduction(f"discriminant {disc} is divisible by {cfg.p}")
    a1, a2, a3, a4, a6 = a

    # w(t) = t^3 + a1 t w + a2 t^2 w + a3 w^2 + a4 t w^2 + a6 w^3, to degree D + 3
    Dw = D + 3
    t = MultiSeries.variable(cfg, 1, Dw, 0)
    t3 = t**3
    w = MultiSeries.zero(cfg, 1, Dw)
    for _ in range(Dw):
        w2 = w * w
        nxt = t3 + (t * w).scale(a1) + (t * t * w).scale(a2) + w2.scale(a3) + (t * w2).scale(a4) + (w2 * w).scale(a6)
        if nxt == w:
            break
        w = nxt
    A_n = {e[0]: c for e, c in w.raw_items()}

    X, Y = MultiSeries.variables(cfg, 2, D)
    lam_terms = {}
    for n, c in A_n.items():
        if n - 1 > D:
            continue
        for i in range(n):
            key = (i, n - 1 - i)
            lam_terms[key] = cfg.add(lam_terms.get(key, cfg.zero), c)
    lam = MultiSeries(cfg, 2, D, {k: v for k, v in lam_terms.items()})
    wX = MultiSeries(cfg, 2, D, {(n, 0): c for n, c in A_n.items() if n <= D})
    nu = wX - lam * X

    lam2 = lam * lam
    lam_nu = lam * nu
    num = lam.scale(a1) + nu.scale(a2) + lam2.scale(a3) + lam_nu.scale(2 * a4) + (lam2 * nu).scale(3 * a6)
    den = 1 + lam.scale(a2) + lam2.scale(a4) + (lam2 * lam).scale(a6)
    z3 = -X - Y - num * den.inverse()
    w3 = lam * z3 + nu
    F = -(z3 * (1 - z3.scale(a1) - w3.scale(a3)).inverse())
    return FormalGroupLaw(cfg, 1, SeriesTuple([F]), {"type": "elliptic", "a": list(a)})


def build_product(children):
    """Block-diagonal law of the given factors."""
    children = list(children)
    if not children:
        raise ValueError("product needs at least one factor")
    cfg, D = children[0].cfg, children[0].D
    for c in children:
        if c.cfg != cfg:
            raise ContextMismatch("factors use different prime configurations")
        if c.D != D:
            raise ShapeMismatch("factors use different truncation degrees")
    if len(children) == 1:
        return children[0]
    g = sum(c.dim for c in children)
    comps = []
    off = 0
    for c in children:
        gc = c.dim
        positions = [off + i for i in range(gc)] + [g + off + i for i in range(gc)]
        comps.extend(s.embed(2 * g, positions) for s in c.law)
        off += gc
    desc = {"type": "product", "factors": [c.describe() for c in children]}
    return FormalGroupLaw(cfg, g, SeriesTuple(comps), desc, tuple(children))


# -- linear coordinate changes ---------------------------------------------------


def matrix_inverse(cfg, M):
    """Inverse of a square matrix over W/p^N with unit determinant (raw entries)."""
    n = len(M)
    A = [[cfg.coerce(x) for x in row] + [cfg.coerce(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if cfg.is_unit(A[r][col])), None)
        if piv is None:
            raise NonUnit("matrix determinant is not a unit")
        A[col], A[piv] = A[piv], A[col]
        inv = cfg.inv(A[col][col])
        A[col] = [cfg.mul(inv, x) for x in A[col]]
        for r in range(n):
            if r != col and not cfg.is_zero(A[r][col]):
                fac = A[r][col]
                A[r] = [cfg.sub(x, cfg.mul(fac, y)) for x, y in zip(A[r], A[col])]
    return [row[n:] for row in A]


def _linear_forms(cfg, M, nvars, D, offset=0):
    V = MultiSeries.variables(cfg, nvars, D)
    out = []
    for row in M:
        acc = MultiSeries.zero(cfg, nvars, D)
        for j, c in enumerate(row):
            acc = acc + V[offset + j].scale(c)
        out.append(acc)
    return out


def _apply_matrix(cfg, M, series):
    out = []
    for row in M:
        acc = series[0].scale(0)
        for c, s in zip(row, series):
            acc = acc + s.scale(c)
        out.append(acc)
    return out


def conjugate_tuple(cfg, tup, M):
    """M . tup(M^-1 X) for a g-tuple in g variables."""
    g = len(tup)
    Minv = matrix_inverse(cfg, M)
    inner = _linear_forms(cfg, Minv, g, tup.D)
    return SeriesTuple(_apply_matrix(cfg, [[cfg.coerce(x) for x in r] for r in M], tup.compose(inner)))


def change_coordinates(F, M):
    """The isomorphic law in coordinates Z = M X."""
    cfg, g, D = F.cfg, F.dim, F.D
    Minv = matrix_inverse(cfg, M)
    inner = _linear_forms(cfg, Minv, 2 * g, D, 0) + _linear_forms(cfg, Minv, 2 * g, D, g)
    law = _apply_matrix(cfg, [[cfg.coerce(x) for x in r] for r in M], F.law.compose(inner))
    desc = {"type": "coordinate_change", "base": F.describe(), "matrix": [[cfg.symmetric(cfg.coerce(x)) for x in r] for r in M]}
    return FormalGroupLaw(cfg, g, SeriesTuple(law), desc)


# -- checks ---------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    unit_left: bool
    unit_right: bool
    commutative: bool
    associative: bool

    @property
    def ok(self):
        return self.unit_left and self.unit_right and self.commutative and self.associative

    def to_json(self):
        return {
            "unit_left": self.unit_left,
            "unit_right": self.unit_right,
            "commutative": self.commutative,
            "associative": self.associative,
        }


def verify_group_axioms(F):
    cfg, g, D = F.cfg, F.dim, F.D
    law = F.law
    V = MultiSeries.variables(cfg, g, D)
    zero = MultiSeries.zero(cfg, g, D)
    # F(X, 0) = X and F(0, Y) = Y (all in g variables)
    unit_right = list(law.compose(V + [zero] * g)) == V
    unit_left = list(law.compose([zero] * g + V)) == V
    W2 = MultiSeries.variables(cfg, 2 * g, D)
    swapped = law.compose(W2[g:] + W2[:g])
    commutative = list(swapped) == list(law)
    # F(F(X, Y), Z) = F(X, F(Y, Z)) in 3g variables
    W3 = MultiSeries.variables(cfg, 3 * g, D)
    Xs, Ys, Zs = W3[:g], W3[g : 2 * g], W3[2 * g :]
    FXY = law.compose(Xs + Ys)
    FYZ = law.compose(Ys + Zs)
    left = law.compose(list(FXY) + Zs)
    right = law.compose(Xs + list(FYZ))
    associative = list(left) == list(right)
    return AxiomReport(unit_left, unit_right, commutative, associative)


def jacobian_det_at(fp, point):
    """det(d f_s / d X_j) at a point of O_L, with its valuation and tail bound.

    Omitted monomials of the [p]-series have degree > D, so their partial
    derivatives have degree >= D and valuation >= D * min v(point).
    """
    g = len(fp)
    entries = [[evaluate_series(s.partial_derivative(j), point)[0] for j in range(g)] for s in fp]
    det = None
    for perm in permutations(range(g)):
        inversions = sum(1 for i in range(g) for j in range(i + 1, g) if perm[i] > perm[j])
        term = entries[0][perm[0]]
        for i in range(1, g):
            term = term * entries[i][perm[i]]
        if inversions % 2:
            term = -term
        det = term if det is None else det + term
    finite = [v.value for v in (x.valuation() for x in point) if v.exact]
    tail = Valuation.lower_bound(fp.D * min(finite)) if finite else Valuation.infinity()
    return {"value": det, "valuation": det.valuation(), "tail_bound": tail}
