"""Totally ramified extensions L = Frac(W)(pi), E(pi) = 0 with E Eisenstein.

Elements are stored in the basis 1, pi, ..., pi^(e-1) with coefficients in
W/p^N, i.e. as elements of O_L / p^N O_L. Because the fractional parts i/e
are distinct, v(sum c_i pi^i) = min(v(c_i) + i/e) with no cancellation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd

from .errors import (
    ContextMismatch,
    EmbeddingResidual,
    IndeterminatePrecision,
    NonUnit,
    ShapeMismatch,
)
from .scalar_arith import PadicScalar, PrimeConfig, Valuation, vmin


class EisensteinExtension:
    """O_L = W[pi], pi a root of the Eisenstein polynomial E (low-to-high, monic)."""

    def __init__(self, cfg: PrimeConfig, coeffs):
        coeffs = [cfg.coerce(c) for c in coeffs]
        if len(coeffs) < 2:
            raise ValueError("Eisenstein polynomial must have degree >= 1")
        if coeffs[-1] != cfg.one:
            raise ValueError("Eisenstein polynomial must be monic")
        if cfg.raw_valuation(coeffs[0]) != 1:
            raise ValueError("constant term must have valuation exactly 1")
        for c in coeffs[1:-1]:
            k = cfg.raw_valuation(c)
            if k is not None and k < 1:
                raise ValueError("non-leading coefficients must be divisible by p")
        self.cfg = cfg
        self.E = tuple(coeffs)
        self.e = len(coeffs) - 1
        # pi^e = -(E_0 + ... + E_{e-1} pi^{e-1})
        self._red = tuple(cfg.neg(c) for c in coeffs[:-1])

    @classmethod
    def pure(cls, cfg, e, constant):
        """E(X) = X^e + constant, with v(constant) = 1."""
        return cls(cfg, [constant] + [0] * (e - 1) + [1])

    @classmethod
    def cyclotomic(cls, cfg, r):
        """E(X) = Phi_{p^r}(1 + X); pi = zeta_{p^r} - 1."""
        p = cfg.p
        step = p ** (r - 1)
        e = step * (p - 1)
        coeffs = [0] * (e + 1)
        for k in range(p):
            n = k * step
            for i in range(n + 1):
                coeffs[i] += comb(n, i)
        return cls(cfg, coeffs)

    @property
    def tame(self):
        return gcd(self.e, self.cfg.p) == 1

    def __eq__(self, other):
        return isinstance(other, EisensteinExtension) and self.cfg == other.cfg and self.E == other.E

    def __hash__(self):
        return hash((self.cfg, self.E))

    def describe(self):
        return {
            "e": self.e,
            "eisenstein": [self.cfg.symmetric(c) if self.cfg.f == 1 else list(self.cfg.symmetric(c)) for c in self.E],
            "tame": self.tame,
        }

    def __repr__(self):
        return f"EisensteinExtension(e={self.e}, E={self.describe()['eisenstein']})"

    # -- elements ---------------------------------------------------------

    def element(self, coeffs):
        coeffs = [self.cfg.coerce(c) for c in coeffs]
        if len(coeffs) > self.e:
            return self.from_poly(coeffs)
        coeffs += [self.cfg.zero] * (self.e - len(coeffs))
        return RamifiedElement(self, tuple(coeffs))

    def scalar(self, c):
        return self.element([c])

    @property
    def zero(self):
        return RamifiedElement(self, (self.cfg.zero,) * self.e)

    @property
    def one(self):
        return self.scalar(1)

    @property
    def pi(self):
        if self.e == 1:
            return self.scalar(self.cfg.neg(self.E[0]))
        return self.element([0, 1])

    def from_poly(self, coeffs):
        """f(pi) for a polynomial f over W given low-to-high."""
        return self.evaluate_poly(coeffs, self.pi)

    def evaluate_poly(self, coeffs, x):
        acc = self.zero
        for c in reversed([self.cfg.coerce(c) for c in coeffs]):
            acc = acc * x + self.scalar(c)
        return acc

    def _reduce(self, prod):
        cfg, e, red = self.cfg, self.e, self._red
        if cfg.f == 1:
            M = cfg.pN
            for k in range(len(prod) - 1, e - 1, -1):
                c = prod[k] % M
                if c:
                    base = k - e
                    for i, r in enumerate(red):
                        if r:
                            prod[base + i] += c * r
                prod[k] = 0
            return tuple(c % M for c in prod[:e])
        for k in range(len(prod) - 1, e - 1, -1):
            c = prod[k]
            if not cfg.is_zero(c):
                base = k - e
                for i, r in enumerate(red):
                    prod[base + i] = cfg.add(prod[base + i], cfg.mul(c, r))
            prod[k] = cfg.zero
        return tuple(prod[:e])

    def different_valuation(self):
        """v(D_{L/K}) = v(E'(pi))."""
        deriv = [self.cfg.mul_int(c, i) for i, c in enumerate(self.E)][1:]
        v = self.from_poly(deriv).valuation()
        if not v.exact:
            raise IndeterminatePrecision(f"E'(pi) vanishes to precision N={self.cfg.N}")
        return v


@dataclass(frozen=True, eq=False)
class RamifiedElement:
    ext: EisensteinExtension
    coeffs: tuple

    def _other(self, other):
        if isinstance(other, RamifiedElement):
            if other.ext != self.ext:
                raise ContextMismatch("elements of different extensions")
            return other
        if isinstance(other, (int, PadicScalar)):
            return self.ext.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._other(other)
        cfg = self.ext.cfg
        return RamifiedElement(self.ext, tuple(cfg.add(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._other(other)
        cfg = self.ext.cfg
        return RamifiedElement(self.ext, tuple(cfg.sub(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return self._other(other) - self

    def __neg__(self):
        cfg = self.ext.cfg
        return RamifiedElement(self.ext, tuple(cfg.neg(a) for a in self.coeffs))

    def __mul__(self, other):
        other = self._other(other)
        ext = self.ext
        cfg = ext.cfg
        e = ext.e
        if cfg.f == 1:
            prod = [0] * (2 * e - 1)
            for i, a in enumerate(self.coeffs):
                if a:
                    for j, b in enumerate(other.coeffs):
                        prod[i + j] += a * b
        else:
            prod = [cfg.zero] * (2 * e - 1)
            for i, a in enumerate(self.coeffs):
                if not cfg.is_zero(a):
                    for j, b in enumerate(other.coeffs):
                        prod[i + j] = cfg.add(prod[i + j], cfg.mul(a, b))
        return RamifiedElement(ext, ext._reduce(prod))

    __rmul__ = __mul__

    def __pow__(self, n):
        result, base = self.ext.one, self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, RamifiedElement):
            return self.ext == other.ext and self.coeffs == other.coeffs
        if isinstance(other, (int, PadicScalar)):
            return self == self.ext.scalar(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.ext, self.coeffs))

    def is_zero(self):
        return all(self.ext.cfg.is_zero(c) for c in self.coeffs)

    def valuation(self):
        cfg, e = self.ext.cfg, self.ext.e
        best = None
        for i, c in enumerate(self.coeffs):
            k = cfg.raw_valuation(c)
            if k is not None:
                v = k + Fraction(i, e)
                if best is None or v < best:
                    best = v
        return Valuation.lower_bound(cfg.N) if best is None else Valuation(best)

    def inverse(self):
        """Inverse of a unit, by Newton iteration b <- b(2 - ab)."""
        cfg = self.ext.cfg
        if not cfg.is_unit(self.coeffs[0]):
            raise NonUnit("element is not a unit of O_L")
        b = self.ext.scalar(cfg.inv(self.coeffs[0]))
        one = self.ext.one
        for _ in range(64):
            ab = self * b
            if ab == one:
                return b
            b = b * (2 - ab)
        raise AssertionError("unit inversion failed to converge")

    def basis_poly(self):
        return [PadicScalar(self.ext.cfg, c) for c in self.coeffs]

    def derivative_at_pi(self):
        """f'(pi) for the basis polynomial f of this element."""
        cfg = self.ext.cfg
        return self.ext.from_poly([cfg.mul_int(c, i) for i, c in enumerate(self.coeffs)][1:] or [0])

    def to_json(self):
        cfg = self.ext.cfg
        return [cfg.symmetric(c) if cfg.f == 1 else list(cfg.symmetric(c)) for c in self.coeffs]

    def __repr__(self):
        return f"RamifiedElement({self.to_json()} in e={self.ext.e})"


# -- delta --------------------------------------------------------------------


def _min0(val: Valuation) -> Valuation:
    """min(val, 0), refusing to guess when val is an undecisive lower bound."""
    if val.exact:
        return vmin(val, Valuation(0))
    if val.value is None or val.value >= 0:
        return Valuation(0)
    raise IndeterminatePrecision(f"min({val}, 0) is undetermined")


def _at_least(val: Valuation, bound) -> bool:
    bound = bound.require_exact() if isinstance(bound, Valuation) else Fraction(bound)
    if val.exact:
        return val.value is None or val.value >= bound
    if val.value is None or val.value >= bound:
        return True
    raise IndeterminatePrecision(f"cannot decide {val} >= {bound}")


@dataclass(frozen=True)
class DeltaReport:
    element: list
    f: list
    v_f_prime: Valuation
    v_different: Valuation
    delta: Valuation
    in_O1: bool
    extension: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "element": self.element,
            "f": self.f,
            "v_f_prime": self.v_f_prime.to_json(),
            "v_different": self.v_different.to_json(),
            "delta": self.delta.to_json(),
            "in_O1": self.in_O1,
        }


def delta(a: RamifiedElement, f_hint=None) -> DeltaReport:
    """delta(a) = min(v(f'(pi)) - v(D_{L/K}), 0) for any f over W with f(pi) = a."""
    ext = a.ext
    cfg = ext.cfg
    if f_hint is None:
        f = list(a.coeffs)
        fprime = a.derivative_at_pi()
    else:
        f = [cfg.coerce(c) for c in f_hint]
        if ext.from_poly(f) != a:
            raise ValueError("f_hint(pi) does not equal the element")
        fprime = ext.from_poly([cfg.mul_int(c, i) for i, c in enumerate(f)][1:] or [0])
    v_fp = fprime.valuation()
    v_d = ext.different_valuation()
    if v_fp.exact:
        d = _min0(v_fp - v_d)
    elif v_fp.value >= v_d.value:
        d = Valuation(0)
    else:
        raise IndeterminatePrecision(f"v(f'(pi)) >= {v_fp.value} does not decide delta against v(D) = {v_d}")
    sym = [cfg.symmetric(c) if cfg.f == 1 else list(cfg.symmetric(c)) for c in f]
    return DeltaReport(
        element=a.to_json(),
        f=sym,
        v_f_prime=v_fp,
        v_different=v_d,
        delta=d,
        in_O1=d.value == 0,
        extension=ext.describe(),
    )


def delta_properties_check(a: RamifiedElement, b: RamifiedElement, poly=(0, 0, 1)) -> dict:
    """Check the delta-lemma properties on one pair.

    (1) delta(a+b) >= min(delta(a), delta(b)), with equality when they differ.
    (2) delta(ab) >= min(delta(a) + v(b), delta(b) + v(a), 0).
    (3) delta(poly(a)) == min(v(poly'(a)) + delta(a), 0).
    (4) x*dy == 0 (v(x) + v(g'(pi)) >= v(D), y = g(pi)) iff v(x) + delta(y) >= 0, with x = a, y = b.
    """
    if a.ext != b.ext:
        raise ShapeMismatch("elements of different extensions")
    ext = a.ext
    cfg = ext.cfg
    da, db = delta(a).delta, delta(b).delta
    va, vb = a.valuation(), b.valuation()
    v_d = ext.different_valuation()

    d_sum = delta(a + b).delta
    p1 = d_sum >= min(da, db)
    p1_eq = (d_sum == min(da, db)) if da != db else None

    d_prod = delta(a * b).delta
    rhs2 = vmin(da + vb, db + va, Valuation(0))
    p2 = d_prod >= rhs2.require_exact()

    poly = [cfg.coerce(c) for c in poly]
    image = ext.evaluate_poly(poly, a)
    dpoly = [cfg.mul_int(c, i) for i, c in enumerate(poly)][1:] or [0]
    lhs3 = delta(image).delta
    rhs3 = _min0(ext.evaluate_poly(dpoly, a).valuation() + da)
    p3 = lhs3 == rhs3

    annihilated = _at_least(va + b.derivative_at_pi().valuation(), v_d)
    criterion = _at_least(va + db, 0)
    p4 = annihilated == criterion

    return {
        "delta_a": da,
        "delta_b": db,
        "delta_sum": d_sum,
        "delta_prod": d_prod,
        "prop1": p1,
        "prop1_equality": p1_eq,
        "prop2": p2,
        "prop2_rhs": rhs2,
        "prop3": p3,
        "prop3_lhs": lhs3,
        "prop3_rhs": rhs3,
        "prop4": p4,
        "prop4_annihilated": annihilated,
        "ok": p1 and p1_eq is not False and p2 and p3 and p4,
    }


EMBEDDING_THRESHOLD = Fraction(3, 4)


def change_presentation(a: RamifiedElement, larger: EisensteinExtension, embedding: RamifiedElement) -> RamifiedElement:
    """Re-express a in a larger extension, given the image of pi there."""
    if embedding.ext != larger:
        raise ContextMismatch("embedding must live in the larger extension")
    if a.ext.cfg != larger.cfg:
        raise ContextMismatch("extensions over different coefficient rings")
    residual = larger.evaluate_poly(a.ext.E, embedding).valuation()
    need = EMBEDDING_THRESHOLD * larger.cfg.N
    if residual.value is not None and residual.value < need:
        raise EmbeddingResidual(f"v(E(iota(pi))) = {residual} < {need}")
    return larger.evaluate_poly(a.coeffs, embedding)


def cyclotomic_delta(cfg: PrimeConfig, r: int) -> dict:
    """delta of eps_r = zeta_{p^r} and of d(eps_r)/eps_r, next to the constant
    -r - 1/(p^r (p-1)) quoted for the latter; only the computed values are
    asserted anywhere."""
    ext = EisensteinExtension.cyclotomic(cfg, r)
    eps = ext.one + ext.pi
    rep = delta(eps)
    p = cfg.p
    # delta(a db) = min(v(a) + delta(b), 0) with a = 1/eps a unit.
    log_form = _min0(Valuation(0) + rep.delta)
    return {
        "p": p,
        "r": r,
        "e": ext.e,
        "v_different": rep.v_different,
        "v_different_formula": Valuation(r - Fraction(1, p - 1)),
        "delta_eps": rep.delta,
        "delta_dlog_computed": log_form,
        "delta_dlog_quoted": Valuation(-r - Fraction(1, p**r * (p - 1))),
    }


def evaluate_series(series, point):
    """Evaluate a MultiSeries at a point of O_L with positive-valuation coordinates.

    Returns (value, tail_bound) where tail_bound lower-bounds the valuation of
    every omitted monomial of degree > D.
    """
    point = list(point)
    if len(point) != series.nvars:
        raise ShapeMismatch(f"need {series.nvars} coordinates, got {len(point)}")
    ext = point[0].ext
    for x in point:
        if x.ext != ext:
            raise ContextMismatch("point coordinates lie in different extensions")
    if ext.cfg != series.cfg:
        raise ContextMismatch("series and extension use different coefficient rings")
    vals = [x.valuation() for x in point]
    for v in vals:
        if v.value is not None and v.value <= 0:
            raise ValueError("evaluation point must have positive valuation")
    finite = [v.value for v in vals if v.exact]
    tail = Valuation.lower_bound((series.D + 1) * min(finite)) if finite else Valuation.infinity()

    powers = []
    for i, x in enumerate(point):
        top = max((e[i] for e in series.monomials()), default=0)
        pw = [ext.one]
        for _ in range(top):
            pw.append(pw[-1] * x)
        powers.append(pw)
    acc = ext.zero
    for e, c in series.raw_items():
        term = ext.scalar(c)
        for i, k in enumerate(e):
            if k:
                term = term * powers[i][k]
        acc = acc + term
    return acc, tail


def ext_valuation(a):
    return a.valuation()


def different_valuation(ext):
    return ext.different_valuation()
