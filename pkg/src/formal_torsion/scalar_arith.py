"""Arithmetic in W/p^N, where W is the ring of integers of the degree-f
unramified extension of Q_p, plus exact rational valuations.

Raw representatives are plain ``int`` in ``[0, p^N)`` when ``f == 1`` and
``f``-tuples of such ints (coefficients of 1, w, ..., w^(f-1)) otherwise.
Higher layers work on raw values for speed and wrap them in
:class:`PadicScalar` at their public boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product

import sympy

from .errors import ContextMismatch, IndeterminatePrecision, NonUnit


def _is_prime(n):
    return n >= 2 and all(n % k for k in range(2, int(n**0.5) + 1))


def vp_int(n, p):
    """p-adic valuation of a nonzero integer."""
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


class Valuation:
    """A value in Q + {+inf}, either exact or a lower bound.

    Comparisons order by the numeric value only; equality is structural
    (value and exactness).
    """

    __slots__ = ("value", "exact")

    def __init__(self, value=None, exact=True):
        if value is not None:
            value = Fraction(value)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "exact", bool(exact))

    def __setattr__(self, name, value):
        raise AttributeError("Valuation is immutable")

    @classmethod
    def infinity(cls):
        return cls(None, True)

    @classmethod
    def lower_bound(cls, bound):
        return cls(bound, False)

    @property
    def is_infinite(self):
        return self.value is None

    def require_exact(self):
        """Return the exact value, refusing lower bounds."""
        if not self.exact:
            raise IndeterminatePrecision(f"valuation {self} is only a lower bound")
        return self.value

    def _key(self):
        return (1, 0) if self.value is None else (0, self.value)

    @staticmethod
    def _other_key(other):
        if isinstance(other, Valuation):
            return other._key()
        return (0, Fraction(other))

    def __lt__(self, other):
        return self._key() < self._other_key(other)

    def __le__(self, other):
        return self._key() <= self._other_key(other)

    def __gt__(self, other):
        return self._key() > self._other_key(other)

    def __ge__(self, other):
        return self._key() >= self._other_key(other)

    def __eq__(self, other):
        if isinstance(other, Valuation):
            return self.value == other.value and self.exact == other.exact
        if self.exact and self.value is not None:
            try:
                return self.value == Fraction(other)
            except (TypeError, ValueError):
                return NotImplemented
        return False

    def __hash__(self):
        return hash((self.value, self.exact))

    def __add__(self, other):
        if not isinstance(other, Valuation):
            other = Valuation(other)
        if self.value is None or other.value is None:
            # +inf absorbs; an exact zero stays exact.
            exact = (self.value is None and self.exact) or (other.value is None and other.exact)
            return Valuation(None, exact)
        return Valuation(self.value + other.value, self.exact and other.exact)

    __radd__ = __add__

    def __neg__(self):
        if self.value is None or not self.exact:
            raise IndeterminatePrecision("cannot negate an infinite or lower-bound valuation")
        return Valuation(-self.value)

    def __sub__(self, other):
        if not isinstance(other, Valuation):
            other = Valuation(other)
        return self + (-other)

    def __str__(self):
        if self.value is None:
            return "inf" if self.exact else ">=inf"
        return str(self.value) if self.exact else f">={self.value}"

    def __repr__(self):
        return f"Valuation({self})"

    def to_json(self):
        return {"value": "inf" if self.value is None else str(self.value), "exact": self.exact}


def vmin(*vals):
    """Minimum of valuations. Exact when some exact value attains it, since every
    lower bound then sits at or above it."""
    vals = [v if isinstance(v, Valuation) else Valuation(v) for v in vals]
    lowest = min(vals)
    if any(v.exact and v._key() == lowest._key() for v in vals):
        return Valuation(lowest.value, True)
    return Valuation(lowest.value, False)


@lru_cache(maxsize=None)
def unramified_modulus(p, f):
    """Smallest monic degree-f polynomial over F_p (coefficients compared
    from x^(f-1) down to x^0) that is irreducible and has a primitive root.

    Returned low-to-high, monic coefficient last.
    """
    if f == 1:
        return (0, 1)
    x = sympy.Symbol("x")
    q = p**f
    primes = list(sympy.factorint(q - 1))
    for tail in product(range(p), repeat=f):
        coeffs = (1,) + tail  # high to low
        if coeffs[-1] == 0:
            continue
        if not sympy.Poly(list(coeffs), x, modulus=p).is_irreducible:
            continue
        low = tuple(reversed(coeffs))
        if all(_powmod_x(p, low, (q - 1) // r) != _one(f) for r in primes):
            return low
    raise AssertionError("no primitive polynomial found")


def _one(f):
    return (1,) + (0,) * (f - 1)


def _mulmod_poly(a, b, m, f, M):
    prod = [0] * (2 * f - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    for k in range(2 * f - 2, f - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            for j in range(f):
                prod[k - f + j] -= c * m[j]
    return tuple(c % M for c in prod[:f])


def _powmod_x(p, m, n):
    f = len(m) - 1
    result, base = _one(f), (0, 1) + (0,) * (f - 2)
    while n:
        if n & 1:
            result = _mulmod_poly(result, base, m, f, p)
        base = _mulmod_poly(base, base, m, f, p)
        n >>= 1
    return result


@dataclass(frozen=True)
class PrimeConfig:
    """Prime p (odd), residue degree f, and coefficient precision N."""

    p: int
    f: int = 1
    N: int = 8

    def __post_init__(self):
        if not _is_prime(self.p) or self.p < 3:
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.f < 1:
            raise ValueError("f must be >= 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")

    @cached_property
    def q(self):
        return self.p**self.f

    @cached_property
    def pN(self):
        return self.p**self.N

    @cached_property
    def modulus(self):
        return unramified_modulus(self.p, self.f)

    def with_precision(self, N):
        return PrimeConfig(self.p, self.f, N)

    def residue_config(self):
        """The residue field F_q, realized as W/p."""
        return self.with_precision(1)

    def describe(self):
        return {"p": self.p, "f": self.f, "N": self.N, "modulus": list(self.modulus)}

    # -- raw arithmetic ---------------------------------------------------

    @cached_property
    def zero(self):
        return 0 if self.f == 1 else (0,) * self.f

    @cached_property
    def one(self):
        return 1 if self.f == 1 else _one(self.f)

    def coerce(self, x):
        """Raw representative of an int, coefficient sequence, or PadicScalar."""
        if isinstance(x, PadicScalar):
            if x.cfg != self:
                raise ContextMismatch(f"{x.cfg} vs {self}")
            return x.raw
        if isinstance(x, int):
            return x % self.pN if self.f == 1 else (x % self.pN,) + (0,) * (self.f - 1)
        seq = tuple(int(c) for c in x)
        if len(seq) > self.f:
            raise ValueError(f"expected at most {self.f} coefficients, got {len(seq)}")
        if self.f == 1:
            return seq[0] % self.pN if seq else 0
        return tuple(c % self.pN for c in seq) + (0,) * (self.f - len(seq))

    def reduce(self, raw):
        """Re-reduce a raw value from another precision of the same (p, f)."""
        if self.f == 1:
            return raw % self.pN
        return tuple(c % self.pN for c in raw)

    def add(self, a, b):
        if self.f == 1:
            return (a + b) % self.pN
        M = self.pN
        return tuple((x + y) % M for x, y in zip(a, b))

    def sub(self, a, b):
        if self.f == 1:
            return (a - b) % self.pN
        M = self.pN
        return tuple((x - y) % M for x, y in zip(a, b))

    def neg(self, a):
        if self.f == 1:
            return -a % self.pN
        return tuple(-x % self.pN for x in a)

    def mul(self, a, b):
        if self.f == 1:
            return a * b % self.pN
        return _mulmod_poly(a, b, self.modulus, self.f, self.pN)

    def mul_int(self, a, n):
        if self.f == 1:
            return a * n % self.pN
        return tuple(x * n % self.pN for x in a)

    def is_zero(self, a):
        return a == 0 if self.f == 1 else not any(a)

    def power(self, a, n):
        result, base = self.one, a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def raw_valuation(self, a):
        """Integer valuation, or None when a == 0 mod p^N."""
        if self.f == 1:
            return vp_int(a, self.p) if a else None
        vals = [vp_int(c, self.p) for c in a if c]
        return min(vals) if vals else None

    def valuation(self, a):
        k = self.raw_valuation(a)
        return Valuation.lower_bound(self.N) if k is None else Valuation(k)

    def is_unit(self, a):
        return self.raw_valuation(a) == 0

    def inv(self, a):
        if not self.is_unit(a):
            raise NonUnit(f"{a} is not a unit mod {self.p}^{self.N}")
        if self.f == 1:
            return pow(a, -1, self.pN)
        order = (self.q - 1) * self.q ** (self.N - 1)
        return self.power(a, order - 1)

    def divide_exact_p(self, a, k=1):
        """a / p^k for a divisible by p^k; the top k digits of the result are
        unknown and come back as zero."""
        pk = self.p**k
        if self.f == 1:
            if a % pk:
                raise NonUnit(f"{a} is not divisible by p^{k}")
            return a // pk
        if any(c % pk for c in a):
            raise NonUnit(f"{a} is not divisible by p^{k}")
        return tuple(c // pk for c in a)

    def symmetric(self, a):
        """Symmetric integer representative(s) in (-p^N/2, p^N/2]."""
        M = self.pN

        def s(c):
            return c - M if c > M // 2 else c

        return s(a) if self.f == 1 else tuple(s(c) for c in a)

    def residue_raw(self, a):
        """Reduction mod p as a raw element of the residue field."""
        if self.f == 1:
            return a % self.p
        return tuple(c % self.p for c in a)

    def teichmuller_raw(self, residue):
        """Teichmuller lift of a residue given as a raw residue-field element."""
        r = self.coerce(residue)
        if self.is_zero(self.residue_raw(r)):
            return self.zero
        return self.power(r, self.q ** (self.N - 1))

    def residues(self):
        """All nonzero residues, in a fixed order (base-p digits low to high)."""
        out = []
        for n in range(1, self.q):
            digits = []
            for _ in range(self.f):
                digits.append(n % self.p)
                n //= self.p
            out.append(digits[0] if self.f == 1 else tuple(digits))
        return out

    def scalar(self, x):
        return PadicScalar(self, self.coerce(x))

    def teichmuller_units(self, count):
        """``count`` Teichmuller units with pairwise distinct residues."""
        if count < 0 or count > self.q - 1:
            raise ValueError(f"count must lie in [0, {self.q - 1}]")
        return [PadicScalar(self, self.teichmuller_raw(r)) for r in self.residues()[:count]]


@dataclass(frozen=True)
class PadicScalar:
    """An element of W/p^N."""

    cfg: PrimeConfig
    raw: object

    def _raw_of(self, other):
        if isinstance(other, PadicScalar):
            if other.cfg != self.cfg:
                raise ContextMismatch(f"{self.cfg} vs {other.cfg}")
            return other.raw
        return self.cfg.coerce(other)

    def __add__(self, other):
        return PadicScalar(self.cfg, self.cfg.add(self.raw, self._raw_of(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return PadicScalar(self.cfg, self.cfg.sub(self.raw, self._raw_of(other)))

    def __rsub__(self, other):
        return PadicScalar(self.cfg, self.cfg.sub(self._raw_of(other), self.raw))

    def __neg__(self):
        return PadicScalar(self.cfg, self.cfg.neg(self.raw))

    def __mul__(self, other):
        return PadicScalar(self.cfg, self.cfg.mul(self.raw, self._raw_of(other)))

    __rmul__ = __mul__

    def __pow__(self, n):
        return PadicScalar(self.cfg, self.cfg.power(self.raw, n))

    def __eq__(self, other):
        if isinstance(other, PadicScalar):
            return self.cfg == other.cfg and self.raw == other.raw
        if isinstance(other, (int, tuple, list)):
            return self.raw == self.cfg.coerce(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.cfg, self.raw))

    def valuation(self):
        return self.cfg.valuation(self.raw)

    def is_zero(self):
        return self.cfg.is_zero(self.raw)

    def is_unit(self):
        return self.cfg.is_unit(self.raw)

    def inverse(self):
        return PadicScalar(self.cfg, self.cfg.inv(self.raw))

    def residue(self):
        rc = self.cfg.residue_config()
        return PadicScalar(rc, self.cfg.residue_raw(self.raw))

    def to_json(self):
        return self.cfg.symmetric(self.raw) if self.cfg.f == 1 else list(self.cfg.symmetric(self.raw))

    def __repr__(self):
        return f"PadicScalar({self.to_json()} mod {self.cfg.p}^{self.cfg.N})"


# Function-style aliases matching the operation names used in reports and docs.

def scalar_add(a, b):
    return a + b


def scalar_mul(a, b):
    return a * b


def scalar_valuation(a):
    return a.valuation()


def scalar_is_unit(a):
    return a.is_unit()


def scalar_invert(a):
    return a.inverse()


def scalar_teichmuller_units(cfg, count):
    return cfg.teichmuller_units(count)
