"""Multivariate power series over W/p^N truncated at a total degree D.

Storage is sparse. Exponent vectors are packed into a single integer
``sum(e_i * B**i)`` with ``B = D + 1``; since stored and product monomials
never exceed total degree D, packed keys add without carries.
"""
from __future__ import annotations

from .errors import ContextMismatch, ShapeMismatch, TruncationExceeded
from .scalar_arith import PadicScalar, PrimeConfig, Valuation


class _Shape:
    """Packing helpers for a fixed (nvars, D)."""

    _cache = {}

    def __new__(cls, nvars, D):
        key = (nvars, D)
        shape = cls._cache.get(key)
        if shape is None:
            shape = super().__new__(cls)
            shape.nvars = nvars
            shape.D = D
            shape.B = D + 1
            shape.unit = tuple(shape.B**i for i in range(nvars))
            shape._deg = {}
            cls._cache[key] = shape
        return shape

    def pack(self, exps):
        if len(exps) != self.nvars:
            raise ShapeMismatch(f"expected {self.nvars} exponents, got {len(exps)}")
        return sum(e * u for e, u in zip(exps, self.unit))

    def unpack(self, key):
        out = []
        B = self.B
        for _ in range(self.nvars):
            key, r = divmod(key, B)
            out.append(r)
        return tuple(out)

    def degree(self, key):
        d = self._deg.get(key)
        if d is None:
            d = sum(self.unpack(key))
            self._deg[key] = d
        return d


def _buckets(shape, terms):
    out = {}
    for k, c in terms.items():
        out.setdefault(shape.degree(k), []).append((k, c))
    return dict(sorted(out.items()))


def _mul_terms(cfg, shape, a, b, trunc, ba=None, bb=None):
    """Truncated product of two packed term maps."""
    if not a or not b:
        return {}
    ba = ba if ba is not None else _buckets(shape, a)
    bb = bb if bb is not None else _buckets(shape, b)
    acc = {}
    get = acc.get
    if cfg.f == 1:
        for da, la in ba.items():
            if da > trunc:
                break
            for db, lb in bb.items():
                if da + db > trunc:
                    break
                for ka, ca in la:
                    for kb, cb in lb:
                        k = ka + kb
                        acc[k] = get(k, 0) + ca * cb
        M = cfg.pN
        out = {}
        for k, v in acc.items():
            v %= M
            if v:
                out[k] = v
        return out
    zero = cfg.zero
    for da, la in ba.items():
        if da > trunc:
            break
        for db, lb in bb.items():
            if da + db > trunc:
                break
            for ka, ca in la:
                for kb, cb in lb:
                    k = ka + kb
                    acc[k] = cfg.add(get(k, zero), cfg.mul(ca, cb))
    return {k: v for k, v in acc.items() if not cfg.is_zero(v)}


def _add_terms(cfg, a, b, sign=1):
    out = dict(a)
    for k, c in b.items():
        if k in out:
            v = cfg.add(out[k], c) if sign > 0 else cfg.sub(out[k], c)
        else:
            v = c if sign > 0 else cfg.neg(c)
        if cfg.is_zero(v):
            out.pop(k, None)
        else:
            out[k] = v
    return out


def _axpy(cfg, acc, c, terms, shape, trunc):
    """acc += c * terms, keeping degrees <= trunc (in place)."""
    for k, v in terms.items():
        if shape.degree(k) > trunc:
            continue
        w = cfg.mul(c, v)
        if k in acc:
            w = cfg.add(acc[k], w)
        if cfg.is_zero(w):
            acc.pop(k, None)
        else:
            acc[k] = w


class MultiSeries:
    """A power series in ``nvars`` variables over W/p^N, truncated at total
    degree ``D``. Values are immutable."""

    __slots__ = ("cfg", "nvars", "D", "_shape", "_terms", "_bk")

    def __init__(self, cfg: PrimeConfig, nvars: int, D: int, terms=None):
        if nvars < 1:
            raise ValueError("nvars must be >= 1")
        if D < 0:
            raise ValueError("truncation degree must be >= 0")
        self.cfg = cfg
        self.nvars = nvars
        self.D = D
        self._shape = _Shape(nvars, D)
        packed = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if sum(exps) > D:
                raise TruncationExceeded(f"monomial {exps} exceeds truncation degree {D}")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            raw = cfg.coerce(c)
            k = self._shape.pack(exps)
            if k in packed:
                raw = cfg.add(packed[k], raw)
            packed[k] = raw
        self._terms = {k: v for k, v in packed.items() if not cfg.is_zero(v)}
        self._bk = None

    @classmethod
    def _wrap(cls, cfg, nvars, D, packed):
        obj = cls.__new__(cls)
        obj.cfg = cfg
        obj.nvars = nvars
        obj.D = D
        obj._shape = _Shape(nvars, D)
        obj._terms = packed
        obj._bk = None
        return obj

    def _like(self, packed):
        return MultiSeries._wrap(self.cfg, self.nvars, self.D, packed)

    @property
    def _buckets(self):
        if self._bk is None:
            self._bk = _buckets(self._shape, self._terms)
        return self._bk

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, cfg, nvars, D):
        return cls._wrap(cfg, nvars, D, {})

    @classmethod
    def constant(cls, cfg, nvars, D, c):
        return cls(cfg, nvars, D, {(0,) * nvars: c})

    @classmethod
    def variable(cls, cfg, nvars, D, index):
        """The coordinate X_index (0-based)."""
        exps = [0] * nvars
        exps[index] = 1
        return cls(cfg, nvars, D, {tuple(exps): 1})

    @classmethod
    def variables(cls, cfg, nvars, D):
        return [cls.variable(cfg, nvars, D, i) for i in range(nvars)]

    # -- inspection -------------------------------------------------------

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return not self._terms

    def monomials(self):
        """Exponent vectors in graded-lex order."""
        unpack = self._shape.unpack
        exps = [unpack(k) for k in self._terms]
        return sorted(exps, key=lambda e: (sum(e), tuple(-x for x in e)))

    def raw_items(self):
        """(exponent tuple, raw coefficient) pairs in graded-lex order."""
        pack = self._shape.pack
        return [(e, self._terms[pack(e)]) for e in self.monomials()]

    @property
    def terms(self):
        return {e: PadicScalar(self.cfg, c) for e, c in self.raw_items()}

    def coefficient(self, exps):
        exps = tuple(exps)
        if sum(exps) > self.D:
            raise TruncationExceeded(f"coefficient of {exps} lies beyond degree {self.D}")
        raw = self._terms.get(self._shape.pack(exps), self.cfg.zero)
        return PadicScalar(self.cfg, raw)

    def raw_coefficient(self, exps):
        return self._terms.get(self._shape.pack(tuple(exps)), self.cfg.zero)

    def order(self):
        """Lowest total degree present, or None for the zero series."""
        return next(iter(self._buckets), None)

    def degrees(self):
        return list(self._buckets)

    def constant_term(self):
        return PadicScalar(self.cfg, self._terms.get(0, self.cfg.zero))

    # -- arithmetic -------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, MultiSeries):
            raise TypeError(f"expected MultiSeries, got {type(other).__name__}")
        if other.cfg != self.cfg:
            raise ContextMismatch(f"{self.cfg} vs {other.cfg}")
        if other.nvars != self.nvars or other.D != self.D:
            raise ShapeMismatch(
                f"({self.nvars} vars, D={self.D}) vs ({other.nvars} vars, D={other.D})"
            )

    def _scalar_raw(self, c):
        return self.cfg.coerce(c)

    def __add__(self, other):
        if not isinstance(other, MultiSeries):
            return self + MultiSeries.constant(self.cfg, self.nvars, self.D, other)
        self._check(other)
        return self._like(_add_terms(self.cfg, self._terms, other._terms))

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, MultiSeries):
            return self - MultiSeries.constant(self.cfg, self.nvars, self.D, other)
        self._check(other)
        return self._like(_add_terms(self.cfg, self._terms, other._terms, sign=-1))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self._like({k: self.cfg.neg(v) for k, v in self._terms.items()})

    def scale(self, c):
        c = self._scalar_raw(c)
        cfg = self.cfg
        out = {}
        for k, v in self._terms.items():
            w = cfg.mul(c, v)
            if not cfg.is_zero(w):
                out[k] = w
        return self._like(out)

    def __mul__(self, other):
        if not isinstance(other, MultiSeries):
            return self.scale(other)
        self._check(other)
        return self._like(
            _mul_terms(self.cfg, self._shape, self._terms, other._terms, self.D, self._buckets, other._buckets)
        )

    __rmul__ = __mul__

    def mul_trunc(self, other, trunc):
        """Product keeping only degrees <= trunc."""
        self._check(other)
        return self._like(
            _mul_terms(self.cfg, self._shape, self._terms, other._terms, min(trunc, self.D), self._buckets, other._buckets)
        )

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        result = MultiSeries.constant(self.cfg, self.nvars, self.D, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self):
        """Multiplicative inverse of a series with unit constant term (Newton iteration)."""
        c0 = self._terms.get(0)
        if c0 is None or not self.cfg.is_unit(c0):
            raise ValueError("series inverse needs a unit constant term")
        b = MultiSeries.constant(self.cfg, self.nvars, self.D, PadicScalar(self.cfg, self.cfg.inv(c0)))
        two = MultiSeries.constant(self.cfg, self.nvars, self.D, 2)
        known = 1
        while known <= self.D:
            b = b * (two - self * b)
            known *= 2
        return b

    def __eq__(self, other):
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return (
            self.cfg == other.cfg
            and self.nvars == other.nvars
            and self.D == other.D
            and self._terms == other._terms
        )

    __hash__ = None

    # -- graded structure -------------------------------------------------

    def graded_part(self, k):
        """Sum of the degree-k monomials."""
        if k < 0 or k > self.D:
            raise TruncationExceeded(f"degree {k} outside [0, {self.D}]")
        return self._like(dict(self._buckets.get(k, [])))

    def truncated(self, k):
        """Drop every monomial of degree > k (container degree unchanged)."""
        return self._like({key: c for d, lst in self._buckets.items() if d <= k for key, c in lst})

    def with_truncation(self, D):
        """Re-house the series in a container of truncation degree D <= self.D."""
        if D > self.D:
            raise TruncationExceeded(f"cannot raise truncation from {self.D} to {D}")
        unpack = self._shape.unpack
        new = _Shape(self.nvars, D)
        packed = {new.pack(unpack(k)): c for d, lst in self._buckets.items() if d <= D for k, c in lst}
        return MultiSeries._wrap(self.cfg, self.nvars, D, packed)

    def embed(self, nvars, positions):
        """View as a series in ``nvars`` variables, old variable i -> new variable positions[i]."""
        new = _Shape(nvars, self.D)
        out = {}
        for e, c in self.raw_items():
            exps = [0] * nvars
            for i, x in enumerate(e):
                exps[positions[i]] += x
            out[new.pack(exps)] = c
        return MultiSeries._wrap(self.cfg, nvars, self.D, out)

    def with_config(self, cfg):
        """Reduce coefficients into another precision of the same (p, f)."""
        if (cfg.p, cfg.f) != (self.cfg.p, self.cfg.f):
            raise ContextMismatch(f"{self.cfg} vs {cfg}")
        out = {}
        for k, c in self._terms.items():
            c = cfg.reduce(c)
            if not cfg.is_zero(c):
                out[k] = c
        return MultiSeries._wrap(cfg, self.nvars, self.D, out)

    def partial_derivative(self, index):
        """Formal partial derivative in X_index (0-based)."""
        if not 0 <= index < self.nvars:
            raise IndexError(f"variable index {index} out of range")
        unit = self._shape.unit[index]
        B = self._shape.B
        cfg = self.cfg
        out = {}
        for k, c in self._terms.items():
            e = (k // unit) % B
            if e:
                w = cfg.mul_int(c, e)
                if not cfg.is_zero(w):
                    out[k - unit] = w
        return self._like(out)

    # -- substitution -----------------------------------------------------

    def compose(self, inners):
        """self(inners[0], ..., inners[nvars-1]) truncated at the inner degree.

        Every inner series must have zero constant term, so the result is
        exact through degree D.
        """
        inners = list(inners)
        if len(inners) != self.nvars:
            raise ShapeMismatch(f"need {self.nvars} inner series, got {len(inners)}")
        first = inners[0]
        for s in inners:
            first._check(s)
            if s.cfg != self.cfg:
                raise ContextMismatch(f"{self.cfg} vs {s.cfg}")
            if 0 in s._terms:
                raise TruncationExceeded("inner series has a nonzero constant term")
        if self.D < first.D:
            raise TruncationExceeded(
                f"outer series known to degree {self.D} cannot be composed exactly to degree {first.D}"
            )
        cfg = self.cfg
        shape = first._shape
        trunc = first.D
        items = [(e, c) for e, c in self.raw_items() if sum(e) <= trunc]
        if not items:
            return MultiSeries.zero(cfg, first.nvars, trunc)

        last = len(inners) - 1
        max_last = max(e[last] for e, _ in items)
        powers = [{0: cfg.one}]
        for _ in range(max_last):
            powers.append(_mul_terms(cfg, shape, powers[-1], inners[last]._terms, trunc))
        inner_terms = [s._terms for s in inners]

        def rec(group, var, cap):
            if cap < 0:
                return {}
            if var == last:
                acc = {}
                for e, c in group:
                    if e[last] <= cap:
                        _axpy(cfg, acc, c, powers[e[last]], shape, cap)
                return acc
            by_exp = {}
            for e, c in group:
                by_exp.setdefault(e[var], []).append((e, c))
            H = None
            for a in range(max(by_exp), -1, -1):
                part = rec(by_exp[a], var + 1, cap - a) if a in by_exp else {}
                if H is None:
                    H = part
                else:
                    H = _add_terms(cfg, part, _mul_terms(cfg, shape, inner_terms[var], H, cap - a))
            return H

        return MultiSeries._wrap(cfg, first.nvars, trunc, rec(items, 0, trunc))

    # -- text -------------------------------------------------------------

    def default_names(self):
        if self.nvars == 1:
            return ["T"]
        return [f"X{i + 1}" for i in range(self.nvars)]

    def to_text(self, names=None):
        """Canonical text: graded-lex monomials with symmetric integer coefficients."""
        names = names or self.default_names()
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.raw_items():
            coeff = self.cfg.symmetric(c)
            mono = "*".join(
                names[i] if x == 1 else f"{names[i]}^{x}" for i, x in enumerate(e) if x
            )
            if self.cfg.f > 1:
                body = f"[{','.join(str(x) for x in coeff)}]"
                parts.append(("+", f"{body}*{mono}" if mono else body))
                continue
            sign = "-" if coeff < 0 else "+"
            mag = abs(coeff)
            if not mono:
                parts.append((sign, str(mag)))
            elif mag == 1:
                parts.append((sign, mono))
            else:
                parts.append((sign, f"{mag}*{mono}"))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"MultiSeries({self.to_text()}; D={self.D}, mod {self.cfg.p}^{self.cfg.N})"


class SeriesTuple(tuple):
    """A tuple of MultiSeries sharing variables, truncation and configuration."""

    def __new__(cls, components):
        components = tuple(components)
        if not components:
            raise ShapeMismatch("empty series tuple")
        head = components[0]
        for s in components[1:]:
            head._check(s)
        return super().__new__(cls, components)

    @property
    def cfg(self):
        return self[0].cfg

    @property
    def nvars(self):
        return self[0].nvars

    @property
    def D(self):
        return self[0].D

    def compose(self, inners):
        return SeriesTuple(s.compose(inners) for s in self)

    def to_text(self, names=None):
        return [s.to_text(names) for s in self]


def identity_tuple(cfg, g, D):
    return SeriesTuple(MultiSeries.variables(cfg, g, D))


def series_add(a, b):
    return a + b


def series_mul(a, b):
    return a * b


def series_compose(outer, inner):
    return outer.compose(inner)


def series_partial_derivative(a, var_index):
    return a.partial_derivative(var_index)


def series_graded_part(a, k):
    return a.graded_part(k)


def series_evaluate(a, point):
    """Evaluate ``a`` at a point of a totally ramified extension.

    Returns ``(value, tail_bound)``: omitted monomials of degree > D
    contribute valuation at least ``tail_bound = (D + 1) * min v(point_i)``.
    """
    from .ramified_ext import evaluate_series

    return evaluate_series(a, point)
