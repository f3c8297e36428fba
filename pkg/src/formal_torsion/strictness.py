"""Strictness of a formal group from the lowest-degree unit forms of [p].

Emptiness of the projective common zero set of G_1..G_g over the algebraic
closure of F_p is decided by linear algebra: either the Frobenius-linear
determinant, or saturation of a graded piece of the ideal below the
Macaulay bound sum(d_i - 1) + 1. Finite-field enumeration is kept only as
an independent oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product

from .errors import (
    DegenerateTransform,
    EnumerationBudgetExceeded,
    InfiniteHeightComponent,
    NonPPowerDegree,
    ShapeMismatch,
)
from .formal_group import matrix_inverse
from .power_series import MultiSeries
from .scalar_arith import PrimeConfig

ENUMERATION_BUDGET = 10**6


def _is_power_of(n, p):
    while n > 1 and n % p == 0:
        n //= p
    return n == 1


@dataclass(frozen=True, eq=False)
class FormSystem:
    cfg: PrimeConfig
    g: int
    degrees: tuple
    forms_F: tuple
    forms_G: tuple
    excluded: tuple = ()

    @classmethod
    def from_residue_forms(cls, cfg, forms):
        """Build a system directly from homogeneous forms given as
        {exponent tuple: coefficient} maps over the residue field."""
        g = len(forms)
        degs = []
        F = []
        for form in forms:
            ds = {sum(e) for e, c in form.items() if cfg.residue_config().coerce(c) != cfg.residue_config().zero}
            if len(ds) != 1:
                raise ValueError("each form must be nonzero and homogeneous")
            degs.append(ds.pop())
        D = max(degs)
        for form in forms:
            F.append(MultiSeries(cfg, g, D, form))
        return cls._from_F(cfg, g, tuple(degs), tuple(F), tuple(0 for _ in forms))

    @classmethod
    def _from_F(cls, cfg, g, degrees, F, excluded):
        rcfg = cfg.residue_config()
        G = tuple(s.with_config(rcfg) for s in F)
        return cls(cfg, g, tuple(degrees), tuple(F), G, tuple(excluded))

    def to_json(self):
        names = [f"X{i + 1}" for i in range(self.g)] if self.g > 1 else ["T"]
        return {
            "degrees": list(self.degrees),
            "forms_F": [s.to_text(names) for s in self.forms_F],
            "forms_G": [s.to_text(names) for s in self.forms_G],
            "excluded_nonunit_monomials": list(self.excluded),
        }


@dataclass(frozen=True)
class StrictnessVerdict:
    is_strict: bool
    reason: str
    method: str
    degrees: tuple
    certificate: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "is_strict": self.is_strict,
            "reason": self.reason,
            "method": self.method,
            "degrees": list(self.degrees),
            "certificate": self.certificate,
        }


def extract_forms(fp) -> FormSystem:
    """F_i = the unit-coefficient monomials of f_i of minimal degree."""
    cfg = fp.cfg
    g = len(fp)
    degrees, forms, excluded = [], [], []
    for i, s in enumerate(fp, start=1):
        found = None
        for d in s.degrees():
            part = s.graded_part(d)
            units = {e: c for e, c in part.raw_items() if cfg.is_unit(c)}
            if units:
                found = (d, units, len(part) - len(units))
                break
        if found is None:
            raise InfiniteHeightComponent(i)
        d, units, skipped = found
        if not _is_power_of(d, cfg.p):
            raise NonPPowerDegree(i, d)
        degrees.append(d)
        forms.append(MultiSeries(cfg, g, s.D, units))
        excluded.append(skipped)
    return FormSystem._from_F(cfg, g, tuple(degrees), tuple(forms), tuple(excluded))


# -- residue-field linear algebra ------------------------------------------------


def _rank(rcfg, rows, ncols):
    """Rank of a matrix over F_q given as lists of raw entries."""
    rows = [list(r) for r in rows]
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if not rcfg.is_zero(rows[i][col])), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rcfg.inv(rows[rank][col])
        prow = [rcfg.mul(inv, x) for x in rows[rank]]
        rows[rank] = prow
        for i in range(rank + 1, len(rows)):
            c = rows[i][col]
            if not rcfg.is_zero(c):
                rows[i] = [rcfg.sub(x, rcfg.mul(c, y)) for x, y in zip(rows[i], prow)]
        rank += 1
        if rank == len(rows):
            break
    return rank


def _kernel_vector(rcfg, A):
    """A nonzero vector y with A y = 0 over F_q, or None."""
    n = len(A[0])
    rows = [list(r) for r in A]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(rows)) if not rcfg.is_zero(rows[i][col])), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rcfg.inv(rows[r][col])
        rows[r] = [rcfg.mul(inv, x) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not rcfg.is_zero(rows[i][col]):
                c = rows[i][col]
                rows[i] = [rcfg.sub(x, rcfg.mul(c, y)) for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    fc = free[0]
    y = [rcfg.zero] * n
    y[fc] = rcfg.one
    for i, pc in enumerate(pivots):
        y[pc] = rcfg.neg(rows[i][fc])
    return y


def _det(rcfg, A):
    n = len(A)
    rows = [list(r) for r in A]
    det = rcfg.one
    for col in range(n):
        piv = next((i for i in range(col, n) if not rcfg.is_zero(rows[i][col])), None)
        if piv is None:
            return rcfg.zero
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            det = rcfg.neg(det)
        det = rcfg.mul(det, rows[col][col])
        inv = rcfg.inv(rows[col][col])
        for i in range(col + 1, n):
            c = rcfg.mul(rows[i][col], inv)
            if not rcfg.is_zero(c):
                rows[i] = [rcfg.sub(x, rcfg.mul(c, y)) for x, y in zip(rows[i], rows[col])]
    return det


def _monomials(g, degree):
    out = []
    for combo in combinations_with_replacement(range(g), degree):
        e = [0] * g
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def _frobenius_matrix(fs):
    """Coefficient matrix a[i][j] of X_j^d in G_i when every G_i is a sum of
    pure d-th powers, else None."""
    d = fs.degrees[0]
    g = fs.g
    rcfg = fs.cfg.residue_config()
    A = []
    for G in fs.forms_G:
        row = [rcfg.zero] * g
        for e, c in G.raw_items():
            nz = [j for j, x in enumerate(e) if x]
            if len(nz) != 1:
                return None
            row[nz[0]] = c
        A.append(row)
    return A


def _eval_form(kcfg, embed, G, point):
    acc = kcfg.zero
    for e, c in G.raw_items():
        term = embed(c)
        for x, k in zip(point, e):
            if k:
                term = kcfg.mul(term, kcfg.power(x, k))
        acc = kcfg.add(acc, term)
    return acc


def _frobenius_root(rcfg, y, d):
    """The unique x in F_q with x^d = y, d a power of p."""
    h = 0
    while d > 1:
        d //= rcfg.p
        h += 1
    m = (-h) % rcfg.f
    return rcfg.power(y, rcfg.p**m)


def _witness_json(kcfg, pt, k):
    coords = [x if kcfg.f == 1 else list(x) for x in pt]
    return {"field_degree": k, "coordinates": coords}


def _decide_determinant(fs, A):
    rcfg = fs.cfg.residue_config()
    det = _det(rcfg, A)
    cert = {"matrix": [[x if rcfg.f == 1 else list(x) for x in r] for r in A],
            "determinant": det if rcfg.f == 1 else list(det)}
    if not rcfg.is_zero(det):
        return StrictnessVerdict(True, "EqualDegrees+OnlyTrivialZero", "DeterminantShortcut", fs.degrees, cert)
    y = _kernel_vector(rcfg, A)
    d = fs.degrees[0]
    if _is_power_of(d, fs.cfg.p):
        pt = [_frobenius_root(rcfg, c, d) for c in y]
        lead = rcfg.inv(next(c for c in pt if not rcfg.is_zero(c)))
        pt = [rcfg.mul(lead, c) for c in pt]
        assert all(rcfg.is_zero(_eval_form(rcfg, lambda c: c, G, pt)) for G in fs.forms_G)
        cert["witness"] = _witness_json(rcfg, pt, rcfg.f)
    return StrictnessVerdict(False, "NontrivialCommonZero", "DeterminantShortcut", fs.degrees, cert)


def macaulay_saturates(fs, degree):
    """(rank, column count) of the degree-`degree` piece of (G_1, ..., G_g)."""
    rcfg = fs.cfg.residue_config()
    cols = _monomials(fs.g, degree)
    index = {e: i for i, e in enumerate(cols)}
    rows = []
    for G, d in zip(fs.forms_G, fs.degrees):
        if degree < d:
            continue
        items = G.raw_items()
        for m in _monomials(fs.g, degree - d):
            row = [rcfg.zero] * len(cols)
            for e, c in items:
                row[index[tuple(a + b for a, b in zip(e, m))]] = c
            rows.append(row)
    return _rank(rcfg, rows, len(cols)), len(cols)


def macaulay_bound(degrees):
    return sum(d - 1 for d in degrees) + 1


def _decide_macaulay(fs):
    bound = macaulay_bound(fs.degrees)
    history = []
    for deg in range(max(fs.degrees), bound + 1):
        rank, ncols = macaulay_saturates(fs, deg)
        history.append([deg, rank, ncols])
        if rank == ncols:
            cert = {"saturation_degree": deg, "macaulay_bound": bound}
            return StrictnessVerdict(True, "EqualDegrees+OnlyTrivialZero", "MacaulayRank", fs.degrees, cert)
    cert = {"macaulay_bound": bound, "rank_at_bound": history[-1][1], "monomials_at_bound": history[-1][2]}
    try:
        w = brute_force_common_zero(fs, 2)
    except EnumerationBudgetExceeded:
        w = None
    if w is not None:
        cert["witness"] = w
    return StrictnessVerdict(False, "NontrivialCommonZero", "MacaulayRank", fs.degrees, cert)


def decide_strict(fs: FormSystem, method="auto") -> StrictnessVerdict:
    """method: "auto" (determinant shortcut when applicable), "determinant" or "macaulay"."""
    if len(set(fs.degrees)) > 1:
        return StrictnessVerdict(False, "UnequalDegrees", "DegreeCheck", fs.degrees, {})
    A = _frobenius_matrix(fs)
    if method == "determinant":
        if A is None:
            raise ValueError("system is not Frobenius-linear")
        return _decide_determinant(fs, A)
    if method == "macaulay" or A is None:
        return _decide_macaulay(fs)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    return _decide_determinant(fs, A)


# -- brute force oracle -----------------------------------------------------------


def _embedding(rcfg, kcfg):
    """Map raw F_q elements into F_{p^k} (requires f | k)."""
    f, k = rcfg.f, kcfg.f
    if k % f:
        raise ValueError(f"F_{{p^{f}}} does not embed in F_{{p^{k}}}")
    if f == 1:
        return lambda c: kcfg.coerce(c if isinstance(c, int) else c[0])
    if f == k:
        return lambda c: c
    m = rcfg.modulus
    root = None
    for cand in product(range(kcfg.p), repeat=k):
        acc = kcfg.zero
        for coeff in reversed(m):
            acc = kcfg.add(kcfg.mul(acc, cand), kcfg.coerce(coeff))
        if kcfg.is_zero(acc):
            root = cand
            break
    powers = [kcfg.power(root, i) for i in range(f)]

    def embed(c):
        acc = kcfg.zero
        for ci, pw in zip(c, powers):
            acc = kcfg.add(acc, kcfg.mul_int(pw, ci))
        return acc

    return embed


def _projective_points(kcfg, g):
    elems = [kcfg.zero] + kcfg.residues()
    for lead in range(g):
        for tail in product(elems, repeat=g - lead - 1):
            yield [kcfg.zero] * lead + [kcfg.one] + list(tail)


def brute_force_common_zero(fs: FormSystem, max_ext_degree: int):
    """A nonzero common zero of G_1..G_g over some F_{p^k}, k <= max_ext_degree,
    or None. Only refutes strictness; a None is evidence, not proof."""
    rcfg = fs.cfg.residue_config()
    p, g = fs.cfg.p, fs.g
    total = sum(p ** (k * g) for k in range(1, max_ext_degree + 1) if k % rcfg.f == 0)
    if total > ENUMERATION_BUDGET:
        raise EnumerationBudgetExceeded(f"{total} points exceeds budget {ENUMERATION_BUDGET}")
    for k in range(1, max_ext_degree + 1):
        if k % rcfg.f:
            continue
        kcfg = PrimeConfig(p, k, 1)
        embed = _embedding(rcfg, kcfg)
        for pt in _projective_points(kcfg, g):
            if all(kcfg.is_zero(_eval_form(kcfg, embed, G, pt)) for G in fs.forms_G):
                return _witness_json(kcfg, pt, k)
    return None


# -- linear changes of coordinates -------------------------------------------------


def transform_forms(fs: FormSystem, M) -> FormSystem:
    """Forms of the [p]-series in coordinates Z = M X: F'_i = sum_j M_ij F_j(M^-1 Z),
    keeping unit-coefficient monomials."""
    if len(set(fs.degrees)) > 1:
        raise ShapeMismatch("coordinate changes act on forms of equal degree only")
    cfg, g = fs.cfg, fs.g
    if len(M) != g or any(len(r) != g for r in M):
        raise ShapeMismatch(f"need a {g}x{g} matrix")
    Minv = matrix_inverse(cfg, M)
    D = fs.forms_F[0].D
    V = MultiSeries.variables(cfg, g, D)
    inner = []
    for row in Minv:
        acc = MultiSeries.zero(cfg, g, D)
        for j, c in enumerate(row):
            acc = acc + V[j].scale(c)
        inner.append(acc)
    images = [F.compose(inner) for F in fs.forms_F]
    new_F, excluded = [], []
    for i, row in enumerate(M, start=1):
        acc = MultiSeries.zero(cfg, g, D)
        for c, img in zip(row, images):
            acc = acc + img.scale(c)
        units = {e: c for e, c in acc.raw_items() if cfg.is_unit(c)}
        if not units:
            raise DegenerateTransform(f"form {i} has no unit coefficient after the change of coordinates")
        new_F.append(MultiSeries(cfg, g, D, units))
        excluded.append(len(acc) - len(units))
    return FormSystem._from_F(cfg, g, fs.degrees, tuple(new_F), tuple(excluded))
