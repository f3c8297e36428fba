"""p-torsion of strict formal groups: Newton polygons, explicit roots in tame
extensions, and the valuation / ramification / delta checks on them.

Roots are only constructed for dimension 1 and for products of dimension-1
groups. There the extension is known in advance: with u0 the unit coefficient
of T^d in [p], a nonzero torsion root z generates L = K(pi) with
pi^(d-1) = -p/u0, and z/pi is a unit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd

from .errors import (
    IndeterminatePrecision,
    LiftDiverged,
    NoUnitCoefficient,
    NotStrict,
    UnsupportedDimension,
)
from .formal_group import jacobian_det_at
from .ramified_ext import EisensteinExtension, delta, evaluate_series
from .scalar_arith import Valuation
from .strictness import decide_strict, extract_forms

MIN_LIFT_PRECISION = 4
MAX_NEWTON_STEPS = 64


def _frac(x):
    return str(Fraction(x))


# -- Newton polygons ---------------------------------------------------------------


@dataclass(frozen=True)
class NewtonPolygon:
    points: tuple
    vertices: tuple
    segments: tuple
    zero_root_multiplicity: int

    @property
    def positive_segments(self):
        return tuple((s, m) for s, m in self.segments if s > 0)

    def to_json(self):
        return {
            "points": [[k, v.to_json()] for k, v in self.points],
            "vertices": [[k, _frac(v)] for k, v in self.vertices],
            "segments": [{"slope": {"value": _frac(s), "exact": True}, "multiplicity": m} for s, m in self.segments],
            "zero_root_multiplicity": self.zero_root_multiplicity,
        }


def _lower_hull(pts):
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly below the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def newton_polygon(series, exact_below=1) -> NewtonPolygon:
    """Lower hull of (k, v(c_k)) from the order of the series up to its first
    unit coefficient. Slopes are reported as root valuations (positive for
    roots in the open unit ball).

    Coefficients of degree < exact_below are taken to be exactly zero (the
    default fits series without constant term). An absent coefficient between
    exact_below and the order is only known to be >= p^N, and it could carry
    roots of arbitrarily large valuation, so that case is refused. Absent
    coefficients further right never matter: every exact point has valuation
    < N, hence so does the hull.
    """
    if series.nvars != 1:
        raise ValueError("newton_polygon needs a univariate series")
    cfg = series.cfg
    coeffs = {e[0]: c for e, c in series.raw_items()}
    if not coeffs:
        raise NoUnitCoefficient("series is zero to precision")
    unit_deg = next((k for k in sorted(coeffs) if cfg.is_unit(coeffs[k])), None)
    if unit_deg is None:
        raise NoUnitCoefficient(f"no unit coefficient up to degree {series.D}")
    order = min(coeffs)
    if order > exact_below:
        raise IndeterminatePrecision(
            f"coefficients of degree {exact_below}..{order - 1} are only known to be >= {cfg.N}; "
            "they could be hull vertices"
        )
    points = []
    for k in range(order, unit_deg + 1):
        v = cfg.valuation(coeffs[k]) if k in coeffs else Valuation.lower_bound(cfg.N)
        points.append((k, v))
    hull = _lower_hull([(k, v.value) for k, v in points if v.exact])
    segments = tuple((Fraction(y1 - y2, x2 - x1), x2 - x1) for (x1, y1), (x2, y2) in zip(hull, hull[1:]))
    return NewtonPolygon(tuple(points), tuple(hull), segments, order)


# -- Eisenstein data and lifting ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class EisensteinWitness:
    """P(Z) = p + u Z^(d-1); the extension is generated by its root theta = pi."""

    d: int
    u: object
    extension: EisensteinExtension

    @property
    def theta(self):
        return self.extension.pi

    @property
    def P(self):
        cfg = self.extension.cfg
        return [cfg.coerce(cfg.p)] + [cfg.zero] * (self.d - 2) + [self.u]

    def to_json(self):
        cfg = self.extension.cfg
        sym = [cfg.symmetric(c) if cfg.f == 1 else list(cfg.symmetric(c)) for c in self.P]
        return {"d": self.d, "P": sym, "extension": self.extension.describe()}


@dataclass(frozen=True, eq=False)
class TorsionRoot:
    z: object
    witness: EisensteinWitness
    teichmuller: object
    iterations: int
    residual: Valuation
    tail_bound: Fraction
    claimed_bound: Fraction

    @property
    def valuation(self):
        return self.z.valuation()

    def to_json(self):
        cfg = self.witness.extension.cfg
        return {
            "z": self.z.to_json(),
            "valuation": self.valuation.to_json(),
            "residual": self.residual.to_json(),
            "tail_bound": _frac(self.tail_bound),
            "claimed_bound": _frac(self.claimed_bound),
            "teichmuller_start": cfg.symmetric(self.teichmuller) if cfg.f == 1 else list(cfg.symmetric(self.teichmuller)),
            "newton_steps": self.iterations,
            "eisenstein": self.witness.to_json(),
        }


def _rescaled_coefficients(series, d, ext):
    """Coefficients of g(y) = [p](pi y) / (p pi) as elements of O_L."""
    cfg = series.cfg
    coeffs = {e[0]: c for e, c in series.raw_items()}
    u_inv = cfg.inv(coeffs[d])
    pi = ext.pi
    pis = [ext.one]
    for _ in range(series.D):
        pis.append(pis[-1] * pi)
    g = [ext.zero] * (series.D + 1)
    for k, c in coeffs.items():
        if k < d:
            g[k] = ext.scalar(cfg.divide_exact_p(c)) * pis[k - 1]
        else:
            g[k] = ext.scalar(cfg.neg(cfg.mul(u_inv, c))) * pis[k - d]
    return g


def _horner(g, y):
    ext = y.ext
    val, der = ext.zero, ext.zero
    for k in range(len(g) - 1, -1, -1):
        der = der * y + val
        val = val * y + g[k]
    return val, der


def lift_torsion_root(F, verdict=None) -> TorsionRoot:
    """A nonzero root of the truncated [p]-series of a strict dim-1 group."""
    if F.dim != 1:
        raise UnsupportedDimension("root lifting is implemented for dimension 1")
    cfg = F.cfg
    if cfg.N < MIN_LIFT_PRECISION:
        raise IndeterminatePrecision(f"lifting needs N >= {MIN_LIFT_PRECISION}, got {cfg.N}")
    fp = F.mul_by_p()
    series = fp[0]
    fs = extract_forms(fp)
    verdict = verdict or decide_strict(fs)
    if not verdict.is_strict:
        raise NotStrict(verdict.reason)
    d = fs.degrees[0]
    u0 = series.raw_coefficient((d,))
    ext = EisensteinExtension(cfg, [cfg.mul(cfg.coerce(cfg.p), cfg.inv(u0))] + [0] * (d - 2) + [1])
    witness = EisensteinWitness(d, u0, ext)
    g = _rescaled_coefficients(series, d, ext)

    for c in cfg.teichmuller_units(cfg.q - 1):
        y = ext.scalar(c.raw)
        val, der = _horner(g, y)
        v_der = der.valuation()
        if not v_der.exact or val.valuation() <= 2 * v_der.value:
            continue
        for step in range(1, MAX_NEWTON_STEPS + 1):
            der_inv = der.inverse()
            y = y - val * der_inv
            val, der = _horner(g, y)
            if val.is_zero():
                break
        else:
            raise LiftDiverged("Newton iteration did not reach a root to precision")
        z = ext.pi * y
        residual = evaluate_series(series, [z])[0].valuation()
        tail = Fraction(series.D + 1, d - 1)
        claimed = min(Fraction(cfg.N - 1), tail)
        if residual < claimed:
            raise LiftDiverged(f"residual {residual} below claimed bound {claimed}")
        return TorsionRoot(z, witness, c.raw, step, residual, tail, claimed)
    raise LiftDiverged("no Teichmuller start satisfies the lifting criterion")


@dataclass(frozen=True)
class RootGeometry:
    v_P_prime: Valuation
    expected_v_P_prime: Fraction
    root_distance: Fraction
    conjugates_checked: int
    conjugate_distances: tuple
    krasner_gap: Valuation = None

    @property
    def ok(self):
        good = self.v_P_prime == self.expected_v_P_prime
        good = good and all(v == self.root_distance for v in self.conjugate_distances)
        if self.krasner_gap is not None:
            good = good and self.krasner_gap > self.root_distance
        return good

    def to_json(self):
        return {
            "v_P_prime": self.v_P_prime.to_json(),
            "expected_v_P_prime": _frac(self.expected_v_P_prime),
            "root_distance": _frac(self.root_distance),
            "conjugates_checked": self.conjugates_checked,
            "krasner_gap": None if self.krasner_gap is None else self.krasner_gap.to_json(),
            "ok": self.ok,
        }


def eisenstein_root_geometry(w: EisensteinWitness, z=None) -> RootGeometry:
    """v(P'(theta)) = (d-2)/(d-1); roots theta*zeta (zeta^(d-1) = 1) sit at
    mutual distance 1/(d-1). Conjugates are checked explicitly for the zeta
    already in W; with z, also the gap v(z - theta) > 1/(d-1)."""
    ext, d = w.extension, w.d
    cfg = ext.cfg
    if gcd(d - 1, cfg.p) != 1:
        raise ValueError("d - 1 must be prime to p")
    theta = w.theta
    p_prime = ext.scalar(cfg.mul_int(w.u, d - 1)) * theta ** (d - 2)
    v_pp = p_prime.valuation()
    if not v_pp.exact:
        raise IndeterminatePrecision("P'(theta) vanishes to precision")
    dist = Fraction(1, d - 1)
    distances = []
    for c in cfg.teichmuller_units(cfg.q - 1)[1:]:
        if cfg.power(c.raw, d - 1) != cfg.one:
            continue
        other = theta * ext.scalar(c.raw)
        if not ext.evaluate_poly(w.P, other).is_zero():
            raise IndeterminatePrecision("conjugate root check failed to precision")
        distances.append((theta - other).valuation())
    gap = None if z is None else (z - theta).valuation()
    return RootGeometry(v_pp, Fraction(d - 2, d - 1), dist, len(distances), tuple(distances), gap)


# -- reports -------------------------------------------------------------------------


def _leaves(F):
    """Dimension-1 factors of an iterated product, or None if F is not one."""
    if F.dim == 1:
        return [F]
    if not F.children:
        return None
    out = []
    for c in F.children:
        sub = _leaves(c)
        if sub is None:
            return None
        out.extend(sub)
    return out


@dataclass
class TorsionWitness:
    coordinates: tuple
    roots: tuple
    residual: Valuation
    claimed_bound: Fraction
    jacobian: dict
    uniformizer_index: int = None

    def to_json(self):
        return {
            "coordinates": [x.to_json() for x in self.coordinates],
            "valuations": [x.valuation().to_json() for x in self.coordinates],
            "extension": self.coordinates[0].ext.describe(),
            "residual": self.residual.to_json(),
            "claimed_bound": _frac(self.claimed_bound),
            "jacobian_valuation": self.jacobian["valuation"].to_json(),
            "jacobian_tail_bound": self.jacobian["tail_bound"].to_json(),
            "uniformizer_index": self.uniformizer_index,
            "roots": [r.to_json() for r in self.roots],
        }


@dataclass
class TorsionReport:
    group: dict
    strictness: object
    degrees: tuple
    status: str
    polygons: list = field(default_factory=list)
    valuations: list = field(default_factory=list)
    point_classes: list = field(default_factory=list)
    e_pred: int = None
    tame: bool = None
    witnesses: list = field(default_factory=list)
    geometry: list = field(default_factory=list)
    delta_table: list = field(default_factory=list)
    uniformizer_index: int = None

    def to_json(self):
        return {
            "group": self.group,
            "strictness": None if self.strictness is None else self.strictness.to_json(),
            "degrees": list(self.degrees),
            "status": self.status,
            "polygons": [p.to_json() for p in self.polygons],
            "valuations": [{"value": _frac(v), "exact": True, "multiplicity": m} for v, m in self.valuations],
            "point_classes": self.point_classes,
            "e_pred": self.e_pred,
            "tame": self.tame,
            "witnesses": [w.to_json() for w in self.witnesses],
            "geometry": [g.to_json() for g in self.geometry],
            "delta_table": self.delta_table,
            "uniformizer_index": self.uniformizer_index,
        }


def torsion_valuations(F) -> TorsionReport:
    """Valuations of nonzero p-torsion points, from the Newton polygons of the
    components (dim 1 and products) or as the strict-group prediction."""
    fp = F.mul_by_p()
    fs = extract_forms(fp)
    verdict = decide_strict(fs)
    degrees = fs.degrees
    leaves = _leaves(F)
    report = TorsionReport(F.describe(), verdict, degrees, "verified")
    if verdict.is_strict:
        d = degrees[0]
        report.e_pred = d - 1
        report.tame = gcd(d - 1, F.cfg.p) == 1
    if leaves is None:
        report.status = "predicted, unverified"
        if verdict.is_strict:
            report.valuations = [(Fraction(1, degrees[0] - 1), degrees[0] ** F.dim - 1)]
        return report

    per_leaf = []
    for leaf in leaves:
        poly = newton_polygon(leaf.mul_by_p()[0])
        pos = poly.positive_segments
        if len(pos) != 1:
            raise AssertionError(f"expected a single positive segment, got {pos}")
        report.polygons.append(poly)
        per_leaf.append(pos[0])
        report.valuations.append(pos[0])
    if verdict.is_strict:
        want = Fraction(1, degrees[0] - 1)
        if any(s != want for s, _ in per_leaf):
            raise AssertionError("polygon slopes disagree with the strict-group prediction 1/(d-1)")
    g = len(leaves)
    if g > 1:
        for size in range(1, g + 1):
            for support in combinations(range(g), size):
                count = 1
                for i in support:
                    count *= per_leaf[i][1]
                report.point_classes.append({
                    "support": [i + 1 for i in support],
                    "min_coordinate_valuation": {"value": _frac(min(per_leaf[i][0] for i in support)), "exact": True},
                    "points": count,
                })
    return report


def _witness(fp, coords, roots):
    ext = coords[0].ext
    residual = None
    for s in fp:
        v = evaluate_series(s, coords)[0].valuation()
        residual = v if residual is None or v < residual else residual
    claimed = min(r.claimed_bound for r in roots)
    jac = jacobian_det_at(fp, coords)
    e = ext.e
    uni = next((i + 1 for i, x in enumerate(coords) if x.valuation() == Fraction(1, e)), None)
    return TorsionWitness(tuple(coords), tuple(roots), residual, claimed, jac, uni)


def verify_theorem_B(F) -> TorsionReport:
    """Strictness, polygon, tame index e = d - 1, explicit root witnesses, and a
    uniformizer coordinate among each witness."""
    report = torsion_valuations(F)
    verdict = report.strictness
    if not verdict.is_strict:
        raise NotStrict(f"{verdict.reason} {list(verdict.degrees)}")
    leaves = _leaves(F)
    if leaves is None:
        raise UnsupportedDimension("no root construction for non-product groups of dimension >= 2")
    fp = F.mul_by_p()
    roots = [lift_torsion_root(leaf) for leaf in leaves]
    for r in roots:
        report.geometry.append(eisenstein_root_geometry(r.witness, r.z))
    g = len(leaves)
    for i, r in enumerate(roots):
        ext = r.z.ext
        coords = [ext.zero] * g
        coords[i] = r.z
        report.witnesses.append(_witness(fp, coords, [r]))
    if g > 1 and all(r.z.ext == roots[0].z.ext for r in roots):
        report.witnesses.append(_witness(fp, [r.z for r in roots], roots))
    for w in report.witnesses:
        if w.uniformizer_index is None:
            raise AssertionError("no coordinate of the witness is a uniformizer")
        if not w.residual >= w.claimed_bound:
            raise AssertionError(f"witness residual {w.residual} below {w.claimed_bound}")
        if not w.jacobian["valuation"].exact:
            raise AssertionError("Jacobian of [p] vanishes to precision at a torsion point")
    report.uniformizer_index = report.witnesses[0].uniformizer_index
    return report


@dataclass(frozen=True)
class O1Exclusion:
    reports: tuple
    uniformizer_index: int
    has_negative: bool
    uniformizer_matches: bool

    @property
    def ok(self):
        return self.has_negative and self.uniformizer_matches

    def to_json(self):
        return {
            "coordinates": [r.to_json() for r in self.reports],
            "uniformizer_index": self.uniformizer_index,
            "has_negative_delta": self.has_negative,
            "uniformizer_delta_is_minus_v_different": self.uniformizer_matches,
        }


def verify_O1_exclusion(F, report: TorsionReport = None) -> list:
    """delta of every coordinate of every witness; some coordinate has delta < 0,
    and delta of the uniformizer coordinate is -v(D_{L/K})."""
    report = report if report is not None and report.witnesses else verify_theorem_B(F)
    out = []
    for w in report.witnesses:
        reps = tuple(delta(x) for x in w.coordinates)
        neg = any(r.delta < 0 for r in reps)
        u = reps[w.uniformizer_index - 1]
        match = u.delta == -u.v_different
        out.append(O1Exclusion(reps, w.uniformizer_index, neg, match))
    report.delta_table = [o.to_json() for o in out]
    return out
