from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from formal_torsion.errors import (
    IndeterminatePrecision,
    InfiniteHeightComponent,
    NoUnitCoefficient,
    NotStrict,
    UnsupportedDimension,
)
from formal_torsion.formal_group import (
    build_additive,
    build_elliptic,
    build_lubin_tate,
    build_multiplicative,
    build_product,
    change_coordinates,
)
from formal_torsion.power_series import MultiSeries
from formal_torsion.ramified_ext import evaluate_series
from formal_torsion.scalar_arith import PrimeConfig, Valuation
from formal_torsion.torsion import (
    eisenstein_root_geometry,
    lift_torsion_root,
    newton_polygon,
    torsion_valuations,
    verify_O1_exclusion,
    verify_theorem_B,
)
from oracles import hull_vertices_bruteforce

C3 = PrimeConfig(3, 1, 8)


def uni(coeffs, D=12, cfg=C3):
    return MultiSeries(cfg, 1, D, {(k,): c for k, c in coeffs.items()})


def test_polygon_examples():
    poly = newton_polygon(uni({1: 3, 2: 3, 3: 1}))
    assert poly.vertices == ((1, 1), (3, 0))
    assert poly.positive_segments == ((Fraction(1, 2), 2),)
    assert newton_polygon(uni({1: 3, 9: 1})).segments == ((Fraction(1, 8), 8),)
    ss = build_elliptic(C3, 14, short=(1, 0)).mul_by_p()[0]
    assert newton_polygon(ss).positive_segments == ((Fraction(1, 8), 8),)


def test_polygon_several_segments():
    # 9T + 3T^2 + T^4: slopes 1 (mult 1) and 1/2 (mult 2)
    poly = newton_polygon(uni({1: 9, 2: 3, 4: 1}))
    assert poly.segments == ((Fraction(1), 1), (Fraction(1, 2), 2))


def test_polygon_errors():
    with pytest.raises(NoUnitCoefficient):
        newton_polygon(uni({1: 3, 2: 9}))
    # c_1 is 0 mod 3^8: it might be 3^9, giving roots of valuation 8, so refuse
    with pytest.raises(IndeterminatePrecision):
        newton_polygon(uni({2: 3, 3: 1}))
    # unless the caller knows it vanishes exactly
    poly = newton_polygon(uni({2: 3, 3: 1}), exact_below=2)
    assert poly.zero_root_multiplicity == 2
    assert poly.segments == ((Fraction(1), 1),)


def test_polygon_interior_gaps_are_harmless():
    poly = newton_polygon(uni({1: 3, 9: 1}))
    assert [v.exact for _, v in poly.points] == [True] + [False] * 7 + [True]
    assert poly.vertices == ((1, 1), (9, 0))


points = st.lists(st.integers(0, 6), min_size=2, max_size=9)


@given(points)
def test_polygon_matches_bruteforce_hull(vals):
    # coefficient valuations v_1..v_n, last forced to 0
    vals = vals[:-1] + [0]
    vals = [min(v, 6) for v in vals]
    coeffs = {k + 1: 3**v for k, v in enumerate(vals)}
    first_unit = next(k for k, c in coeffs.items() if c == 1)
    poly = newton_polygon(uni(coeffs, D=12))
    pts = [(k, v) for k, v in ((k, vals[k - 1]) for k in coeffs) if k <= first_unit]
    assert [(k, v) for k, v in poly.vertices] == hull_vertices_bruteforce(pts)
    assert sum(m for _, m in poly.segments) == first_unit - 1


def test_lift_multiplicative():
    root = lift_torsion_root(build_multiplicative(C3, 8))
    z = root.z
    assert root.witness.extension.E == tuple(C3.coerce(c) for c in (3, 0, 1))
    assert z.valuation() == Fraction(1, 2)
    # independent check: (1 + z)^3 - 1 vanishes to the claimed precision
    assert ((1 + z) ** 3 - 1).valuation() >= root.claimed_bound
    assert root.claimed_bound == min(Fraction(7), Fraction(9, 2))


def test_lift_lubin_tate_h2():
    root = lift_torsion_root(build_lubin_tate(C3, 2, 14))
    z = root.z
    assert root.witness.extension.describe()["eisenstein"] == [3, 0, 0, 0, 0, 0, 0, 0, 1]
    assert z.valuation() == Fraction(1, 8)
    assert (3 * z + z**9).valuation() >= root.claimed_bound


def test_lift_additive_fails_upstream():
    with pytest.raises(InfiniteHeightComponent):
        lift_torsion_root(build_additive(C3, 8))


def test_lift_needs_precision():
    with pytest.raises(IndeterminatePrecision):
        lift_torsion_root(build_multiplicative(PrimeConfig(3, 1, 3), 8))


@pytest.mark.parametrize(
    "F,d",
    [
        (build_multiplicative(C3, 8), 3),
        (build_lubin_tate(C3, 2, 14), 9),
        (build_elliptic(C3, 14, short=(1, 0)), 9),
        (build_elliptic(C3, 14, a=(0, 1, 0, 1, 1)), 3),
        (build_lubin_tate(PrimeConfig(3, 2, 6), 1, 8), 3),
        (build_lubin_tate(PrimeConfig(5, 1, 8), 1, 12), 5),
    ],
)
def test_root_geometry(F, d):
    root = lift_torsion_root(F)
    geo = eisenstein_root_geometry(root.witness, root.z)
    assert geo.v_P_prime == Fraction(d - 2, d - 1)
    assert geo.krasner_gap > Fraction(1, d - 1)
    assert geo.ok
    # direct residual of the truncated [p] at z
    fp = F.mul_by_p()[0]
    assert evaluate_series(fp, [root.z])[0].valuation() >= root.claimed_bound


def test_root_geometry_checks_conjugates_when_available():
    # LT(1) over p = 5: mu_4 lies in Z_5, so all four roots theta*zeta are explicit
    root = lift_torsion_root(build_lubin_tate(PrimeConfig(5, 1, 8), 1, 12))
    geo = eisenstein_root_geometry(root.witness)
    assert geo.conjugates_checked == 3
    assert all(v == Fraction(1, 4) for v in geo.conjugate_distances)


def test_torsion_valuation_examples():
    r = torsion_valuations(build_multiplicative(C3, 8))
    assert r.valuations == [(Fraction(1, 2), 2)] and r.e_pred == 2 and r.tame
    r = torsion_valuations(build_lubin_tate(C3, 2, 14))
    assert r.valuations == [(Fraction(1, 8), 8)] and r.e_pred == 8 and r.tame
    r = torsion_valuations(build_elliptic(C3, 14, a=(0, 1, 0, 1, 1)))
    assert r.degrees == (3,) and r.valuations == [(Fraction(1, 2), 2)] and r.e_pred == 2


def test_mixed_product_point_classes():
    P = build_product([build_lubin_tate(C3, 1, 14), build_lubin_tate(C3, 2, 14)])
    r = torsion_valuations(P)
    assert not r.strictness.is_strict and r.e_pred is None
    classes = {tuple(c["support"]): c["min_coordinate_valuation"]["value"] for c in r.point_classes}
    assert classes == {(1,): "1/2", (2,): "1/8", (1, 2): "1/8"}
    with pytest.raises(NotStrict):
        verify_theorem_B(P)


def test_non_product_dim2_is_predicted_only():
    lt = build_lubin_tate(C3, 1, 8)
    G = change_coordinates(build_product([lt, lt]), [[1, 1], [0, 1]])
    r = torsion_valuations(G)
    assert r.status == "predicted, unverified"
    assert r.valuations == [(Fraction(1, 2), 8)]
    with pytest.raises(UnsupportedDimension):
        verify_theorem_B(G)


def test_theorem_b_examples():
    r = verify_theorem_B(build_multiplicative(C3, 8))
    assert r.tame and r.e_pred == 2 and r.uniformizer_index == 1
    lt = build_lubin_tate(C3, 2, 14)
    r = verify_theorem_B(build_product([lt, lt]))
    assert r.e_pred == 8 and r.tame
    first = r.witnesses[0]
    assert first.coordinates[1].is_zero()
    assert min(x.valuation() for x in first.coordinates) == Fraction(1, 8)
    r = verify_theorem_B(build_elliptic(C3, 14, a=(0, 1, 0, 1, 1)))
    assert r.tame and r.e_pred == 2


def test_o1_exclusion_examples():
    out = verify_O1_exclusion(build_multiplicative(C3, 8))
    assert out[0].reports[0].delta == Fraction(-1, 2)
    out = verify_O1_exclusion(build_lubin_tate(C3, 2, 14))
    assert out[0].reports[0].delta == Fraction(-7, 8)
    lt = build_lubin_tate(C3, 2, 14)
    out = verify_O1_exclusion(build_product([lt, lt]))
    zero_coord = out[0].reports[1]
    assert zero_coord.delta == Valuation(0) and zero_coord.in_O1
    assert all(o.ok for o in out)


def test_report_json_has_tagged_valuations():
    r = verify_theorem_B(build_multiplicative(C3, 8))
    js = r.to_json()
    w = js["witnesses"][0]
    assert w["valuations"][0] == {"value": "1/2", "exact": True}
    assert w["residual"]["exact"] is False
