from fractions import Fraction
import random

import pytest
from hypothesis import given, strategies as st

from formal_torsion.errors import ContextMismatch, EmbeddingResidual, NonUnit
from formal_torsion.ramified_ext import (
    EisensteinExtension,
    change_presentation,
    cyclotomic_delta,
    delta,
    delta_properties_check,
)
from formal_torsion.scalar_arith import PrimeConfig, Valuation
from oracles import cyclotomic_different

C3 = PrimeConfig(3, 1, 8)


def test_arith_examples():
    L = EisensteinExtension(C3, [-3 * 2, 0, 1])  # pi^2 = 3u with u = 2
    assert L.pi * L.pi == L.scalar(6)
    assert L.pi + L.zero == L.pi
    M = EisensteinExtension(C3, [3, 0, 1])
    assert (1 + M.pi) * (1 - M.pi) == M.scalar(4)


def test_valuation_examples():
    L8 = EisensteinExtension.pure(C3, 8, 3)
    assert L8.pi.valuation() == Fraction(1, 8)
    L2 = EisensteinExtension(C3, [-3, 0, 1])
    assert (3 + L2.pi).valuation() == Fraction(1, 2)
    v = L2.zero.valuation()
    assert not v.exact and v.value == 8


def test_rejects_non_eisenstein():
    with pytest.raises(ValueError):
        EisensteinExtension(C3, [9, 0, 1])
    with pytest.raises(ValueError):
        EisensteinExtension(C3, [3, 1, 1])


def test_inverse():
    L = EisensteinExtension(C3, [-3, 0, 1])
    u = 2 + L.pi
    assert u * u.inverse() == L.one
    with pytest.raises(NonUnit):
        L.pi.inverse()


def test_mismatched_extensions():
    a = EisensteinExtension(C3, [-3, 0, 1]).pi
    b = EisensteinExtension(C3, [3, 0, 1]).pi
    with pytest.raises(ContextMismatch):
        a + b


def test_different_examples():
    assert EisensteinExtension(C3, [-3, 0, 1]).different_valuation() == Fraction(1, 2)
    assert EisensteinExtension.pure(C3, 8, 3).different_valuation() == Fraction(7, 8)
    phi9 = EisensteinExtension.cyclotomic(C3, 2)
    assert phi9.e == 6 and not phi9.tame
    assert phi9.different_valuation() == cyclotomic_different(3, 2)


@pytest.mark.parametrize("e", [2, 4, 5, 7, 8, 10])
def test_tame_different(e):
    assert EisensteinExtension.pure(C3, e, 3).different_valuation() == Fraction(e - 1, e)


@pytest.mark.parametrize("p,r", [(3, 1), (3, 2), (5, 1)])
def test_cyclotomic_different(p, r):
    ext = EisensteinExtension.cyclotomic(PrimeConfig(p, 1, 8), r)
    assert ext.different_valuation() == cyclotomic_different(p, r)


def test_delta_examples():
    L = EisensteinExtension(C3, [-3, 0, 1])
    r = delta(L.pi)
    assert r.delta == Fraction(-1, 2) and not r.in_O1
    c = delta(L.scalar(5))
    assert c.delta == Valuation(0) and c.in_O1
    phi9 = EisensteinExtension.cyclotomic(C3, 2)
    assert delta(phi9.one + phi9.pi).delta == Fraction(-3, 2)


def test_cyclotomic_delta_reports_both_constants():
    rep = cyclotomic_delta(C3, 2)
    assert rep["delta_eps"] == Fraction(-3, 2)
    assert rep["v_different"] == rep["v_different_formula"]
    assert rep["delta_dlog_quoted"] == Fraction(-37, 18)


def test_delta_f_hint_is_presentation_free():
    L = EisensteinExtension(C3, [-3, 0, 1])
    a = L.pi * L.pi  # = 3
    assert delta(a, f_hint=[0, 0, 1]).delta == delta(a).delta == Valuation(0)
    with pytest.raises(ValueError):
        delta(a, f_hint=[0, 1])


def test_lemma_examples():
    L = EisensteinExtension(C3, [-3, 0, 1])
    pi = L.pi
    r = delta_properties_check(pi, pi)
    assert r["ok"] and r["delta_sum"] == Fraction(-1, 2)
    r = delta_properties_check(pi, L.scalar(3))
    assert r["prop1_equality"] is True and r["delta_sum"] == Fraction(-1, 2)
    r = delta_properties_check(pi, pi, poly=[0, 0, 1])
    assert r["prop3_lhs"] == Valuation(0) == r["prop3_rhs"]


def test_presentation_examples():
    L2 = EisensteinExtension(C3, [-3, 0, 1])
    L4 = EisensteinExtension.pure(C3, 4, -3)
    image = change_presentation(L2.pi, L4, L4.pi * L4.pi)
    assert image == L4.pi * L4.pi
    assert delta(image).delta == delta(L2.pi).delta == Fraction(-1, 2)
    same = change_presentation(L2.pi, L2, L2.pi)
    assert delta(same).to_json() == delta(L2.pi).to_json()
    assert delta(change_presentation(L2.scalar(7), L4, L4.pi**2)).delta == Valuation(0)
    with pytest.raises(EmbeddingResidual):
        change_presentation(L2.pi, L4, L4.pi)


def test_delta_trend_along_cyclotomic_tower():
    rng = random.Random(5)
    mins = []
    for r in (1, 2):
        ext = EisensteinExtension.cyclotomic(C3, r)
        vals = [delta(ext.element([rng.randrange(3**8) for _ in range(ext.e)])).delta for _ in range(40)]
        vals.append(delta(ext.pi).delta)
        mins.append(min(vals))
    assert mins[1] < mins[0]


coeff = st.integers(0, 3**8 - 1)


@given(st.sampled_from([2, 4, 8]), st.lists(coeff, min_size=8, max_size=8), st.lists(coeff, min_size=8, max_size=8))
def test_valuation_multiplicative_ultrametric(e, ca, cb):
    L = EisensteinExtension.pure(C3, e, -3)
    a, b = L.element(ca[:e]), L.element(cb[:e])
    va, vb = a.valuation(), b.valuation()
    assert (a + b).valuation() >= min(va, vb)
    if va.exact and vb.exact and va.value + vb.value < 7:
        assert (a * b).valuation() == va + vb


@given(st.sampled_from([2, 4, 8]), st.lists(coeff, min_size=8, max_size=8))
def test_delta_is_nonpositive(e, ca):
    L = EisensteinExtension.pure(C3, e, 3)
    r = delta(L.element(ca[:e]))
    assert r.delta <= 0 and r.in_O1 == (r.delta == 0)
