from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from formal_torsion.errors import ContextMismatch, IndeterminatePrecision, NonUnit
from formal_torsion.scalar_arith import PrimeConfig, Valuation, unramified_modulus, vmin
from oracles import is_irreducible_mod_p, unramified_mul

C34 = PrimeConfig(3, 1, 4)
C32 = PrimeConfig(3, 1, 2)
C9 = PrimeConfig(3, 2, 5)


def test_add_examples():
    assert (C34.scalar(5) + C34.scalar(22)).raw == 27
    assert C34.scalar(7) + 0 == C34.scalar(7)
    assert (C32.scalar(5) + C32.scalar(4)).is_zero()


def test_valuation_examples():
    assert C34.scalar(18).valuation() == Valuation(2)
    v = C34.scalar(81).valuation()
    assert not v.exact and v.value == 4
    assert str(v) == ">=4"
    assert C34.scalar(7).valuation() == Valuation(0)


def test_inverse_examples():
    assert C32.scalar(2).inverse().raw == 5
    assert C32.scalar(1).inverse().raw == 1
    with pytest.raises(NonUnit):
        C32.scalar(3).inverse()


def test_teichmuller_examples():
    assert [t.residue().raw for t in PrimeConfig(3, 1, 6).teichmuller_units(2)] == [1, 2]
    assert PrimeConfig(3).teichmuller_units(0) == []
    units = C9.teichmuller_units(8)
    assert len({t.residue().raw for t in units}) == 8
    with pytest.raises(ValueError):
        C9.teichmuller_units(9)


def test_teichmuller_is_fixed_by_q_power():
    for t in C9.teichmuller_units(8):
        assert t ** C9.q == t


def test_contexts_do_not_mix():
    with pytest.raises(ContextMismatch):
        C34.scalar(1) + C32.scalar(1)


def test_rejects_bad_configs():
    for args in [(2, 1, 4), (9, 1, 4), (3, 0, 4), (3, 1, 0)]:
        with pytest.raises(ValueError):
            PrimeConfig(*args)


@pytest.mark.parametrize("p,f", [(3, 2), (3, 3), (5, 2), (7, 2)])
def test_unramified_modulus_irreducible(p, f):
    m = unramified_modulus(p, f)
    assert len(m) == f + 1 and m[-1] == 1
    assert is_irreducible_mod_p(tuple(reversed(m)), p)


elems3 = st.integers(0, 3**8 - 1)


@given(elems3, elems3, elems3)
def test_ring_axioms_f1(a, b, c):
    cfg = PrimeConfig(3, 1, 8)
    A, B, Cc = cfg.scalar(a), cfg.scalar(b), cfg.scalar(c)
    assert (A * B) * Cc == A * (B * Cc)
    assert A * (B + Cc) == A * B + A * Cc
    assert (A * B).raw == a * b % 3**8


tuples9 = st.tuples(st.integers(0, 3**5 - 1), st.integers(0, 3**5 - 1))


@given(tuples9, tuples9, tuples9)
def test_ring_axioms_f2_against_sympy(a, b, c):
    A, B, Cc = C9.scalar(a), C9.scalar(b), C9.scalar(c)
    assert (A * B).raw == unramified_mul(a, b, tuple(reversed(C9.modulus)), 3, 5)
    assert (A * B) * Cc == A * (B * Cc)
    assert A * (B + Cc) == A * B + A * Cc


@given(elems3, elems3)
def test_valuation_laws(a, b):
    cfg = PrimeConfig(3, 1, 8)
    A, B = cfg.scalar(a), cfg.scalar(b)
    va, vb = A.valuation(), B.valuation()
    if va.exact and vb.exact and va.value + vb.value < 8:
        assert (A * B).valuation() == va + vb
    assert (A + B).valuation() >= min(va, vb)


@given(st.integers(0, 3**8 - 1).filter(lambda n: n % 3))
def test_double_inverse(a):
    cfg = PrimeConfig(3, 1, 8)
    A = cfg.scalar(a)
    assert A.inverse().inverse() == A
    assert A * A.inverse() == 1


@given(tuples9.filter(lambda t: t[0] % 3 or t[1] % 3))
def test_inverse_f2(a):
    A = C9.scalar(a)
    assert A * A.inverse() == C9.scalar(1)


def test_valuation_semantics():
    assert Valuation(Fraction(1, 2)) < Valuation.lower_bound(1)
    assert Valuation.infinity() > Valuation(100)
    assert vmin(Valuation(1), Valuation.lower_bound(1)) == Valuation(1)
    assert vmin(Valuation.lower_bound(1), Valuation(2)) == Valuation.lower_bound(1)
    with pytest.raises(IndeterminatePrecision):
        Valuation.lower_bound(3).require_exact()
    assert Valuation(3).to_json() == {"value": "3", "exact": True}
