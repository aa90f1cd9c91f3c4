"""Truncated basis computation against the evaluation oracle."""

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycert.groebner import (
    DegreeOutOfRangeError,
    buchberger_truncated,
    enumerate_zero_set,
    ideal_membership,
    interreduce,
    make_basis,
    monomials_up_to_degree,
    reduce_basis,
    vanishes_on,
    vanishing_ideal_basis,
)
from polycert.ring import GRLEX, LEX, Polynomial, divide, leading_term, parse_polynomial, s_polynomial


def P(text):
    return parse_polynomial(text, GRLEX)


def test_single_boolean_axiom_is_its_own_basis():
    b = buchberger_truncated([P("1*x0^2 - 1*x0")], 2)
    assert [str(g) for g in b.elements] == ["1*x0^2 - 1*x0"]
    assert b.reduced and b.truncation_degree == 2
    assert b.metadata["working_degree"] == 4


def test_three_generator_system_already_reduced():
    gens = [P("1*x0^2 - 1*x0"), P("1*x1^2 - 1*x1"), P("1*x0*x1 - 1*x1")]
    b = buchberger_truncated(gens, 2)
    assert set(b.element_strings()) == {
        "1*x0^2 - 1*x0",
        "1*x1^2 - 1*x1",
        "1*x0*x1 - 1*x1",
    }


def test_sphere_pair_splits_into_squares():
    b = buchberger_truncated([P("1*x0^2 + 1*x1^2"), P("1*x0^2 - 1*x1^2")], 2)
    strs = set(b.element_strings())
    assert "1*x0^2" in strs and "1*x1^2" in strs
    assert "1*x0" not in strs and len(strs) == 2


def test_lex_rejected():
    with pytest.raises(ValueError):
        buchberger_truncated([parse_polynomial("1*x0", LEX)], 1, order=LEX)


def test_deferred_pairs_recorded():
    gens = [P("1*x0^2*x1 + 1*x0"), P("1*x0*x1^2 + 1*x1")]
    b = buchberger_truncated(gens, 2, working_degree=3)
    assert b.metadata["deferred_pairs"]
    i, j, deg = b.metadata["deferred_pairs"][0]
    assert deg == 4


def test_oversized_generator_dropped_and_recorded():
    b = buchberger_truncated([P("1*x0^5"), P("1*x0^2 - 1*x0")], 1, working_degree=2)
    assert b.metadata["dropped_generators"] == ["1*x0^5"]


def test_reduce_basis_drops_scalar_multiple():
    b = make_basis([P("1*x0^2 - 1*x0"), P("2*x0^2 - 2*x0")], 2)
    r = reduce_basis(b)
    assert r.element_strings() == ["1*x0^2 - 1*x0"]


def test_reduce_basis_splits_pair():
    b = make_basis([P("1*x0"), P("1*x0 + 1*x1")], 1)
    r = reduce_basis(b)
    assert set(r.element_strings()) == {"1*x0", "1*x1"}


def test_reduce_basis_idempotent_on_examples():
    for elems in ([P("1*x0^2 - 1*x0"), P("2*x0^2 - 2*x0")], [P("1*x0"), P("1*x0 + 1*x1")]):
        r1 = reduce_basis(make_basis(elems, 2))
        r2 = reduce_basis(r1)
        assert r1.elements == r2.elements


IMPLICATION_POINTS = [(0, 0), (1, 0), (1, 1)]


def implication_basis():
    gens = [P("1*x0^2 - 1*x0"), P("1*x1^2 - 1*x1"), P("1*x0*x1 - 1*x1")]
    return buchberger_truncated(gens, 2)


def test_membership_pinned():
    b = implication_basis()
    assert ideal_membership(P("1*x0*x1 - 1*x1"), b) is True
    assert ideal_membership(P("1*x0 - 1*x1"), b) is False
    assert ideal_membership(Polynomial.zero(), b) is True


def test_membership_rejects_high_degree():
    b = implication_basis()
    with pytest.raises(DegreeOutOfRangeError):
        ideal_membership(P("1*x0^3"), b)


def test_oracle_agrees_on_implication_ideal():
    # frozen via the evaluation oracle: reduced basis of the three-point set
    oracle = vanishing_ideal_basis(IMPLICATION_POINTS, 2)
    assert set(oracle.element_strings()) == {
        "1*x0^2 - 1*x0",
        "1*x1^2 - 1*x1",
        "1*x0*x1 - 1*x1",
    }
    assert oracle.elements == implication_basis().elements


def test_vanishing_ideal_of_empty_set_is_unit():
    b = vanishing_ideal_basis([], 2)
    assert b.element_strings() == ["1"]


def test_vanishing_ideal_duplicate_points_rejected():
    with pytest.raises(ValueError):
        vanishing_ideal_basis([(0, 0), (0, 0)], 2)


def _random_points(rng, n, dom=(0, 1, 2)):
    pts = set()
    for p in itertools.product(dom, repeat=n):
        if rng.random() < 0.4:
            pts.add(p)
    return sorted(pts)


@pytest.mark.parametrize("seed", range(12))
def test_buchberger_matches_evaluation_oracle(seed):
    rng = random.Random(seed)
    n = rng.choice([1, 2, 3])
    pts = _random_points(rng, n)
    oracle = vanishing_ideal_basis(pts, n)
    d = oracle.truncation_degree
    # scramble: original elements plus random polynomial combinations of them
    gens = list(oracle.elements)
    mons = monomials_up_to_degree(n, 1)
    for _ in range(3):
        g = Polynomial.zero()
        for b in gens[: len(oracle.elements)]:
            if rng.random() < 0.6:
                c = Fraction(rng.randint(-3, 3))
                m = rng.choice(mons)
                g = g + b.mul_monomial(m, c)
        if not g.is_zero():
            gens.append(g)
    rng.shuffle(gens)
    computed = buchberger_truncated(gens, d, working_degree=d + 2)
    assert computed.elements == tuple(g for g in oracle.elements if g.degree() <= d)


@pytest.mark.parametrize("seed", range(8))
def test_membership_agrees_with_vanishing(seed):
    rng = random.Random(100 + seed)
    n = rng.choice([2, 3])
    pts = _random_points(rng, n)
    if not pts:
        pts = [(0,) * n]
    oracle = vanishing_ideal_basis(pts, n)
    d = oracle.truncation_degree
    mons = monomials_up_to_degree(n, d)
    for _ in range(40):
        f = Polynomial.zero()
        for m in rng.sample(mons, k=min(4, len(mons))):
            f = f + Polynomial.term(Fraction(rng.randint(-2, 2)), m)
        if f.degree() > d:
            continue
        expected = vanishes_on(f, pts)
        if f.is_zero():
            continue
        assert ideal_membership(f, oracle) == expected


def test_buchberger_criterion_on_output():
    rng = random.Random(7)
    pts = _random_points(rng, 2)
    oracle = vanishing_ideal_basis(pts, 2)
    b = buchberger_truncated(list(oracle.elements), oracle.truncation_degree)
    elems = list(b.elements)
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            l = elems[i].leading_monomial().lcm(elems[j].leading_monomial())
            if l.deg > b.metadata["working_degree"]:
                continue
            s = s_polynomial(elems[i], elems[j])
            if not s.is_zero():
                assert divide(s, elems)[1].is_zero()


def test_enumerate_zero_set():
    polys = [P("1*x0^2 - 1*x0"), P("1*x1^2 - 1*x1"), P("1*x0*x1 - 1*x1")]
    assert enumerate_zero_set(polys, (0, 1), 2) == [
        (Fraction(0), Fraction(0)),
        (Fraction(1), Fraction(0)),
        (Fraction(1), Fraction(1)),
    ]


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_interreduce_idempotent(seed):
    rng = random.Random(seed)
    n = rng.choice([1, 2])
    mons = monomials_up_to_degree(n, 3)
    elems = []
    for _ in range(rng.randint(1, 4)):
        f = Polynomial.zero()
        for m in rng.sample(mons, k=rng.randint(1, 3)):
            f = f + Polynomial.term(Fraction(rng.randint(-3, 3)), m)
        if not f.is_zero():
            elems.append(f)
    if not elems:
        return
    once = interreduce(elems, GRLEX)
    twice = interreduce(list(once), GRLEX)
    assert once == twice
