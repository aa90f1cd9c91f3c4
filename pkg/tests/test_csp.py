"""Encoding, semilattice bit maps, and Boolean views of CSP instances."""

import random
from fractions import Fraction

import pytest

from polycert.csp import (
    BOOLEAN_DOMAIN,
    BinaryEncoding,
    CspInstance,
    DomainSpec,
    SemilatticeLawError,
    SemilatticeStructure,
    bit_extractors,
    booleanize_instance,
    constraint_polynomial,
    decoder_polynomial,
    domain_polynomial,
    encode_instance,
    gate_polynomial,
    indicator_polynomial,
    instance_from_json_dict,
    instance_to_json_dict,
    lagrange_interpolate,
    make_instance,
    max_semilattice,
    min_semilattice,
    parse_dimacs,
    pullback_polynomial,
    semilattice_encoding,
)
from polycert.groebner import buchberger_truncated, enumerate_zero_set
from polycert.ring import GRLEX, Polynomial, divide, parse_polynomial

P = parse_polynomial

CHAIN3 = DomainSpec((0, 1, 2))


def test_domain_polynomial_pinned():
    assert str(domain_polynomial(BOOLEAN_DOMAIN, 0)) == "1*x0^2 - 1*x0"
    assert str(domain_polynomial(CHAIN3, 0)) == "1*x0^3 - 3*x0^2 + 2*x0"
    assert str(domain_polynomial(DomainSpec((-1, 1)), 1)) == "1*x1^2 - 1"


def test_domain_spec_validation():
    with pytest.raises(ValueError):
        DomainSpec(())
    with pytest.raises(ValueError):
        DomainSpec((0, 1, 1))
    assert DomainSpec((0, "1/2")).beta >= 2


def test_lagrange_pinned():
    f = lagrange_interpolate([(0, 0), (1, 1), (2, 4)])
    assert f == P("1*x0^2")
    with pytest.raises(ValueError):
        lagrange_interpolate([(0, 0), (0, 1)])


def test_indicator_polynomial_values():
    for a in CHAIN3.values:
        f = indicator_polynomial(CHAIN3, a, 0)
        for b in CHAIN3.values:
            assert f.evaluate([b]) == (1 if a == b else 0)


def test_equality_constraint_encoding():
    inst = make_instance(2, (0, 1), [((0, 1), [(0, 0), (1, 1)])])
    polys = encode_instance(inst)
    assert str(polys[0]) == "-2*x0*x1 + 1*x0 + 1*x1"
    assert str(polys[1]) == "1*x0^2 - 1*x0"
    assert str(polys[2]) == "1*x1^2 - 1*x1"
    basis = buchberger_truncated(polys, 2)
    assert "1*x0 - 1*x1" in basis.element_strings()


def test_empty_relation_encodes_to_one():
    f = constraint_polynomial(BOOLEAN_DOMAIN, (0,), [])
    assert f == Polynomial.constant(1)


def test_full_relation_leaves_only_domain_polys():
    inst = make_instance(2, (0, 1), [((0, 1), [(a, b) for a in (0, 1) for b in (0, 1)])])
    polys = encode_instance(inst)
    assert [str(f) for f in polys] == ["1*x0^2 - 1*x0", "1*x1^2 - 1*x1"]


@pytest.mark.parametrize("seed", range(10))
def test_encoding_zero_set_matches_solutions(seed):
    rng = random.Random(seed)
    dom = rng.choice([(0, 1), (0, 1, 2)])
    n = rng.choice([2, 3])
    cons = []
    for _ in range(rng.randint(1, 3)):
        arity = rng.choice([1, 2])
        scope = tuple(rng.sample(range(n), arity))
        import itertools as it

        tuples = [t for t in it.product(dom, repeat=arity) if rng.random() < 0.6]
        cons.append((scope, tuples))
    inst = make_instance(n, dom, cons)
    polys = encode_instance(inst)
    assert enumerate_zero_set(polys, dom, n) == inst.solutions()
    for c in inst.constraints:
        f = constraint_polynomial(inst.domain, c.scope, c.sorted_tuples())
        if not f.is_zero():
            assert f.degree() <= len(c.scope) * (len(dom) - 1)


def test_instance_validation():
    with pytest.raises(ValueError):
        make_instance(1, (0, 1), [((0, 1), [(0, 0)])])
    with pytest.raises(ValueError):
        make_instance(2, (0, 1), [((0, 0), [(0, 0)])])
    with pytest.raises(ValueError):
        make_instance(2, (0, 1), [((0, 1), [(0, 2)])])
    with pytest.raises(ValueError):
        make_instance(2, (0, 1), [((0, 1), [(0,)])])


# -- semilattices --------------------------------------------------------------


def test_semilattice_law_violations_named():
    dom = DomainSpec((0, 1))
    with pytest.raises(SemilatticeLawError) as e:
        SemilatticeStructure(dom, {(Fraction(0), Fraction(0)): 1, (Fraction(0), Fraction(1)): 0,
                                   (Fraction(1), Fraction(0)): 0, (Fraction(1), Fraction(1)): 1})
    assert e.value.law == "idempotency"
    bad = {(Fraction(a), Fraction(b)): min(a, b) for a in (0, 1) for b in (0, 1)}
    bad[(Fraction(0), Fraction(1))] = Fraction(1)
    with pytest.raises(SemilatticeLawError) as e:
        SemilatticeStructure(dom, bad)
    assert e.value.law == "commutativity"
    with pytest.raises(SemilatticeLawError) as e:
        SemilatticeStructure(dom, {})
    assert e.value.law == "totality"


def test_chain_encoding_pinned():
    enc = semilattice_encoding(min_semilattice(CHAIN3))
    assert enc.mu == {Fraction(0): (0, 0), Fraction(1): (1, 0), Fraction(2): (1, 1)}
    assert enc.dropped_column == 0
    assert enc.width == 2


def test_join_chain_encoding_max_closed():
    enc = semilattice_encoding(max_semilattice(CHAIN3))
    assert enc.dropped_column == 2
    img = set(enc.mu.values())
    for a in CHAIN3.values:
        for b in CHAIN3.values:
            joined = max(a, b)
            bits = tuple(max(x, y) for x, y in zip(enc.mu[a], enc.mu[b]))
            assert bits == enc.mu[joined]
            assert bits in img


def test_diamond_meet_encoding_min_closed():
    dom = DomainSpec((0, 1, 2, 3))
    meet = {}

    def m(a, b):
        # diamond order: bottom 0, incomparable atoms 1 and 2, top 3
        if a == b:
            return a
        if {a, b} == {1, 2}:
            return 0
        if 3 in (a, b):
            return a if b == 3 else b
        return 0

    for a in (0, 1, 2, 3):
        for b in (0, 1, 2, 3):
            meet[(Fraction(a), Fraction(b))] = Fraction(m(a, b))
    s = SemilatticeStructure(dom, meet, "meet")
    enc = semilattice_encoding(s)
    for a in dom.values:
        for b in dom.values:
            bits = tuple(min(x, y) for x, y in zip(enc.mu[a], enc.mu[b]))
            assert bits == enc.mu[s.apply(a, b)]


def test_bit_extractors_pinned():
    enc = semilattice_encoding(min_semilattice(CHAIN3))
    q1, q2 = bit_extractors(enc)
    assert q1 == P("-1/2*x0^2 + 3/2*x0")
    assert q2 == P("1/2*x0^2 - 1/2*x0")
    enc01 = semilattice_encoding(min_semilattice(BOOLEAN_DOMAIN))
    (q,) = bit_extractors(enc01)
    assert q == P("1*x0")


def test_decoder_inverts_encoding():
    enc = semilattice_encoding(min_semilattice(CHAIN3))
    dec = decoder_polynomial(enc, (0, 1))
    assert dec == P("1*x0*x1 + 1*x0")
    for d, bits in enc.mu.items():
        assert dec.evaluate([Fraction(b) for b in bits]) == d


def test_decoder_of_extractors_is_identity_mod_domain():
    enc = semilattice_encoding(min_semilattice(CHAIN3))
    q1, q2 = bit_extractors(enc)
    dec = decoder_polynomial(enc, (0, 1))
    composed = dec.substitute({0: q1, 1: q2})
    diff = composed - Polynomial.variable(0)
    _, rem = divide(diff, [domain_polynomial(CHAIN3, 0)])
    assert rem.is_zero()


def test_gate_polynomial_chain():
    enc = semilattice_encoding(min_semilattice(CHAIN3))
    gate = gate_polynomial(enc, (0, 1))
    for bits in ((0, 0), (1, 0), (1, 1)):
        assert gate.evaluate([Fraction(b) for b in bits]) == 0
    assert gate.evaluate([Fraction(0), Fraction(1)]) != 0


def test_gate_polynomial_boolean_is_domain_poly():
    enc = semilattice_encoding(min_semilattice(BOOLEAN_DOMAIN))
    assert gate_polynomial(enc, (0,)) == P("1*x0^2 - 1*x0")


def test_booleanize_boolean_is_identity_up_to_renaming():
    inst = make_instance(2, (0, 1), [((0, 1), [(0, 0), (1, 1)])])
    enc = semilattice_encoding(min_semilattice(BOOLEAN_DOMAIN))
    b = booleanize_instance(inst, enc)
    assert b.varmap == ((0,), (1,))
    assert b.instance.constraints[0].tuples == inst.constraints[0].tuples
    assert list(b.constraint_polys) == [encode_instance(inst)[0]]


def test_booleanize_equality_forces_equal_bit_tuples():
    inst = make_instance(2, CHAIN3, [((0, 1), [(d, d) for d in (0, 1, 2)])])
    enc = semilattice_encoding(min_semilattice(CHAIN3))
    b = booleanize_instance(inst, enc)
    sols = b.instance.solutions()
    for s in sols:
        assert s[:2] == s[2:]
    assert len(sols) == 3


@pytest.mark.parametrize("seed", range(6))
def test_booleanize_solution_bijection(seed):
    rng = random.Random(40 + seed)
    import itertools as it

    n = 2
    cons = []
    for _ in range(rng.randint(1, 2)):
        scope = tuple(rng.sample(range(n), rng.choice([1, 2])))
        tuples = [t for t in it.product((0, 1, 2), repeat=len(scope)) if rng.random() < 0.7]
        cons.append((scope, tuples))
    inst = make_instance(n, CHAIN3, cons)
    enc = semilattice_encoding(min_semilattice(CHAIN3))
    b = booleanize_instance(inst, enc)
    expected = set()
    for s in inst.solutions():
        expected.add(tuple(Fraction(x) for d in s for x in enc.mu[d]))
    assert set(b.instance.solutions()) == expected
    # polynomial view has the same zero set over the Boolean cube
    zs = set(enumerate_zero_set(b.all_polynomials(), (0, 1), b.instance.n))
    assert zs == expected


def test_pullback_pinned():
    enc = semilattice_encoding(min_semilattice(CHAIN3))
    qs = bit_extractors(enc)
    # bit variable y11 (second variable's first bit) pulls back to Q1(x1)
    f = Polynomial.variable(2)  # bit id 2 = var 1, bit 0 under the varmap
    g = pullback_polynomial(f, ((0, 1), (2, 3)), qs)
    assert g == P("-1/2*x1^2 + 3/2*x1")


def test_json_round_trip():
    inst = make_instance(2, (0, "1/2"), [((0, 1), [(0, 0), ("1/2", "1/2")])])
    d = instance_to_json_dict(inst)
    back = instance_from_json_dict(d)
    assert back == inst
    with pytest.raises(ValueError):
        instance_from_json_dict({"domain": [0, 1]})


def test_parse_dimacs():
    text = """c tiny
p cnf 3 2
1 -2 0
2 3 0
"""
    inst, clauses = parse_dimacs(text)
    assert inst.n == 3
    assert clauses == [(1, -2), (2, 3)]
    sols = inst.solutions()
    for s in sols:
        assert (s[0] == 1 or s[1] == 0) and (s[1] == 1 or s[2] == 1)
    with pytest.raises(ValueError):
        parse_dimacs("p cnf 2 1\n1 2\n")
