"""Scratch smoke driver for solvers.py."""

import sys
import traceback
from fractions import Fraction

from polycert.csp import (
    BOOLEAN_DOMAIN,
    DomainSpec,
    make_instance,
    min_semilattice,
    max_semilattice,
    encode_instance,
)
from polycert.groebner import vanishing_ideal_basis, make_basis
from polycert.pc import pc_verify
from polycert.ring import GRLEX, Polynomial, parse_polynomial
from polycert.solvers import (
    ClosureError,
    DerivationError,
    classify_two_term,
    dual_disc_gb,
    imp_solve,
    min_gb,
    scheme1,
    scheme2,
    scheme3,
    scheme4,
    scheme5,
    semilattice_gb,
    sos_csp_refute,
)

P = parse_polynomial


def check(name, fn):
    try:
        fn()
        print("ok   %s" % name)
    except Exception:
        print("FAIL %s" % name)
        traceback.print_exc()
        sys.exit(1)


def assert_derivations(basis, derivs, axioms):
    assert set(derivs) == set(basis.elements), (set(derivs), basis.elements)
    for g, proof in derivs.items():
        assert proof.derived() == g, (g, proof.derived())
        rep = pc_verify(proof)
        assert rep.ok, (g, rep)
        assert tuple(proof.axioms) == tuple(axioms)


def t_min_gb_pinned():
    inst = make_instance(2, BOOLEAN_DOMAIN, [(((0, 1)), {(0, 0), (1, 0), (1, 1)})])
    basis, derivs = min_gb(inst, 2)
    want = {P("x0^2 - x0"), P("x1^2 - x1"), P("x0*x1 - x1")}
    assert set(basis.elements) == want, basis.element_strings()
    assert_derivations(basis, derivs, encode_instance(inst, GRLEX))
    for g in basis.elements:
        classify_two_term(g)


def t_min_gb_oracle_small():
    import itertools
    import random

    rng = random.Random(7)
    for trial in range(25):
        n = rng.randint(2, 4)
        pts = set()
        for _ in range(rng.randint(1, 5)):
            pts.add(tuple(rng.randint(0, 1) for _ in range(n)))
        # close under min
        changed = True
        while changed:
            changed = False
            for a in list(pts):
                for b in list(pts):
                    m = tuple(min(x, y) for x, y in zip(a, b))
                    if m not in pts:
                        pts.add(m)
                        changed = True
        inst = make_instance(n, BOOLEAN_DOMAIN, [(tuple(range(n)), pts)])
        for d in (2, 3):
            basis, derivs = min_gb(inst, d)
            oracle = vanishing_ideal_basis(
                [tuple(Fraction(x) for x in p) for p in pts], n, GRLEX
            )
            want = tuple(g for g in oracle.elements if g.degree() <= d)
            assert tuple(basis.elements) == want, (
                trial, d, basis.element_strings(), [str(g) for g in want])
            assert_derivations(basis, derivs, encode_instance(inst, GRLEX))


def t_min_gb_max_closed():
    # max-closure of {(0,1),(1,0)} adds (1,1)
    pts = {(0, 1), (1, 0), (1, 1)}
    inst = make_instance(2, BOOLEAN_DOMAIN, [((0, 1), pts)])
    basis, derivs = min_gb(inst, 2)
    oracle = vanishing_ideal_basis([(Fraction(a), Fraction(b)) for a, b in pts], 2, GRLEX)
    want = tuple(g for g in oracle.elements if g.degree() <= 2)
    assert tuple(basis.elements) == want, basis.element_strings()
    assert basis.metadata["polarity"] == "max"
    assert_derivations(basis, derivs, encode_instance(inst, GRLEX))


def t_min_gb_unsat():
    inst = make_instance(
        2, BOOLEAN_DOMAIN,
        [((0,), {(0,)}), ((0, 1), {(1, 1)})],
    )
    basis, derivs = min_gb(inst, 2)
    assert basis.element_strings() == ["1"], basis.element_strings()
    assert_derivations(basis, derivs, encode_instance(inst, GRLEX))


def t_min_gb_below_degree():
    inst = make_instance(2, BOOLEAN_DOMAIN, [((0, 1), {(0, 0), (1, 0), (1, 1)})])
    basis, _ = min_gb(inst, 1)
    assert P("x0*x1 - x1") not in basis.elements
    assert all(g.degree() <= 1 for g in basis.elements)


def t_min_gb_closure_error():
    inst = make_instance(2, BOOLEAN_DOMAIN, [((0, 1), {(0, 1), (1, 0)})])
    try:
        min_gb(inst, 2)
    except ClosureError as e:
        assert e.operation == "min and max"
        return
    raise AssertionError("expected ClosureError")


def t_min_gb_polys():
    polys = [P("x0*x1 - x1"), P("x0^2 - x0"), P("x1^2 - x1")]
    basis, derivs = min_gb(polys, 2)
    want = {P("x0^2 - x0"), P("x1^2 - x1"), P("x0*x1 - x1")}
    assert set(basis.elements) == want, basis.element_strings()
    assert_derivations(basis, derivs, polys)


def t_scheme1():
    h = P("x0")
    proof = scheme1(h, 1, 2)
    assert proof.derived() == h
    assert pc_verify(proof).ok
    assert proof.axioms == (P("x0^2 - x0"), P("x0^2 - 2*x0"))


def t_scheme2():
    proof = scheme2([0, 1, 2], [0, 2, 3])
    assert proof.derived() == P("x0^2 - 2*x0")  # (x)(x-2)
    assert pc_verify(proof).ok


def t_scheme3():
    # f = x(x-1)(x-2)(x-3), g = (x-1)(x^2+1): common root {1}
    proof = scheme3([0, 1, 2, 3], [1], (0, 1))
    assert proof.derived() == P("x0 - 1")
    assert pc_verify(proof).ok


def t_scheme4():
    # two quadratics
    proof = scheme4([0, 1, 2, 3], [1, 3], [(0, 1), (0, 2)])
    assert proof.derived() == P("x0^2 - 4*x0 + 3")
    assert pc_verify(proof).ok


def t_scheme5():
    sigma = {0: 1, 1: 2, 2: 0}
    proof = scheme5(sigma, 1)
    assert proof.derived() == P("x1 - 2")
    assert pc_verify(proof).ok


def t_dual_disc_perm():
    dom = DomainSpec((0, 1, 2))
    inst = make_instance(2, dom, [((0, 1), {(0, 0), (1, 1)})])
    basis, derivs = dual_disc_gb(inst)
    oracle = vanishing_ideal_basis(
        [(Fraction(0), Fraction(0)), (Fraction(1), Fraction(1))], 2, GRLEX
    )
    assert tuple(basis.elements) == tuple(oracle.elements), (
        basis.element_strings(), [str(g) for g in oracle.elements])
    assert_derivations(basis, derivs, encode_instance(inst, GRLEX))
    blocks = basis.metadata["blocks"]
    assert len(blocks) == 1
    assert blocks[0].variables == (0, 1)


def t_dual_disc_two_fan():
    dom = DomainSpec((0, 1))
    rel = {(0, 0), (0, 1), (1, 0)}  # fan at (0,0)
    inst = make_instance(2, dom, [((0, 1), rel)])
    basis, derivs = dual_disc_gb(inst)
    assert P("x0*x1") in basis.elements, basis.element_strings()
    oracle = vanishing_ideal_basis(
        [tuple(Fraction(x) for x in t) for t in rel], 2, GRLEX
    )
    assert tuple(basis.elements) == tuple(oracle.elements)
    assert_derivations(basis, derivs, encode_instance(inst, GRLEX))


def t_dual_disc_unsat():
    dom = DomainSpec((0, 1, 2))
    inst = make_instance(
        2, dom,
        [((0,), {(0,)}), ((0, 1), {(1, 1), (2, 2)})],
    )
    basis, derivs = dual_disc_gb(inst)
    assert basis.element_strings() == ["1"], basis.element_strings()
    assert_derivations(basis, derivs, encode_instance(inst, GRLEX))


def t_dual_disc_oracle_random():
    import random

    rng = random.Random(11)
    dom = DomainSpec((0, 1, 2))

    def nabla_close(pts, arity):
        pts = set(pts)
        changed = True
        while changed:
            changed = False
            for a in list(pts):
                for b in list(pts):
                    for c in list(pts):
                        r = tuple(y if y == z else x for x, y, z in zip(a, b, c))
                        if r not in pts:
                            pts.add(r)
                            changed = True
        return pts

    for trial in range(15):
        n = rng.randint(2, 4)
        cons = []
        for _ in range(rng.randint(1, 3)):
            sc = tuple(sorted(rng.sample(range(n), 2)))
            pts = {tuple(rng.randint(0, 2) for _ in range(2))
                   for _ in range(rng.randint(1, 6))}
            cons.append((sc, nabla_close(pts, 2)))
        inst = make_instance(n, dom, cons)
        basis, derivs = dual_disc_gb(inst)
        sols = inst.solutions()
        if not sols:
            assert basis.element_strings() == ["1"], (trial, basis.element_strings())
        else:
            oracle = vanishing_ideal_basis(sols, n, GRLEX)
            assert tuple(basis.elements) == tuple(oracle.elements), (
                trial, basis.element_strings(), [str(g) for g in oracle.elements])
        assert_derivations(basis, derivs, encode_instance(inst, GRLEX))


def t_semilattice_chain():
    dom = DomainSpec((0, 1, 2))
    s = min_semilattice(dom)
    rel = {(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)}  # x >= y
    inst = make_instance(2, dom, [((0, 1), rel)])
    basis, derivs = semilattice_gb(inst, s, 2)
    sols = inst.solutions()
    oracle = vanishing_ideal_basis(sols, 2, GRLEX)
    want = tuple(g for g in oracle.elements if g.degree() <= 2)
    assert tuple(basis.elements) == want, (
        basis.element_strings(), [str(g) for g in want])
    assert_derivations(basis, derivs, encode_instance(inst, GRLEX))


def t_semilattice_unsat():
    dom = DomainSpec((0, 1, 2))
    s = min_semilattice(dom)
    inst = make_instance(
        2, dom,
        [((0,), {(0,)}), ((0, 1), {(1, 0), (1, 1)})],
    )
    basis, derivs = semilattice_gb(inst, s, 2)
    assert basis.element_strings() == ["1"], basis.element_strings()
    assert_derivations(basis, derivs, encode_instance(inst, GRLEX))


def t_semilattice_boolean_matches_min_gb():
    s = min_semilattice(BOOLEAN_DOMAIN)
    inst = make_instance(2, BOOLEAN_DOMAIN, [((0, 1), {(0, 0), (1, 0), (1, 1)})])
    b1, d1 = semilattice_gb(inst, s, 2)
    b2, d2 = min_gb(inst, 2)
    assert tuple(b1.elements) == tuple(b2.elements), (
        b1.element_strings(), b2.element_strings())
    assert_derivations(b1, d1, encode_instance(inst, GRLEX))


def t_refute_horn_unsat():
    # x0; x0 -> x1; not x1 (all Horn: at most one negated literal per clause)
    inst = make_instance(
        2, BOOLEAN_DOMAIN,
        [((0,), {(1,)}), ((0, 1), {(0, 0), (0, 1), (1, 1)}), ((1,), {(0,)})],
    )
    res = sos_csp_refute(inst, 2)
    assert res.refuted, res.verdict
    assert res.details["route"] == "horn"
    assert res.proof.degree() <= max(f.degree() for f in res.axioms)


def t_refute_sat_model():
    inst = make_instance(
        3, BOOLEAN_DOMAIN,
        [((0, 1), {(0, 0), (0, 1), (1, 1)})],
    )
    res = sos_csp_refute(inst, 2)
    assert not res.refuted
    assert res.verdict == "not-refuted-at-degree-2"
    model = res.model
    for con in inst.constraints:
        assert tuple(model[v] for v in con.scope) in con.tuples


def t_refute_flipped():
    # all clauses have at most one positive literal: not x0 or not x1; x0; x1
    inst = make_instance(
        2, BOOLEAN_DOMAIN,
        [((0, 1), {(0, 0), (0, 1), (1, 0)}), ((0,), {(1,)}), ((1,), {(1,)})],
    )
    res = sos_csp_refute(inst, 2)
    assert res.refuted
    assert res.details["route"] == "horn-flipped"
    assert res.proof.degree() <= max(f.degree() for f in res.axioms)


def t_refute_completion():
    # 2-SAT chain with contradictory ends
    cons = [
        ((0, 1), {(0, 1), (1, 0), (1, 1)}),   # x0 or x1
        ((0, 1), {(0, 0), (0, 1), (1, 1)}),   # not x0 or x1  -> x1 forced
        ((0, 1), {(0, 0), (1, 0), (1, 1)}),   # x0 or not x1
        ((0, 1), {(0, 0), (0, 1), (1, 0)}),   # not x0 or not x1
    ]
    inst = make_instance(2, BOOLEAN_DOMAIN, cons)
    res = sos_csp_refute(inst, 2)
    assert res.refuted, res.verdict
    assert res.details["route"] == "completion"


def t_refute_empty():
    inst = make_instance(2, BOOLEAN_DOMAIN, [])
    res = sos_csp_refute(inst, 1)
    assert not res.refuted
    assert res.model == (Fraction(1), Fraction(1))


def t_imp_member():
    inst = make_instance(2, BOOLEAN_DOMAIN, [((0, 1), {(0, 0), (1, 0), (1, 1)})])
    f = P("x0*x1 - x1")
    res = imp_solve(f, inst, 2)
    assert res.member
    assert pc_verify(res.witness).ok
    assert res.witness.derived() == f

    g = P("x0 - x1")
    res2 = imp_solve(g, inst, 2)
    assert not res2.member
    assert res2.witness is None
    assert not res2.remainder.is_zero()

    res3 = imp_solve(Polynomial.zero(GRLEX), inst, 2)
    assert res3.member and res3.witness is None


def t_imp_dual_disc():
    dom = DomainSpec((0, 1, 2))
    inst = make_instance(2, dom, [((0, 1), {(0, 0), (1, 1)})])
    f = P("x0 - x1")
    res = imp_solve(f, inst, 3, strategy="dual-discriminator")
    assert res.member
    assert pc_verify(res.witness).ok
    assert res.witness.derived() == f


def t_imp_generic():
    inst = make_instance(2, BOOLEAN_DOMAIN, [((0, 1), {(0, 1), (1, 0)})])
    f = P("x0 + x1 - 1")
    res = imp_solve(f, inst, 2, strategy="generic")
    assert res.member
    assert pc_verify(res.witness).ok
    assert res.witness.derived() == f


checks = [(k[2:], v) for k, v in sorted(globals().items()) if k.startswith("t_")]
only = sys.argv[1:]
for name, fn in checks:
    if only and not any(s in name for s in only):
        continue
    check(name, fn)
print("all good")
