"""Acceptance-scale stress for solvers.py, with timings."""

import itertools
import random
import sys
import time
from fractions import Fraction

from polycert.csp import (
    BOOLEAN_DOMAIN,
    DomainSpec,
    make_instance,
    min_semilattice,
    max_semilattice,
    encode_instance,
)
from polycert.groebner import vanishing_ideal_basis
from polycert.pc import pc_verify
from polycert.ring import GRLEX
from polycert.solvers import (
    dual_disc_gb,
    min_gb,
    semilattice_gb,
    sos_csp_refute,
    imp_solve,
)


def close_under(pts, op):
    pts = set(pts)
    changed = True
    while changed:
        changed = False
        for a in list(pts):
            for b in list(pts):
                m = tuple(op(x, y) for x, y in zip(a, b))
                if m not in pts:
                    pts.add(m)
                    changed = True
    return pts


def nabla_close(pts):
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


def oracle_elements(inst, d=None):
    sols = inst.solutions()
    if not sols:
        return ("1",)
    basis = vanishing_ideal_basis(sols, inst.n, GRLEX)
    elems = basis.elements
    if d is not None:
        elems = tuple(g for g in elems if g.degree() <= d)
    return tuple(str(g) for g in elems)


def check_derivs(basis, derivs, axioms):
    assert set(derivs) == set(basis.elements)
    for g, proof in derivs.items():
        assert proof.derived() == g
        assert pc_verify(proof).ok
        assert tuple(proof.axioms) == tuple(axioms)


def stress_min_gb(count=200, seed=3):
    rng = random.Random(seed)
    t0 = time.time()
    maxt = 0.0
    for trial in range(count):
        n = rng.randint(2, 6)
        op = rng.choice((min, max))
        cons = []
        for _ in range(rng.randint(1, 3)):
            k = rng.randint(1, min(3, n))
            sc = tuple(sorted(rng.sample(range(n), k)))
            pts = {tuple(rng.randint(0, 1) for _ in range(k))
                   for _ in range(rng.randint(1, 2 ** k))}
            cons.append((sc, close_under(pts, op)))
        inst = make_instance(n, BOOLEAN_DOMAIN, cons)
        d = rng.choice((2, 3, 4))
        t1 = time.time()
        basis, derivs = min_gb(inst, d)
        maxt = max(maxt, time.time() - t1)
        want = oracle_elements(inst, d)
        if want == ("1",) and inst.solutions():
            pass
        got = tuple(str(g) for g in basis.elements)
        if inst.solutions():
            assert got == want, (trial, got, want)
        else:
            assert got == ("1",), (trial, got)
        check_derivs(basis, derivs, encode_instance(inst, GRLEX))
    print("min_gb x%d: %.1fs total, %.2fs max" % (count, time.time() - t0, maxt))


def stress_semilattice(count=50, seed=5):
    rng = random.Random(seed)
    dom = DomainSpec((0, 1, 2))
    t0 = time.time()
    maxt = 0.0
    maxdeg = 0
    for trial in range(count):
        n = rng.randint(2, 4)
        kind = rng.choice(("meet", "join"))
        s = min_semilattice(dom) if kind == "meet" else max_semilattice(dom)
        op = min if kind == "meet" else max
        cons = []
        for _ in range(rng.randint(1, 2)):
            k = rng.randint(1, 2)
            sc = tuple(sorted(rng.sample(range(n), k)))
            pts = {tuple(rng.randint(0, 2) for _ in range(k))
                   for _ in range(rng.randint(1, 5))}
            cons.append((sc, close_under(pts, op)))
        inst = make_instance(n, dom, cons)
        d = rng.choice((2, 3))
        t1 = time.time()
        basis, derivs = semilattice_gb(inst, s, d)
        maxt = max(maxt, time.time() - t1)
        got = tuple(str(g) for g in basis.elements)
        if inst.solutions():
            want = oracle_elements(inst, d)
            assert got == want, (trial, got, want)
        else:
            assert got == ("1",), (trial, got)
        check_derivs(basis, derivs, encode_instance(inst, GRLEX))
        maxdeg = max(maxdeg, basis.metadata["proof_degree"])
    print("semilattice x%d: %.1fs total, %.2fs max, max proof degree %d"
          % (count, time.time() - t0, maxt, maxdeg))


def stress_dual_disc(count=100, seed=9):
    rng = random.Random(seed)
    dom = DomainSpec((0, 1, 2))
    t0 = time.time()
    maxt = 0.0
    for trial in range(count):
        n = rng.randint(2, 5)
        cons = []
        for _ in range(rng.randint(1, 4)):
            k = rng.choice((1, 2, 2, 3))
            k = min(k, n)
            sc = tuple(sorted(rng.sample(range(n), k)))
            pts = {tuple(rng.randint(0, 2) for _ in range(k))
                   for _ in range(rng.randint(1, 3 ** k))}
            cons.append((sc, nabla_close(pts)))
        inst = make_instance(n, dom, cons)
        t1 = time.time()
        basis, derivs = dual_disc_gb(inst)
        maxt = max(maxt, time.time() - t1)
        got = tuple(str(g) for g in basis.elements)
        want = oracle_elements(inst)
        assert got == want, (trial, got, want)
        check_derivs(basis, derivs, encode_instance(inst, GRLEX))
    print("dual_disc x%d: %.1fs total, %.2fs max" % (count, time.time() - t0, maxt))


def stress_dual_disc_d4(seed=13):
    # |D| = 4 with a bijection whose interpolant difference carries a
    # quadratic factor, so the quadratic elimination fires inside the run.
    dom = DomainSpec((0, 1, 2, 3))
    found = 0
    rng = random.Random(seed)
    t0 = time.time()
    for trial in range(40):
        perm = list(range(4))
        rng.shuffle(perm)
        sigma = {i: perm[i] for i in range(4)}
        a = rng.randint(0, 3)
        inst = make_instance(
            3, dom,
            [((0,), {(a,)}),
             ((0, 1), {(i, sigma[i]) for i in range(4)}),
             ((1, 2), {(0, 0), (0, 1), (1, 0), (2, 0), (3, 0)})],
        )
        basis, derivs = dual_disc_gb(inst)
        got = tuple(str(g) for g in basis.elements)
        want = oracle_elements(inst)
        assert got == want, (trial, got, want)
        check_derivs(basis, derivs, encode_instance(inst, GRLEX))
        found += 1
    print("dual_disc |D|=4 x%d ok (%.1fs)" % (found, time.time() - t0))


def stress_refute(count=50, seed=17):
    rng = random.Random(seed)
    t0 = time.time()
    maxt = 0.0
    n_unsat = 0
    for trial in range(count):
        n = rng.randint(3, 12)
        mode = rng.choice(("horn", "2sat"))
        cons = []
        m = rng.randint(n, 3 * n)
        for _ in range(m):
            if mode == "horn":
                k = rng.randint(1, 3)
                sc = tuple(sorted(rng.sample(range(n), k)))
                neg = rng.randint(0, k - 1) if rng.random() < 0.8 else None
                # clause: exactly one positive literal (at index neg) optional
                forbidden = tuple(
                    0 if i == neg else 1 for i in range(k)
                )
                tuples = {t for t in itertools.product((0, 1), repeat=k)
                          if t != forbidden}
            else:
                k = 2 if n >= 2 else 1
                sc = tuple(sorted(rng.sample(range(n), k)))
                forbidden = tuple(rng.randint(0, 1) for _ in range(k))
                tuples = {t for t in itertools.product((0, 1), repeat=k)
                          if t != forbidden}
            cons.append((sc, tuples))
        inst = make_instance(n, BOOLEAN_DOMAIN, cons)
        truth = bool(inst.solutions())
        t1 = time.time()
        res = sos_csp_refute(inst, 3)
        maxt = max(maxt, time.time() - t1)
        if truth:
            assert not res.refuted, trial
            model = res.model
            if model is not None:
                for con in inst.constraints:
                    assert tuple(model[v] for v in con.scope) in con.tuples
        else:
            n_unsat += 1
            assert res.refuted, (trial, mode, res.verdict)
            if res.details["route"].startswith("horn"):
                assert res.proof.degree() <= max(f.degree() for f in res.axioms)
    print("refute x%d (%d unsat): %.1fs total, %.2fs max"
          % (count, n_unsat, time.time() - t0, maxt))


which = sys.argv[1:] or ["min", "semi", "dd", "d4", "refute"]
if "min" in which:
    stress_min_gb()
if "semi" in which:
    stress_semilattice()
if "dd" in which:
    stress_dual_disc()
if "d4" in which:
    stress_dual_disc_d4()
if "refute" in which:
    stress_refute()
print("stress done")
