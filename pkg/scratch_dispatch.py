"""Count scheme-5 / Bezout firings inside dual_disc_gb."""
import itertools
import random
from fractions import Fraction

import polycert.solvers as S
from polycert.csp import make_instance
from polycert.groebner import vanishing_ideal_basis
from polycert.ring import GRLEX
from polycert.pc import pc_verify
calls = {"s5": 0, "bez": 0, "prune_s5": 0}

_real_s5 = S._scheme5_line
_real_bez = S._bezout_cofactors


def spy_s5(*a, **k):
    calls["s5"] += 1
    return _real_s5(*a, **k)


def spy_bez(*a, **k):
    calls["bez"] += 1
    return _real_bez(*a, **k)


S._scheme5_line = spy_s5
S._bezout_cofactors = spy_bez


def solutions(c):
    sols = []
    vals = sorted(c.domain.values)
    for t in itertools.product(vals, repeat=c.n):
        ok = True
        for con in c.constraints:
            if tuple(t[v] for v in con.scope) not in {
                tuple(Fraction(x) for x in tup) for tup in con.tuples
            }:
                ok = False
                break
        if ok:
            sols.append(t)
    return sols


def check(c, tag):
    basis, derivs = S.dual_disc_gb(c, order=GRLEX)
    sols = solutions(c)
    if sols:
        oracle = vanishing_ideal_basis(sols, c.n, GRLEX)
        assert basis.element_strings() == oracle.element_strings(), (
            tag, basis.element_strings(), oracle.element_strings())
    else:
        assert basis.element_strings() == ["1"], tag
    for g, proof in derivs.items():
        assert pc_verify(proof).ok, tag
        assert proof.derived() == g, tag


rng = random.Random(7)
dom = (0, 1, 2, 3)

# permutation seeded before the unary: the stale-pair transport should fire
for trial in range(30):
    perm = list(range(4))
    rng.shuffle(perm)
    sigma_rel = [(a, perm[a]) for a in range(4)]
    a0 = rng.randrange(4)
    c = make_instance(2, dom, [((0, 1), sigma_rel), ((0,), [(a0,)])])
    check(c, f"perm-first-{trial}")
print("perm-first", calls)

# chain: unary reaches the far end through two bijections
before = dict(calls)
for trial in range(30):
    p1 = list(range(4)); rng.shuffle(p1)
    p2 = list(range(4)); rng.shuffle(p2)
    a0 = rng.randrange(4)
    c = make_instance(3, dom, [((0, 1), [(a, p1[a]) for a in range(4)]),
                               ((1, 2), [(a, p2[a]) for a in range(4)]),
                               ((0,), [(a0,)])])
    check(c, f"chain-{trial}")
print("chain", {k: calls[k] - before[k] for k in calls})

# permutation meeting a two-fan with no unary: the prune transport path
before = dict(calls)
for trial in range(30):
    p1 = list(range(4)); rng.shuffle(p1)
    af, bf = rng.randrange(4), rng.randrange(4)
    fan = sorted({(af, y) for y in range(4)} | {(x, bf) for x in range(4)})
    c = make_instance(3, dom, [((0, 1), [(a, p1[a]) for a in range(4)]),
                               ((1, 2), fan)])
    check(c, f"fan-{trial}")
print("fan", {k: calls[k] - before[k] for k in calls})

print("totals", calls)
