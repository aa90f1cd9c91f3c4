"""Structure-aware basis computation for closed constraint languages.

Two engines compute reduced Groebner bases with an attached PC derivation per
element: a semilattice route that works through a Boolean encoding of the
domain, and a dual-discriminator route that normalizes an instance to
two-variable constraints and splits it into permutation blocks, two-fan
products, and partial domain polynomials.  A refutation front end and an
ideal-membership front end sit on top.  Derivations are built inside one
shared PcBuilder per call, so every returned proof replays against the
published axiom list of the instance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Callable, Iterable, Mapping, Sequence

from .csp import (
    BOOLEAN_DOMAIN,
    CspInstance,
    SemilatticeStructure,
    bit_extractors,
    booleanize_instance,
    constraint_polynomial,
    decoder_polynomial,
    domain_polynomial,
    encode_instance,
    lagrange_interpolate,
    max_semilattice,
    min_semilattice,
    semilattice_encoding,
)
from .groebner import (
    DegreeOutOfRangeError,
    TruncatedBasis,
    interreduce,
    make_basis,
    monomials_of_degree,
)
from .pc import (
    AXIOM,
    DOMAIN_AXIOM,
    LINEAR_COMBINATION,
    VARIABLE_MULTIPLICATION,
    PcBuilder,
    PcProof,
    _interreduce_tracked,
    _monic_line,
    encode_clause,
    horn_refute,
    pc_buchberger,
)
from .ring import (
    GRLEX,
    Monomial,
    MonomialOrder,
    Polynomial,
    _sort_key,
    divide,
    leading_term,
    poly_from_coeffs,
    s_polynomial,
    univariate_coeffs,
)
from .sos import SosCertificate, pc_to_sos_square, proof_axiom_system, sos_verify


class ClosureError(ValueError):
    """A relation is not closed under the operation a strategy requires."""

    def __init__(self, operation: str, constraint_index: int | None, witness: tuple):
        where = "" if constraint_index is None else " on constraint %d" % constraint_index
        super().__init__("%s closure fails%s: witness %s" % (operation, where, (witness,)))
        self.operation = operation
        self.constraint_index = constraint_index
        self.witness = witness


class DerivationError(RuntimeError):
    """A derivation scheme was fed inputs outside the shape it handles."""


class _Unsat(Exception):
    """Internal signal: a local completion produced the constant 1."""

    def __init__(self, line: int):
        self.line = line


# -- small polynomial helpers ---------------------------------------------------


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _mono_poly(vars_: Iterable[int], order: MonomialOrder) -> Polynomial:
    p = Polynomial.constant(1, order)
    for v in vars_:
        p = p * Polynomial.variable(v, order)
    return p


def _neg_poly(vars_: Iterable[int], order: MonomialOrder) -> Polynomial:
    one = Polynomial.constant(1, order)
    p = Polynomial.constant(1, order)
    for v in vars_:
        p = p * (Polynomial.variable(v, order) - one)
    return p


def _roots_poly(var: int, roots: Iterable, order: MonomialOrder) -> Polynomial:
    p = Polynomial.constant(1, order)
    x = Polynomial.variable(var, order)
    for a in sorted(_frac(a) for a in roots):
        p = p * (x - Polynomial.constant(a, order))
    return p


def _point_for(scope: Sequence[int], values: Sequence) -> list[Fraction]:
    point = [Fraction(0)] * (max(scope) + 1 if scope else 0)
    for v, a in zip(scope, values):
        point[v] = _frac(a)
    return point


# -- two-term shapes -------------------------------------------------------------


POSITIVE = "positive"
NEGATIVE = "negative"
BOOLEAN_AXIOM = "boolean-axiom"


@dataclass(frozen=True)
class TwoTermPolynomial:
    """A basis element matched against the signed product shapes.

    sign_class "positive" means a sum of at most two signed multilinear
    monomials, "negative" a sum of at most two signed products of (x_v - 1)
    factors, and "boolean-axiom" exactly +/-(x_v^2 - x_v).  terms holds the
    one or two signed products, summing to the classified polynomial.
    """

    sign_class: str
    terms: tuple[Polynomial, ...]


def _multilinear_unit(m: Monomial, c: Fraction) -> bool:
    return c in (1, -1) and all(e <= 1 for e in m.exps)


def classify_two_term(f: Polynomial) -> TwoTermPolynomial:
    """Match f against the two-term shapes; raises ValueError when none fits."""
    if f.is_zero():
        raise ValueError("zero polynomial has no 2-term shape")
    order = f.order
    vs = f.variables()
    if len(vs) == 1:
        x = Polynomial.variable(vs[0], order)
        sq = x * x - x
        if f == sq or f == -sq:
            return TwoTermPolynomial(BOOLEAN_AXIOM, (f,))
    terms = f.sorted_terms()
    if len(terms) <= 2 and all(_multilinear_unit(m, c) for m, c in terms):
        return TwoTermPolynomial(
            POSITIVE, tuple(Polynomial.term(c, m, order) for m, c in terms)
        )
    m, c = leading_term(f)
    if _multilinear_unit(m, c):
        first = _neg_poly(m.variables(), order) * c
        rest = f - first
        if rest.is_zero():
            return TwoTermPolynomial(NEGATIVE, (first,))
        m2, c2 = leading_term(rest)
        if _multilinear_unit(m2, c2):
            second = _neg_poly(m2.variables(), order) * c2
            if rest == second:
                return TwoTermPolynomial(NEGATIVE, (first, second))
    raise ValueError("not a 2-term polynomial: %s" % f)


# -- tracked local completion -----------------------------------------------------


def _local_gb(
    builder: PcBuilder,
    items: Sequence[tuple[Polynomial, int]],
    working: int,
    order: MonomialOrder,
) -> list[tuple[Polynomial, int]]:
    """Full reduced basis of the ideal the items generate, with tracked lines.

    Same pair selection as the truncated completion.  The completion runs
    untracked first; only the reductions that produced new basis elements
    are then replayed through the builder, so dead-end pairs cost no proof
    lines.  If an S-pair overflows the working degree the whole loop is
    restarted with the bound doubled, so the returned basis is never cut
    short by the degree cap.
    """
    key = _sort_key(order)
    items = [(f, l) for f, l in items if not f.is_zero()]
    if not items:
        return []
    while True:
        basis1: list[Polynomial] = []
        seen: set[Polynomial] = set()
        for f, _ in items:
            g = f.monic()
            if g not in seen:
                seen.add(g)
                basis1.append(g)
        pairs = {(i, j) for j in range(len(basis1)) for i in range(j)}
        events: list[tuple[int, int]] = []
        overflow = False

        def pair_rank(p):
            i, j = p
            l = basis1[i].leading_monomial().lcm(basis1[j].leading_monomial())
            return (l.deg, key(l), i, j)

        while pairs:
            i, j = min(pairs, key=pair_rank)
            pairs.discard((i, j))
            fi, fj = basis1[i], basis1[j]
            lmi = fi.leading_monomial()
            lmj = fj.leading_monomial()
            l = lmi.lcm(lmj)
            if l.deg > working:
                overflow = True
                continue
            if lmi.mul(lmj) == l:
                continue
            s = s_polynomial(fi, fj)
            if s.is_zero():
                continue
            r = divide(s, basis1)[1]
            if r.is_zero():
                continue
            basis1.append(r.monic())
            events.append((i, j))
            k = len(basis1) - 1
            pairs.update((i2, k) for i2 in range(k))
        if not overflow:
            break
        working *= 2
        if working > 512:
            raise RuntimeError("local completion does not stabilize")

    basis: list[tuple[Polynomial, int]] = []
    seen2: set[Polynomial] = set()
    for f, l in items:
        g, gl = _monic_line(builder, f, l)
        if g not in seen2:
            seen2.add(g)
            basis.append((g, gl))
    for i, j in events:
        fi, li = basis[i]
        fj, lj = basis[j]
        s_line = builder.s_poly_line(fi, li, fj, lj)
        r, r_line = builder.reduce_line(s_line, basis)
        basis.append(_monic_line(builder, r, r_line))
    if [f for f, _ in basis] != basis1:
        raise RuntimeError("tracked replay diverged from the completion")
    return _interreduce_tracked(builder, basis, order)


def _derive_member(
    builder: PcBuilder, f: Polynomial, items: Sequence[tuple[Polynomial, int]]
) -> int:
    """Division-backed membership line; f must reduce to zero against items."""
    if f.is_zero():
        raise DerivationError("cannot derive the zero polynomial")
    qs, r = divide(f, [g for g, _ in items])
    if not r.is_zero():
        raise DerivationError("expected zero remainder, got %s" % r)
    parts = [(l, q) for (g, l), q in zip(items, qs) if not q.is_zero()]
    line = builder.nsatz_line(parts)
    if builder.line(line) != f:
        raise DerivationError("membership derivation mismatch")
    return line


def _constant_line(items: Sequence[tuple[Polynomial, int]]) -> int | None:
    for f, l in items:
        if not f.is_zero() and f.degree() == 0:
            return l
    return None


# -- Horn machinery over Boolean relations ---------------------------------------


@dataclass(frozen=True)
class _Record:
    """One Boolean relation with the axiom lines that generate its ideal."""

    scope: tuple[int, ...]
    tuples: frozenset[tuple[int, ...]]
    group: tuple[int, ...]
    source: int


def _closure_witness(tuples: frozenset, op: Callable) -> tuple | None:
    tl = sorted(tuples)
    for t1 in tl:
        for t2 in tl:
            res = tuple(op(a, b) for a, b in zip(t1, t2))
            if res not in tuples:
                return (t1, t2, res)
    return None


def _horn_clauses(
    scope: tuple[int, ...], tuples: frozenset, av: int
) -> list[tuple[frozenset, int | None]]:
    """Implication clauses (body, head) whose models over the scope are exactly
    the given tuples; bodies and heads use the propagated value av."""
    k = len(scope)

    def violated(t, body, head):
        if any(t[p] != av for p in body):
            return False
        return head is None or t[head] == 1 - av

    kept: list[tuple[frozenset, int | None]] = []
    for size in range(k + 1):
        for body in itertools.combinations(range(k), size):
            bset = frozenset(body)
            for head in [None] + [p for p in range(k) if p not in bset]:
                if any(
                    b2 <= bset and (h2 is None or h2 == head) for b2, h2 in kept
                ):
                    continue
                if any(violated(t, bset, head) for t in tuples):
                    continue
                kept.append((bset, head))
    for t in itertools.product((0, 1), repeat=k):
        sat = all(not violated(t, b, h) for b, h in kept)
        if sat != (t in tuples):
            raise RuntimeError("relation is not definable by these clauses")
    return [
        (frozenset(scope[p] for p in body), None if head is None else scope[head])
        for body, head in kept
    ]


def _clause_poly(body: frozenset, head: int | None, av: int, order: MonomialOrder) -> Polynomial:
    if av == 1:
        p = _mono_poly(sorted(body), order)
        if head is not None:
            p = p * (Polynomial.variable(head, order) - Polynomial.constant(1, order))
    else:
        p = _neg_poly(sorted(body), order)
        if head is not None:
            p = p * Polynomial.variable(head, order)
    return p


class _HornEngine:
    """Unit propagation over (body, head) implications with a replayable log."""

    def __init__(self, clauses: Sequence[tuple[frozenset, int | None, int]]):
        self.clauses = list(clauses)
        self._memo: dict[tuple, tuple[bool, frozenset]] = {}

    def replay(self, seeds: frozenset, banned: int | None) -> list[tuple]:
        events: list[tuple] = []
        forced = set(seeds)
        if banned is not None and banned in forced:
            return [("banned-seed",)]
        changed = True
        while changed:
            changed = False
            for cidx, (body, head, _) in enumerate(self.clauses):
                if not body <= forced:
                    continue
                if head is None:
                    events.append(("conflict", cidx))
                    return events
                if head in forced:
                    continue
                forced.add(head)
                if head == banned:
                    events.append(("banned", cidx))
                    return events
                events.append(("fire", cidx, head))
                changed = True
        events.append(("sat", frozenset(forced)))
        return events

    def propagate(self, seeds: frozenset, banned: int | None) -> tuple[bool, frozenset]:
        key = (seeds, banned)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        events = self.replay(seeds, banned)
        if events and events[-1][0] == "sat":
            out = (False, events[-1][1])
        else:
            forced = set(seeds) | {e[2] for e in events if e[0] == "fire"}
            out = (True, frozenset(forced))
        self._memo[key] = out
        return out


class _ClauseBank:
    """Lazy per-relation local bases and clause-polynomial derivation lines."""

    def __init__(
        self,
        builder: PcBuilder,
        records: Sequence[_Record],
        clauses: Sequence[tuple[frozenset, int | None, int]],
        av: int,
        order: MonomialOrder,
    ):
        self.builder = builder
        self.records = records
        self.clauses = clauses
        self.av = av
        self.order = order
        self._local: dict[int, list[tuple[Polynomial, int]]] = {}
        self._lines: dict[int, int] = {}

    def _local_items(self, ridx: int) -> list[tuple[Polynomial, int]]:
        cached = self._local.get(ridx)
        if cached is not None:
            return cached
        rec = self.records[ridx]
        # bit axioms first so every reduction collapses to multilinear early
        items = [
            (domain_polynomial(BOOLEAN_DOMAIN, v, self.order), self.builder.domain_axiom(v))
            for v in rec.scope
        ]
        items += [(self.builder.axioms[a], self.builder.axiom(a)) for a in rec.group]
        gb = _local_gb(self.builder, items, len(rec.scope) + 2, self.order)
        for t in itertools.product((0, 1), repeat=len(rec.scope)):
            point = _point_for(rec.scope, t)
            vanish = all(g.evaluate(point) == 0 for g, _ in gb)
            if vanish != (t in rec.tuples):
                raise RuntimeError("local basis disagrees with the relation")
        self._local[ridx] = gb
        return gb

    def clause_line(self, cidx: int) -> int:
        cached = self._lines.get(cidx)
        if cached is not None:
            return cached
        body, head, ridx = self.clauses[cidx]
        poly = _clause_poly(body, head, self.av, self.order)
        line = _derive_member(self.builder, poly, self._local_items(ridx))
        self._lines[cidx] = line
        return line


def _derive_fired(
    builder: PcBuilder,
    engine: _HornEngine,
    clause_line: Callable[[int], int],
    seeds: tuple[int, ...],
    banned: int | None,
    av: int,
    order: MonomialOrder,
) -> int:
    """Line deriving the seed product (times the banned-literal factor) by
    multiplying a propagation-to-conflict replay through that factor."""
    one = Polynomial.constant(1, order)
    lit = _mono_poly if av == 1 else _neg_poly
    opp = _neg_poly if av == 1 else _mono_poly
    base = lit(sorted(seeds), order)
    bfac = opp([banned], order) if banned is not None else one
    h = base * bfac

    # known[v]: line deriving h times the falsified literal of v
    known: dict[int, int] = {}
    for v in sorted(seeds):
        rest = lit(sorted(set(seeds) - {v}), order) * bfac
        known[v] = builder.mul_poly(builder.domain_axiom(v), rest)

    def settle(cidx: int) -> tuple[int, int, int | None]:
        body, head, _ = engine.clauses[cidx]
        cur = builder.mul_poly(clause_line(cidx), h)
        sign = 1
        bl = sorted(body)
        for pos, v in enumerate(bl):
            rest = lit(bl[pos + 1 :], order)
            if head is not None:
                rest = rest * opp([head], order)
            sub = builder.mul_poly(known[v], rest)
            cur = builder.lin(cur, sub, 1, -sign)
            if av == 0:
                sign = -sign
        return cur, sign, head

    for ev in engine.replay(frozenset(seeds), banned):
        kind = ev[0]
        if kind == "fire":
            cur, sign, head = settle(ev[1])
            known[head] = builder.scale(cur, sign) if sign != 1 else cur
        elif kind == "conflict":
            cur, sign, _ = settle(ev[1])
            line = builder.scale(cur, sign) if sign != 1 else cur
            break
        elif kind == "banned":
            cur, sign, head = settle(ev[1])
            hit = builder.scale(cur, sign) if sign != 1 else cur
            other = builder.mul_poly(builder.domain_axiom(banned), base)
            if av == 1:
                line = builder.lin(other, hit, 1, -1)
            else:
                line = builder.lin(hit, other, 1, -1)
            break
        else:
            raise RuntimeError("propagation did not reach a conflict")
    if builder.line(line) != h:
        raise RuntimeError("multiplied-through replay missed its target")
    return line


def _minva_element(
    builder: PcBuilder,
    engine: _HornEngine,
    clause_line: Callable[[int], int],
    sa: tuple[int, ...],
    sb: tuple[int, ...],
    av: int,
    order: MonomialOrder,
) -> tuple[Polynomial, int]:
    """Two-term element with leading set sa and tail set sb, derived from the
    minimal non-vanishing queries and combined by the telescoping identity."""
    qs = sorted(set(sb) - set(sa))
    ps = sorted(set(sa) - set(sb))
    parts: list[tuple[int, Polynomial]] = []
    if av == 1:
        f = _mono_poly(sorted(sa), order) - _mono_poly(sorted(sb), order)
        for k, j in enumerate(qs):
            hline = _derive_fired(builder, engine, clause_line, sa, j, av, order)
            parts.append((hline, -_mono_poly(qs[k + 1 :], order)))
        for k, i in enumerate(ps):
            gline = _derive_fired(builder, engine, clause_line, sb, i, av, order)
            parts.append((gline, _mono_poly(ps[k + 1 :], order)))
    else:
        a, b = len(qs), len(ps)
        alpha = Fraction((-1) ** (a + b + 1))
        f = _neg_poly(sorted(sa), order) + _neg_poly(sorted(sb), order) * alpha
        for k, j in enumerate(qs):
            hline = _derive_fired(builder, engine, clause_line, sa, j, av, order)
            coeff = Fraction((-1) ** k)
            parts.append((hline, _neg_poly(qs[:k], order) * coeff))
        for k, i in enumerate(ps):
            gline = _derive_fired(builder, engine, clause_line, sb, i, av, order)
            coeff = Fraction((-1) ** (a + b + k + 1))
            parts.append((gline, _neg_poly(ps[:k], order) * coeff))
    line = builder.nsatz_line(parts)
    if builder.line(line) != f:
        raise RuntimeError("telescoping combination missed the element")
    return f, line


def _min_gb_core(
    builder: PcBuilder,
    records: Sequence[_Record],
    n_vars: int,
    d: int,
    av: int,
    order: MonomialOrder,
) -> list[tuple[Polynomial, int]]:
    label = "min" if av == 1 else "max"
    op = min if av == 1 else max
    for rec in records:
        w = _closure_witness(rec.tuples, op)
        if w is not None:
            raise ClosureError(label, rec.source, w)

    clauses: list[tuple[frozenset, int | None, int]] = []
    for ridx, rec in enumerate(records):
        for body, head in _horn_clauses(rec.scope, rec.tuples, av):
            clauses.append((body, head, ridx))
    engine = _HornEngine(clauses)
    bank = _ClauseBank(builder, records, clauses, av, order)

    conflict0, _ = engine.propagate(frozenset(), None)
    if conflict0:
        line = _derive_fired(builder, engine, bank.clause_line, (), None, av, order)
        return [(Polynomial.constant(1, order), line)]

    subsets: list[tuple[int, ...]] = []
    key = _sort_key(order)
    for size in range(1, min(d, n_vars) + 1):
        layer = list(itertools.combinations(range(n_vars), size))
        layer.sort(
            key=lambda s: key(Monomial(tuple(1 if v in s else 0 for v in range(n_vars))))
        )
        subsets.extend(layer)

    found: list[frozenset] = []
    reps: dict[frozenset, tuple[int, ...]] = {}
    _, f_empty = engine.propagate(frozenset(), None)
    reps[f_empty] = ()
    items: list[tuple[Polynomial, int]] = []
    for s in subsets:
        sset = frozenset(s)
        if any(lm <= sset for lm in found):
            continue
        conflict, fp = engine.propagate(sset, None)
        if conflict:
            poly = _mono_poly(s, order) if av == 1 else _neg_poly(s, order)
            line = _derive_fired(builder, engine, bank.clause_line, s, None, av, order)
            items.append((poly, line))
            found.append(sset)
            continue
        rep = reps.get(fp)
        if rep is None:
            reps[fp] = s
            continue
        items.append(_minva_element(builder, engine, bank.clause_line, s, rep, av, order))
        found.append(sset)

    if d >= 2:
        for v in range(n_vars):
            if not any(lm <= {v} for lm in found):
                items.append(
                    (domain_polynomial(BOOLEAN_DOMAIN, v, order), builder.domain_axiom(v))
                )

    items.sort(key=lambda t: (key(t[0].leading_monomial()), str(t[0])))
    if tuple(f for f, _ in items) != interreduce([f for f, _ in items], order):
        raise RuntimeError("emitted basis is not inter-reduced")
    return items


def _records_from_instance(inst: CspInstance) -> list[_Record]:
    records = []
    pos = 0
    for k, con in enumerate(inst.constraints):
        f = constraint_polynomial(inst.domain, con.scope, con.tuples, GRLEX)
        group: tuple[int, ...] = ()
        if not f.is_zero():
            group = (pos,)
            pos += 1
        tuples = frozenset(tuple(int(a) for a in t) for t in con.tuples)
        records.append(_Record(con.scope, tuples, group, k))
    return records


def _records_from_polys(axioms: Sequence[Polynomial]) -> list[_Record]:
    records = []
    for idx, f in enumerate(axioms):
        if f.is_zero():
            continue
        scope = f.variables()
        if len(scope) > 16:
            raise ValueError("axiom %d has too many variables to relationalize" % idx)
        tuples = set()
        for t in itertools.product((0, 1), repeat=len(scope)):
            if f.evaluate(_point_for(scope, t)) == 0:
                tuples.add(t)
        records.append(_Record(scope, frozenset(tuples), (idx,), idx))
    return records


def min_gb(
    system,
    d: int,
    polarity: str | None = None,
    n_vars: int | None = None,
    order: MonomialOrder = GRLEX,
) -> tuple[TruncatedBasis, dict[Polynomial, PcProof]]:
    """Reduced d-truncated basis of a Min- or Max-closed Boolean system.

    system is either a Boolean CspInstance or a sequence of polynomials whose
    Boolean zero sets are closed under componentwise min (polarity "min") or
    max ("max"); with polarity None the min orientation is tried first.  Every
    emitted element is a two-term polynomial or a Boolean domain polynomial
    and carries a PC derivation from the published axioms.
    """
    if d < 0:
        raise ValueError("negative truncation degree")
    if isinstance(system, CspInstance):
        if system.domain != BOOLEAN_DOMAIN:
            raise ValueError("min_gb expects a Boolean-domain system")
        axioms = encode_instance(system, order)
        records = _records_from_instance(system)
        n = system.n if n_vars is None else n_vars
    else:
        axioms = list(system)
        records = _records_from_polys(axioms)
        top = max((max(r.scope) for r in records if r.scope), default=-1)
        n = top + 1 if n_vars is None else n_vars

    def violation(av):
        op = min if av == 1 else max
        for rec in records:
            w = _closure_witness(rec.tuples, op)
            if w is not None:
                return rec.source, w
        return None

    if polarity is None:
        for cand in ("min", "max"):
            if violation(1 if cand == "min" else 0) is None:
                polarity = cand
                break
        else:
            src, w = violation(1)
            raise ClosureError("min and max", src, w)
    if polarity not in ("min", "max"):
        raise ValueError("polarity must be 'min' or 'max'")
    av = 1 if polarity == "min" else 0

    builder = PcBuilder(tuple(axioms), domain=BOOLEAN_DOMAIN, order=order)
    items = _min_gb_core(builder, records, n, d, av, order)
    basis = make_basis([f for f, _ in items], d, order, True, {"polarity": polarity})
    derivations = {f: builder.extract([l])[0] for f, l in items}
    return basis, derivations


# -- semilattice strategy over general domains ------------------------------------


def _transport_boolean_proof(
    target: PcBuilder,
    steps: Sequence[PcStep],
    want: int,
    tmap: dict[int, int],
    n_cpolys: int,
    n_orig: int,
    width: int,
    qx: Sequence[Sequence[Polynomial]],
    gate_quots: Sequence[Polynomial],
    bit_quots: Sequence[Sequence[Polynomial]],
    dpolys: Sequence[Polynomial],
) -> int:
    """Replay one Boolean-side proof line over the original-domain axioms.

    Constraint axioms map to the matching original axiom, gate and bit
    axioms to domain-polynomial multiples, and bit multiplications to
    extractor-polynomial multiplications; linear steps carry over verbatim.
    Every translated line is normalised modulo the domain ideal to keep
    degrees bounded, so the result line agrees with the substituted source
    line modulo that ideal.  tmap memoises source-line to target-line
    translations so shared history is replayed once across calls.
    """

    def nf(s: int) -> int:
        qs, r = divide(target.line(s), dpolys)
        parts = [(target.domain_axiom(i), q) for i, q in enumerate(qs) if not q.is_zero()]
        if not parts:
            return s
        return target.lin(s, target.nsatz_line(parts), 1, -1)

    stack = [want]
    while stack:
        k = stack[-1]
        if k in tmap:
            stack.pop()
            continue
        st = steps[k]
        if st.kind in (LINEAR_COMBINATION, VARIABLE_MULTIPLICATION):
            pending = [r for r in st.refs if r not in tmap]
            if pending:
                stack.extend(pending)
                continue
        stack.pop()
        if st.kind == AXIOM:
            a = st.refs[0]
            if a < n_cpolys:
                s = target.axiom(a)
            elif a < n_cpolys + n_orig:
                i = a - n_cpolys
                s = target.mul_poly(target.domain_axiom(i), gate_quots[i])
            else:
                bit = a - n_cpolys - n_orig
                i, j = divmod(bit, width)
                s = target.mul_poly(target.domain_axiom(i), bit_quots[i][j])
        elif st.kind == DOMAIN_AXIOM:
            i, j = divmod(st.var, width)
            s = target.mul_poly(target.domain_axiom(i), bit_quots[i][j])
        elif st.kind == LINEAR_COMBINATION:
            s = target.lin(tmap[st.refs[0]], tmap[st.refs[1]], *st.scalars)
        elif st.kind == VARIABLE_MULTIPLICATION:
            i, j = divmod(st.var, width)
            s = target.mul_poly(tmap[st.refs[0]], qx[i][j])
        else:
            raise RuntimeError("unknown step kind %r" % st.kind)
        tmap[k] = nf(s)
    return tmap[want]


def semilattice_gb(
    c: CspInstance,
    s: SemilatticeStructure,
    d: int,
    order: MonomialOrder = GRLEX,
) -> tuple[TruncatedBasis, dict[Polynomial, PcProof]]:
    """Reduced d-truncated basis of a semilattice-closed instance.

    The instance is encoded over Boolean bit variables, the Boolean basis is
    computed by min_gb's core at degree (|D|-1)*d, and the original-domain
    basis is read off by normal-form linear algebra over the Boolean side.
    Each element's Boolean derivation is transported back step by step onto
    the original axioms.
    """
    if s.domain != c.domain:
        raise ValueError("structure domain does not match the instance domain")
    if d < 0:
        raise ValueError("negative truncation degree")
    for k, con in enumerate(c.constraints):
        w = _closure_witness(con.tuples, s.apply)
        if w is not None:
            raise ClosureError("semilattice", k, w)

    enc = semilattice_encoding(s)
    bi = booleanize_instance(c, enc, order)
    u = enc.width
    av = 1 if s.kind == "meet" else 0
    d01 = max(u * d, 1)

    cpidx: list[int | None] = []
    pos = 0
    for con in c.constraints:
        f = constraint_polynomial(c.domain, con.scope, con.tuples, order)
        if f.is_zero():
            cpidx.append(None)
        else:
            cpidx.append(pos)
            pos += 1
    n_cpolys = len(bi.constraint_polys)
    if pos != n_cpolys:
        raise RuntimeError("constraint polynomial alignment drifted")

    records: list[_Record] = []
    for k, con in enumerate(bi.instance.constraints):
        tuples = frozenset(tuple(int(a) for a in t) for t in con.tuples)
        if k < len(c.constraints):
            group = [] if cpidx[k] is None else [cpidx[k]]
            group += [n_cpolys + v for v in c.constraints[k].scope]
        else:
            group = [n_cpolys + (k - len(c.constraints))]
        records.append(_Record(con.scope, tuples, tuple(group), k))

    builder01 = PcBuilder(tuple(bi.all_polynomials()), domain=BOOLEAN_DOMAIN, order=order)
    items01 = _min_gb_core(builder01, records, bi.instance.n, d01, av, order)
    div01 = [f for f, _ in items01]

    axioms = encode_instance(c, order)
    target = PcBuilder(tuple(axioms), domain=c.domain, order=order)
    extractors = bit_extractors(enc, 0, order)
    qx = [
        [extractors[j].substitute({0: Polynomial.variable(i, order)}) for j in range(u)]
        for i in range(c.n)
    ]
    decoders = {i: decoder_polynomial(enc, bi.varmap[i], order) for i in range(c.n)}
    dpolys = [domain_polynomial(c.domain, i, order) for i in range(c.n)]

    def _domain_quotient(i: int, poly01: Polynomial) -> Polynomial:
        sub = poly01.substitute({b: qx[i][j] for j, b in enumerate(bi.varmap[i])})
        qs, r = divide(sub, [dpolys[i]])
        if not r.is_zero():
            raise RuntimeError("transport quotient has a remainder")
        return qs[0]

    gate_quots = [_domain_quotient(i, bi.gate_polys[i]) for i in range(c.n)]
    bit_quots = [
        [divide(qx[i][j] * qx[i][j] - qx[i][j], [dpolys[i]])[0][0] for j in range(u)]
        for i in range(c.n)
    ]

    tmap: dict[int, int] = {}

    def transport(g: Polynomial) -> int:
        g01 = g.substitute(decoders)
        qs, r = divide(g01, div01)
        if not r.is_zero():
            raise RuntimeError("pulled-back element does not reduce to zero")
        parts = [(l, q) for (f, l), q in zip(items01, qs) if not q.is_zero()]
        line01 = builder01.nsatz_line(parts)
        s_line = _transport_boolean_proof(
            target, builder01.steps, line01, tmap, n_cpolys, c.n, u,
            qx, gate_quots, bit_quots, dpolys,
        )
        delta = target.line(s_line) - g
        if delta.is_zero():
            out = s_line
        else:
            dq, dr = divide(delta, dpolys)
            if not dr.is_zero():
                raise RuntimeError("transport residue escapes the domain ideal")
            fix = target.nsatz_line(
                [(target.domain_axiom(i), q) for i, q in enumerate(dq) if not q.is_zero()]
            )
            out = target.lin(s_line, fix, 1, -1)
        if target.line(out) != g:
            raise RuntimeError("transported derivation misses the element")
        return out

    # normal-form sweep: emit a reduced element per dependent monomial
    key = _sort_key(order)
    rows: list[dict] = []  # each: lead monomial, vec, combo (original-domain poly)
    emitted: list[tuple[Polynomial, int]] = []
    found: list[Monomial] = []
    for size in range(d + 1):
        for mu in monomials_of_degree(c.n, size):
            if any(lm.divides(mu) for lm in found):
                continue
            mu_poly = Polynomial.term(1, mu, order)
            nf = divide(mu_poly.substitute(decoders), div01)[1]
            vec = dict(nf.terms)
            combo = mu_poly
            for row in rows:
                coeff = vec.pop(row["lead"], None)
                if coeff is None:
                    continue
                for m2, c2 in row["vec"].items():
                    new = vec.get(m2, Fraction(0)) - coeff * c2
                    if new == 0:
                        vec.pop(m2, None)
                    else:
                        vec[m2] = new
                combo = combo - row["combo"] * coeff
            if not vec:
                g = combo
                emitted.append((g, transport(g)))
                found.append(mu)
                if g.degree() == 0:
                    break
                continue
            lead = max(vec, key=key)
            lc = vec.pop(lead)
            vec = {m2: c2 / lc for m2, c2 in vec.items()}
            combo = combo * (Fraction(1) / lc)
            for row in rows:
                coeff = row["vec"].pop(lead, None)
                if coeff is None:
                    continue
                for m2, c2 in vec.items():
                    new = row["vec"].get(m2, Fraction(0)) - coeff * c2
                    if new == 0:
                        row["vec"].pop(m2, None)
                    else:
                        row["vec"][m2] = new
                row["combo"] = row["combo"] - combo * coeff
            rows.append({"lead": lead, "vec": vec, "combo": combo})
        if emitted and emitted[-1][0].degree() == 0:
            break

    max_proof_degree = 0
    derivations = {}
    for g, line in emitted:
        proof = target.extract([line])[0]
        derivations[g] = proof
        max_proof_degree = max(max_proof_degree, proof.degree())
    basis = make_basis(
        [g for g, _ in emitted],
        d,
        order,
        True,
        {
            "strategy": "semilattice",
            "kind": s.kind,
            "boolean_degree": d01,
            "proof_degree": max_proof_degree,
            "degree_budget": d * c.domain.size,
        },
    )
    return basis, derivations


# -- derivation schemes ------------------------------------------------------------


def _scheme1_line(builder: PcBuilder, f_line: int, g_line: int, alpha, beta) -> int:
    alpha, beta = _frac(alpha), _frac(beta)
    if alpha == beta:
        raise DerivationError("scheme 1 needs distinct shift points")
    c = Fraction(1) / (beta - alpha)
    return builder.lin(f_line, g_line, c, -c)


def _scheme2_line(
    builder: PcBuilder,
    var: int,
    f_roots: frozenset,
    f_line: int,
    g_roots: frozenset,
    g_line: int,
    cofactor: Polynomial,
) -> int:
    """Line deriving cofactor times the product over the common roots."""
    order = builder.order
    if builder.line(f_line) != cofactor * _roots_poly(var, f_roots, order):
        raise DerivationError("scheme 2 input does not match its stated roots")
    if builder.line(g_line) != cofactor * _roots_poly(var, g_roots, order):
        raise DerivationError("scheme 2 input does not match its stated roots")
    return _scheme2_rec(builder, var, f_roots, f_line, g_roots, g_line, cofactor)


def _scheme2_rec(builder, var, f_roots, f_line, g_roots, g_line, cofactor) -> int:
    order = builder.order
    if g_roots <= f_roots:
        return g_line
    if f_roots <= g_roots:
        return f_line
    alpha = min(f_roots - g_roots)
    beta = min(g_roots - f_roots)
    f_ext = builder.mul_poly(f_line, _roots_poly(var, g_roots - f_roots - {beta}, order))
    g_ext = builder.mul_poly(g_line, _roots_poly(var, f_roots - g_roots - {alpha}, order))
    h_line = _scheme1_line(builder, f_ext, g_ext, alpha, beta)
    h_roots = (f_roots | g_roots) - {alpha, beta}
    hf = _scheme2_rec(builder, var, f_roots, f_line, h_roots, h_line, cofactor)
    hg = _scheme2_rec(builder, var, g_roots, g_line, h_roots, h_line, cofactor)
    return _scheme2_rec(
        builder, var, f_roots - {alpha}, hf, g_roots - {beta}, hg, cofactor
    )


def _check_quad(quad) -> tuple[Fraction, Fraction]:
    p, q = _frac(quad[0]), _frac(quad[1])
    if _frac_sqrt(p * p - 4 * q) is not None:
        raise DerivationError("quadratic factor splits over the rationals")
    return p, q


def _quad_poly(var: int, quad, order: MonomialOrder) -> Polynomial:
    p, q = _frac(quad[0]), _frac(quad[1])
    x = Polynomial.variable(var, order)
    return x * x + x * p + Polynomial.constant(q, order)


def _bezout_cofactors(
    a: Polynomial, b: Polynomial, var: int, order: MonomialOrder
) -> tuple[Polynomial, Polynomial]:
    """(u, v) with u*a + v*b = 1 for coprime univariate a, b."""
    ra, rb = univariate_coeffs(a, var), univariate_coeffs(b, var)
    ua, ub = [Fraction(1)], [Fraction(0)]
    va, vb = [Fraction(0)], [Fraction(1)]

    def deg(c):
        return len(c) - 1

    def trim(c):
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        return c

    def sub_shift(c1, c2, k, s):
        # c1 - s * x^k * c2
        out = list(c1) + [Fraction(0)] * max(0, len(c2) + k - len(c1))
        for idx, x in enumerate(c2):
            out[idx + k] -= s * x
        return trim(out)

    while rb != [Fraction(0)]:
        while deg(ra) >= deg(rb) and ra != [Fraction(0)]:
            k = deg(ra) - deg(rb)
            s = ra[-1] / rb[-1]
            ra = sub_shift(ra, rb, k, s)
            ua = sub_shift(ua, ub, k, s)
            va = sub_shift(va, vb, k, s)
            if ra == [Fraction(0)]:
                break
        ra, rb = rb, ra
        ua, ub = ub, ua
        va, vb = vb, va
    if deg(ra) != 0 or ra[0] == 0:
        raise DerivationError("factors share a root; no inverse cofactors")
    u = poly_from_coeffs([x / ra[0] for x in ua], var, order)
    v = poly_from_coeffs([x / ra[0] for x in va], var, order)
    return u, v


def _scheme4_line(
    builder: PcBuilder,
    var: int,
    f_roots: frozenset,
    f_line: int,
    g_roots: frozenset,
    quads: Sequence[tuple],
    g_line: int,
    cofactor: Polynomial,
) -> tuple[int, frozenset]:
    """Eliminate the quadratic factors against f, then intersect the root sets.

    Each quadratic is coprime to f's split root product, so a cofactor pair
    with u*f_prod + v*quad = 1 removes it exactly; the rational parts are then
    merged by the common-root recursion.  Returns the line and the root set
    of the derived polynomial (cofactor times the product over it).
    """
    order = builder.order
    quads = [_check_quad(qd) for qd in quads]
    cur_line = g_line
    remaining = list(quads)
    fpoly = _roots_poly(var, f_roots, order)
    while remaining:
        p, q = remaining.pop(0)
        tail = Polynomial.constant(1, order)
        for qd in remaining:
            tail = tail * _quad_poly(var, qd, order)
        u, v = _bezout_cofactors(fpoly, _quad_poly(var, (p, q), order), var, order)
        rational = _roots_poly(var, g_roots, order) * tail
        a_line = builder.mul_poly(f_line, u * rational)
        b_line = builder.mul_poly(cur_line, v)
        cur_line = builder.lin(a_line, b_line, 1, 1)
        if builder.line(cur_line) != cofactor * rational:
            raise DerivationError("quadratic elimination lost track of its shape")
    line = _scheme2_rec(builder, var, f_roots, f_line, frozenset(g_roots), cur_line, cofactor)
    return line, frozenset(f_roots & g_roots)


def _scheme5_line(
    builder: PcBuilder,
    src: int,
    dst: int,
    sigma: Mapping,
    a,
    interp_line: int,
    unit_line: int,
    domain_line: int,
    cofactor: Polynomial,
) -> int:
    """Transport the unit constraint (x_src - a) across the bijection sigma,
    deriving (x_dst - sigma(a)) times the cofactor."""
    order = builder.order
    a = _frac(a)
    table = {_frac(k): _frac(v) for k, v in sigma.items()}
    if a not in table:
        raise DerivationError("transport point is outside the bijection")
    s_vals = sorted(table.values())
    if len(set(s_vals)) != len(table):
        raise DerivationError("transport table is not a bijection")
    ginv = lagrange_interpolate([(b, k) for k, b in table.items()], dst, order)
    x_src = Polynomial.variable(src, order)
    x_dst = Polynomial.variable(dst, order)
    if builder.line(interp_line) != x_src - ginv:
        raise DerivationError("interpolant line does not match the bijection")
    if builder.line(unit_line) != (x_src - Polynomial.constant(a, order)) * cofactor:
        raise DerivationError("unit line does not match the transport point")
    if builder.line(domain_line) != _roots_poly(dst, s_vals, order):
        raise DerivationError("domain line does not match the target values")
    target = (x_dst - Polynomial.constant(table[a], order)) * cofactor
    if len(s_vals) == 1:
        line = builder.mul_poly(domain_line, cofactor)
        if builder.line(line) != target:
            raise DerivationError("degenerate transport misses its target")
        return line
    t = builder.mul_poly(interp_line, cofactor)
    diff = builder.lin(unit_line, t, 1, -1)  # (ginv - a) * cofactor
    phi = ginv - Polynomial.constant(a, order)
    factored = _factor_linear_quadratic(phi, dst)
    if factored is None:
        raise DerivationError("interpolant difference does not factor over the rationals")
    lc, roots, quads = factored
    if len(set(roots)) != len(roots):
        raise DerivationError("interpolant difference has a repeated root")
    monic = builder.scale(diff, Fraction(1) / lc)
    f_line = builder.mul_poly(domain_line, cofactor)
    line, res = _scheme4_line(
        builder, dst, frozenset(s_vals), f_line, frozenset(roots), quads, monic, cofactor
    )
    if res != {table[a]}:
        raise DerivationError("transport did not isolate the image point")
    if builder.line(line) != target:
        raise DerivationError("transport misses its target")
    return line


def _frac_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            out.extend((d, n // d))
    return sorted(set(out))


def _factor_linear_quadratic(
    f: Polynomial, var: int
) -> tuple[Fraction, list[Fraction], list[tuple[Fraction, Fraction]]] | None:
    """Split a univariate polynomial into rational roots and at most one
    irreducible monic quadratic; None when a higher-degree factor remains."""
    coeffs = univariate_coeffs(f, var)
    if len(coeffs) < 2:
        return None
    lc = coeffs[-1]
    c = [x / lc for x in coeffs]
    roots: list[Fraction] = []
    while len(c) > 1 and c[0] == 0:
        roots.append(Fraction(0))
        c = c[1:]
    while len(c) > 2:
        denom_lcm = 1
        for x in c:
            denom_lcm = denom_lcm * x.denominator // _gcd(denom_lcm, x.denominator)
        ints = [int(x * denom_lcm) for x in c]
        found = None
        for p in _divisors(ints[0]):
            for q in _divisors(ints[-1]):
                for cand in (Fraction(p, q), Fraction(-p, q)):
                    acc = Fraction(0)
                    for x in reversed(c):
                        acc = acc * cand + x
                    if acc == 0:
                        found = cand
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            break
        roots.append(found)
        out = []
        acc = Fraction(0)
        for x in reversed(c[1:]):
            acc = acc * found + x
            out.append(acc)
        c = list(reversed(out))
    if len(c) == 1:
        return lc, roots, []
    if len(c) == 2:
        roots.append(-c[0])
        return lc, roots, []
    if len(c) == 3:
        return lc, roots, [(c[1], c[0])]
    return None


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def scheme1(h: Polynomial, alpha, beta, var: int = 0) -> PcProof:
    """PC fragment deriving h from h*(x-alpha) and h*(x-beta)."""
    if h.is_zero():
        raise DerivationError("scheme 1 needs a nonzero common factor")
    order = h.order
    x = Polynomial.variable(var, order)
    axioms = (h * (x - Polynomial.constant(_frac(alpha), order)),
              h * (x - Polynomial.constant(_frac(beta), order)))
    builder = PcBuilder(axioms, order=order)
    line = _scheme1_line(builder, builder.axiom(0), builder.axiom(1), alpha, beta)
    if builder.line(line) != h:
        raise DerivationError("scheme 1 missed its target")
    return builder.extract([line])[0]


def scheme2(f_roots: Iterable, g_roots: Iterable, var: int = 0,
            order: MonomialOrder = GRLEX) -> PcProof:
    """PC fragment deriving the common-root product from two root products."""
    fr = frozenset(_frac(a) for a in f_roots)
    gr = frozenset(_frac(a) for a in g_roots)
    one = Polynomial.constant(1, order)
    axioms = (_roots_poly(var, fr, order), _roots_poly(var, gr, order))
    builder = PcBuilder(axioms, order=order)
    line = _scheme2_line(builder, var, fr, builder.axiom(0), gr, builder.axiom(1), one)
    return builder.extract([line])[0]


def scheme3(f_roots: Iterable, g_roots: Iterable, quad: tuple, var: int = 0,
            order: MonomialOrder = GRLEX) -> PcProof:
    """Single-quadratic variant of scheme 4."""
    return scheme4(f_roots, g_roots, [quad], var, order)


def scheme4(f_roots: Iterable, g_roots: Iterable, quads: Sequence[tuple], var: int = 0,
            order: MonomialOrder = GRLEX) -> PcProof:
    """PC fragment intersecting a root product with a product carrying
    irreducible quadratic factors."""
    fr = frozenset(_frac(a) for a in f_roots)
    gr = frozenset(_frac(a) for a in g_roots)
    one = Polynomial.constant(1, order)
    g = _roots_poly(var, gr, order)
    for qd in quads:
        g = g * _quad_poly(var, qd, order)
    axioms = (_roots_poly(var, fr, order), g)
    builder = PcBuilder(axioms, order=order)
    line, _ = _scheme4_line(
        builder, var, fr, builder.axiom(0), gr, quads, builder.axiom(1), one
    )
    return builder.extract([line])[0]


def scheme5(sigma: Mapping, a, var_src: int = 0, var_dst: int = 1,
            order: MonomialOrder = GRLEX) -> PcProof:
    """PC fragment transporting x_src = a across a bijection to x_dst = sigma(a)."""
    table = {_frac(k): _frac(v) for k, v in sigma.items()}
    a = _frac(a)
    one = Polynomial.constant(1, order)
    x_src = Polynomial.variable(var_src, order)
    ginv = lagrange_interpolate([(b, k) for k, b in table.items()], var_dst, order)
    axioms = (
        x_src - ginv,
        x_src - Polynomial.constant(a, order),
        _roots_poly(var_dst, sorted(table.values()), order),
    )
    builder = PcBuilder(axioms, order=order)
    line = _scheme5_line(
        builder, var_src, var_dst, table, a,
        builder.axiom(0), builder.axiom(1), builder.axiom(2), one,
    )
    return builder.extract([line])[0]


# -- dual-discriminator strategy ----------------------------------------------------


@dataclass(frozen=True)
class ChainPermutationBlock:
    """Variables linked by permutation constraints, with their bijection
    tables, identity-linking linear relations, and partial domains."""

    variables: tuple[int, ...]
    bijections: Mapping[tuple[int, int], Mapping[Fraction, Fraction]]
    linear_relations: tuple[Polynomial, ...]
    partial_domains: Mapping[int, tuple[Fraction, ...]]


def _nabla(a, b, c):
    return b if b == c else a


def _check_nabla(inst: CspInstance) -> None:
    for k, con in enumerate(inst.constraints):
        tl = sorted(con.tuples)
        for t1 in tl:
            for t2 in tl:
                for t3 in tl:
                    res = tuple(_nabla(a, b, c) for a, b, c in zip(t1, t2, t3))
                    if res not in con.tuples:
                        raise ClosureError("dual-discriminator", k, (t1, t2, t3, res))


def _partial_indicator(values: Sequence[Fraction], val: Fraction, var: int,
                       order: MonomialOrder) -> Polynomial:
    pts = [(v, 1 if v == val else 0) for v in values]
    return lagrange_interpolate(pts, var, order)


def _grid_vanishing(
    si: Sequence[Fraction], sj: Sequence[Fraction], rel: Iterable,
    vi: int, vj: int, order: MonomialOrder,
) -> Polynomial:
    """Canonical polynomial vanishing exactly on rel within the partial grid."""
    dpolys = [_roots_poly(vi, si, order), _roots_poly(vj, sj, order)]
    acc = Polynomial.constant(1, order)
    one = Polynomial.constant(1, order)
    for a, b in sorted(rel):
        chi = _partial_indicator(si, a, vi, order) * _partial_indicator(sj, b, vj, order)
        acc = acc * (one - chi)
        acc = divide(acc, dpolys)[1]
    return acc


def _classify_pair(si: frozenset, sj: frozenset, rel: frozenset):
    if rel == frozenset((a, b) for a in si for b in sj):
        return ("complete",)
    fwd: dict = {}
    bwd: dict = {}
    for a, b in rel:
        fwd.setdefault(a, set()).add(b)
        bwd.setdefault(b, set()).add(a)
    if (
        set(fwd) == set(si)
        and set(bwd) == set(sj)
        and all(len(v) == 1 for v in fwd.values())
        and all(len(v) == 1 for v in bwd.values())
    ):
        return ("permutation", {a: next(iter(v)) for a, v in fwd.items()})
    for a, b in sorted(rel):
        fan = frozenset((a, y) for y in sj) | frozenset((x, b) for x in si)
        if rel == fan:
            return ("two-fan", a, b)
    return None


class _PairState:
    __slots__ = ("rel", "items")

    def __init__(self, rel: frozenset, items: list):
        self.rel = rel
        self.items = items


def _dual_disc_pipeline(builder, c, order):
    n = c.n
    values = tuple(c.domain.values)
    vardom: list[frozenset] = [frozenset(values) for _ in range(n)]
    varline: list[int] = [builder.domain_axiom(v) for v in range(n)]

    def partial_poly(v):
        return _roots_poly(v, vardom[v], order)

    def merge_vardom(v: int, new: frozenset, new_line: int) -> bool:
        inter = vardom[v] & new
        if inter == vardom[v]:
            return False
        line = _scheme2_line(
            builder, v, vardom[v], varline[v], frozenset(new), new_line,
            Polynomial.constant(1, order),
        )
        if not inter:
            raise _Unsat(line)
        vardom[v] = inter
        varline[v] = line
        return True

    pairs: dict[tuple[int, int], _PairState] = {}

    def pair_state(i: int, j: int) -> _PairState:
        st = pairs.get((i, j))
        if st is None:
            rel = frozenset((a, b) for a in vardom[i] for b in vardom[j])
            st = _PairState(rel, [(partial_poly(i), varline[i]), (partial_poly(j), varline[j])])
            pairs[(i, j)] = st
        return st

    def refresh_pair(i: int, j: int, extra: list) -> None:
        st = pair_state(i, j)
        items = st.items + extra + [(partial_poly(i), varline[i]), (partial_poly(j), varline[j])]
        gb = _local_gb(builder, items, 2 * 2 * (len(values) - 1) + 2, order)
        const = _constant_line(gb)
        if const is not None:
            raise _Unsat(const)
        rel = set()
        for a in sorted(vardom[i]):
            for b in sorted(vardom[j]):
                point = _point_for((i, j), (a, b))
                if all(g.evaluate(point) == 0 for g, _ in gb):
                    rel.add((a, b))
        st.items = gb
        st.rel = frozenset(rel)

    def rel_between(u: int, w: int) -> frozenset:
        i, j = min(u, w), max(u, w)
        st = pair_state(i, j)
        if u == i:
            return st.rel
        return frozenset((b, a) for a, b in st.rel)

    # seed from constraints
    for k, con in enumerate(c.constraints):
        f = constraint_polynomial(c.domain, con.scope, con.tuples, order)
        if not con.tuples:
            raise _Unsat(builder.axiom(builder.axioms.index(f)))
        if f.is_zero():
            continue
        ax = builder.axioms.index(f)
        local_items = [(f, builder.axiom(ax))]
        for v in con.scope:
            local_items.append((domain_polynomial(c.domain, v, order), builder.domain_axiom(v)))
        working = 2 * len(con.scope) * (len(values) - 1) + 2
        local = _local_gb(builder, local_items, working, order)
        const = _constant_line(local)
        if const is not None:
            raise _Unsat(const)
        for pos, v in enumerate(con.scope):
            proj = frozenset(t[pos] for t in con.tuples)
            if proj != frozenset(values):
                pline = _derive_member(builder, _roots_poly(v, proj, order), local)
                merge_vardom(v, proj, pline)
        for p1 in range(len(con.scope)):
            for p2 in range(p1 + 1, len(con.scope)):
                u, w = con.scope[p1], con.scope[p2]
                rel2 = frozenset((t[p1], t[p2]) for t in con.tuples)
                i, j = min(u, w), max(u, w)
                oriented = rel2 if u == i else frozenset((b, a) for a, b in rel2)
                g = constraint_polynomial(c.domain, (i, j), oriented, order)
                if g.is_zero():
                    pair_state(i, j)
                    continue
                gl = _derive_member(builder, g, local)
                refresh_pair(i, j, [(g, gl)])

    for i in range(n):
        for j in range(i + 1, n):
            pair_state(i, j)

    def bijection_transport(st: _PairState, i: int, j: int) -> list:
        """Unit-constraint transport across a stale bijective pair relation."""
        rel_si = frozenset(t[0] for t in st.rel)
        rel_sj = frozenset(t[1] for t in st.rel)
        cls = _classify_pair(rel_si, rel_sj, st.rel)
        if cls is None or cls[0] != "permutation":
            return []
        fwd = cls[1]
        bwd = {b: a for a, b in fwd.items()}
        out = []
        for v, other, table, dst_vals in ((i, j, fwd, rel_sj), (j, i, bwd, rel_si)):
            if len(vardom[v]) != 1:
                continue
            a0 = next(iter(vardom[v]))
            if a0 not in table:
                continue
            try:
                interp = _derive_member(
                    builder,
                    Polynomial.variable(v, order)
                    - lagrange_interpolate(
                        [(b, k) for k, b in table.items()], other, order
                    ),
                    st.items,
                )
                dom_line = _derive_member(
                    builder, _roots_poly(other, dst_vals, order), st.items
                )
                line = _scheme5_line(
                    builder, v, other, table, a0, interp, varline[v], dom_line,
                    Polynomial.constant(1, order),
                )
                out.append((builder.line(line), line))
            except DerivationError:
                continue
        return out

    # (2,3)-consistency with per-prune derivations
    changed = True
    while changed:
        changed = False
        for (i, j) in sorted(pairs):
            st = pairs[(i, j)]
            stale = any(
                a not in vardom[i] or b not in vardom[j] for a, b in st.rel
            )
            if stale:
                refresh_pair(i, j, bijection_transport(st, i, j))
                st = pairs[(i, j)]
                changed = True
            for side, v in ((0, i), (1, j)):
                proj = frozenset(t[side] for t in st.rel)
                if proj == vardom[v]:
                    continue
                pline = _derive_member(builder, _roots_poly(v, proj, order), st.items)
                merge_vardom(v, proj, pline)
                changed = True
        for i in range(n):
            for j in range(i + 1, n):
                st = pairs[(i, j)]
                for k in range(n):
                    if k in (i, j):
                        continue
                    rel_ik = rel_between(i, k)
                    rel_jk = rel_between(j, k)
                    t = frozenset(
                        (a, b)
                        for a, b in st.rel
                        if any(
                            (a, cv) in rel_ik and (b, cv) in rel_jk
                            for cv in vardom[k]
                        )
                    )
                    if t == st.rel:
                        continue
                    extra = _prune_generator(
                        builder, c, order, vardom, varline, pairs, pair_state,
                        rel_between, i, j, k, t,
                    )
                    refresh_pair(i, j, extra)
                    if pairs[(i, j)].rel != t:
                        raise RuntimeError("pruned pair state missed its target")
                    changed = True

    # classification and block assembly
    classes: dict[tuple[int, int], tuple] = {}
    for (i, j), st in pairs.items():
        cls = _classify_pair(vardom[i], vardom[j], st.rel)
        if cls is None:
            raise RuntimeError("pair (%d, %d) is not in a recognized class" % (i, j))
        classes[(i, j)] = cls

    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for (i, j), cls in classes.items():
        if cls[0] == "permutation" and len(vardom[i]) >= 2:
            parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for v in range(n):
        if any(
            classes[(min(v, w), max(v, w))][0] == "permutation" and len(vardom[v]) >= 2
            for w in range(n)
            if w != v
        ):
            groups.setdefault(find(v), []).append(v)

    blocks: list[ChainPermutationBlock] = []
    final_items: list[tuple[Polynomial, int]] = []
    blocked: set[int] = set()
    for root in sorted(groups):
        vs = sorted(groups[root])
        blocked.update(vs)
        tables: dict[tuple[int, int], dict] = {}
        for u in vs:
            for w in vs:
                if u == w:
                    continue
                cls = classes[(min(u, w), max(u, w))]
                if cls[0] != "permutation":
                    raise RuntimeError("block pair lost its permutation shape")
                sigma = cls[1] if u < w else {b: a for a, b in cls[1].items()}
                tables[(u, w)] = sigma
        for u in vs:
            for w in vs:
                for z in vs:
                    if len({u, w, z}) < 3:
                        continue
                    comp = {a: tables[(w, z)][b] for a, b in tables[(u, w)].items()}
                    if comp != tables[(u, z)]:
                        raise RuntimeError("bijection tables do not compose")
        anchor = vs[0]
        by_table: dict[tuple, list[int]] = {}
        for v in vs:
            if v == anchor:
                sig = tuple(sorted((a, a) for a in vardom[v]))
            else:
                sig = tuple(sorted(tables[(anchor, v)].items()))
            by_table.setdefault(sig, []).append(v)
        linear: list[Polynomial] = []
        block_items: list[tuple[Polynomial, int]] = []
        reps: list[int] = []
        for sig, members in sorted(by_table.items()):
            rep = max(members)
            reps.append(rep)
            for v in members:
                if v == rep:
                    continue
                g = Polynomial.variable(v, order) - Polynomial.variable(rep, order)
                i, j = min(v, rep), max(v, rep)
                line = _derive_member(builder, g, pair_state(i, j).items)
                linear.append(g)
                block_items.append((g, line))
        for r1 in reps:
            block_items.append((partial_poly(r1), varline[r1]))
            for r2 in reps:
                if r1 == r2:
                    continue
                g = Polynomial.variable(r1, order) - lagrange_interpolate(
                    [(b, a) for a, b in tables[(r1, r2)].items()], r2, order
                )
                i, j = min(r1, r2), max(r1, r2)
                line = _derive_member(builder, g, pair_state(i, j).items)
                block_items.append((g, line))
        gb = _local_gb(builder, block_items, 4 * (len(values) - 1) + 2, order)
        const = _constant_line(gb)
        if const is not None:
            raise _Unsat(const)
        final_items.extend(gb)
        blocks.append(
            ChainPermutationBlock(
                tuple(vs),
                {k: dict(v) for k, v in tables.items()},
                tuple(linear),
                {v: tuple(sorted(vardom[v])) for v in vs},
            )
        )

    for (i, j), cls in classes.items():
        if cls[0] == "two-fan":
            a, b = cls[1], cls[2]
            g = (Polynomial.variable(i, order) - Polynomial.constant(a, order)) * (
                Polynomial.variable(j, order) - Polynomial.constant(b, order)
            )
            line = _derive_member(builder, g, pairs[(i, j)].items)
            final_items.append((g, line))
    for v in range(n):
        final_items.append((partial_poly(v), varline[v]))

    reduced = _interreduce_tracked(builder, final_items, order)
    const = _constant_line(reduced)
    if const is not None:
        raise _Unsat(const)
    return reduced, tuple(blocks)


def _prune_generator(
    builder, c, order, vardom, varline, pairs, pair_state, rel_between, i, j, k, t
) -> list[tuple[Polynomial, int]]:
    """Generators for the pruned pair relation, via a bijection transport of a
    two-fan when the triple has that shape and a triple-local basis otherwise."""
    cls_ik = _classify_pair(vardom[i], vardom[k], rel_between(i, k))
    cls_jk = _classify_pair(vardom[j], vardom[k], rel_between(j, k))
    for src, dst, cls_perm, cls_fan, fan_flip in (
        (i, j, cls_ik, cls_jk, False),
        (j, i, cls_jk, cls_ik, True),
    ):
        if cls_perm is None or cls_fan is None:
            continue
        if cls_perm[0] != "permutation" or cls_fan[0] != "two-fan":
            continue
        # fan over (other-end, k): (x_other - a)(x_k - bk) transported to src's mate
        try:
            sigma_to_k = cls_perm[1]  # src -> k
            sigma_from_k = {b: a for a, b in sigma_to_k.items()}
            a_fan, b_fan = cls_fan[1], cls_fan[2]  # over (dst, k)
            if b_fan not in sigma_from_k:
                continue
            other = dst
            cof = Polynomial.variable(other, order) - Polynomial.constant(a_fan, order)
            fan_poly = cof * (
                Polynomial.variable(k, order) - Polynomial.constant(b_fan, order)
            )
            pk = pair_state(min(other, k), max(other, k))
            fan_line = _derive_member(builder, fan_poly, pk.items)
            psrc = pair_state(min(src, k), max(src, k))
            interp = _derive_member(
                builder,
                Polynomial.variable(k, order)
                - lagrange_interpolate(
                    [(b, a) for a, b in sigma_from_k.items()], src, order
                ),
                psrc.items,
            )
            line = _scheme5_line(
                builder, k, src, sigma_from_k, b_fan, interp, fan_line,
                varline[src], cof,
            )
            g = builder.line(line)
            expect = frozenset(
                (x, y)
                for (x, y) in pairs[(i, j)].rel
                if (x if not fan_flip else y) == sigma_from_k[b_fan]
                or (y if not fan_flip else x) == a_fan
            )
            if expect == t:
                return [(g, line)]
        except DerivationError:
            pass
    items = (
        pairs[(i, j)].items
        + pair_state(min(i, k), max(i, k)).items
        + pair_state(min(j, k), max(j, k)).items
        + [(_roots_poly(v, vardom[v], order), varline[v]) for v in (i, j, k)]
    )
    tgb = _local_gb(builder, items, 3 * 2 * (c.domain.size - 1) + 2, order)
    const = _constant_line(tgb)
    if const is not None:
        raise _Unsat(const)
    g = _grid_vanishing(sorted(vardom[i]), sorted(vardom[j]), t, i, j, order)
    if g.is_zero():
        return []
    return [(g, _derive_member(builder, g, tgb))]


def dual_disc_gb(
    c: CspInstance, order: MonomialOrder = GRLEX
) -> tuple[TruncatedBasis, dict[Polynomial, PcProof]]:
    """Full reduced basis of a dual-discriminator-closed instance.

    The instance is reduced to its binary projections, tightened to
    (2,3)-consistency with a PC derivation per pruning step, and assembled
    from permutation blocks, two-fan products, and partial domain
    polynomials.  Block data rides along in the basis metadata.
    """
    _check_nabla(c)
    axioms = encode_instance(c, order)
    builder = PcBuilder(tuple(axioms), domain=c.domain, order=order)
    try:
        items, blocks = _dual_disc_pipeline(builder, c, order)
    except _Unsat as u:
        one, line = _monic_line(builder, builder.line(u.line), u.line)
        items, blocks = [(one, line)], ()
    elements = [f for f, _ in items]
    top = max((f.degree() for f in elements), default=0)
    basis = make_basis(
        elements, top, order, True,
        {"strategy": "dual-discriminator", "full": True, "blocks": blocks},
    )
    derivations = {f: builder.extract([l])[0] for f, l in items}
    return basis, derivations


# -- refutation front end -----------------------------------------------------------


@dataclass(frozen=True)
class RefutationResult:
    verdict: str
    certificate: SosCertificate | None
    proof: PcProof | None
    axioms: tuple[Polynomial, ...]
    basis: TruncatedBasis | None
    model: tuple[Fraction, ...] | None
    details: dict

    @property
    def refuted(self) -> bool:
        return self.verdict == "refuted"


def _instance_clauses(c: CspInstance) -> list[tuple[int, ...]] | None:
    if set(c.domain.values) != {Fraction(0), Fraction(1)}:
        return None
    clauses: list[tuple[int, ...]] = []
    for con in c.constraints:
        k = len(con.scope)
        for t in itertools.product((Fraction(0), Fraction(1)), repeat=k):
            if t in con.tuples:
                continue
            clause = tuple(
                (v + 1) if a == 0 else -(v + 1) for v, a in zip(con.scope, t)
            )
            clauses.append(clause)
    return clauses


def _flip_clause_proof(
    proof: PcProof, originals: Sequence[Polynomial], order: MonomialOrder
) -> PcProof:
    """Rewrite a refutation of the sign-flipped clauses over the original
    clause polynomials via the substitution x -> 1 - x."""
    builder = PcBuilder(tuple(originals), domain=BOOLEAN_DOMAIN, order=order)
    lines: list[int] = []
    for st in proof.steps:
        if st.kind == AXIOM:
            k = st.refs[0]
            sign = (-1) ** originals[k].degree()
            lines.append(builder.scale(builder.axiom(k), sign))
        elif st.kind == LINEAR_COMBINATION:
            lines.append(builder.lin(lines[st.refs[0]], lines[st.refs[1]], *st.scalars))
        elif st.kind == VARIABLE_MULTIPLICATION:
            t = builder.mul_var(lines[st.refs[0]], st.var)
            lines.append(builder.lin(lines[st.refs[0]], t, 1, -1))
        elif st.kind == DOMAIN_AXIOM:
            lines.append(builder.domain_axiom(st.var))
        else:
            raise RuntimeError("unknown step kind %r" % st.kind)
    final = lines[-1]
    if builder.line(final) != Polynomial.constant(1, order):
        raise RuntimeError("flipped refutation does not derive 1")
    return builder.extract([final])[0]


def sos_csp_refute(c: CspInstance, d: int, order: MonomialOrder = GRLEX) -> RefutationResult:
    """Refute an unsatisfiable instance with a verified certificate for -1.

    Instances whose clauses fit a Horn orientation run through unit
    propagation, which keeps the derivation inside the clause degree; all
    others run the tracked completion at a working degree tied to d.
    """
    if d < 0:
        raise ValueError("negative degree")
    clauses = _instance_clauses(c)
    route = "completion"
    if clauses is not None:
        if all(sum(1 for l in cl if l < 0) <= 1 for cl in clauses):
            route = "horn"
        elif all(sum(1 for l in cl if l > 0) <= 1 for cl in clauses):
            route = "horn-flipped"

    if route == "horn":
        res = horn_refute(clauses, n_vars=c.n, order=order)
        axioms = tuple(res.clause_polynomials)
        if res.satisfiable:
            model = tuple(Fraction(b) for b in res.model)
            return RefutationResult(
                "not-refuted-at-degree-%d" % d, None, None, axioms, None, model,
                {"route": route},
            )
        proof = res.proof.with_domain(BOOLEAN_DOMAIN)
    elif route == "horn-flipped":
        flipped = [tuple(-l for l in cl) for cl in clauses]
        res = horn_refute(flipped, n_vars=c.n, order=order)
        axioms = tuple(encode_clause(cl, order) for cl in clauses)
        if res.satisfiable:
            model = tuple(Fraction(1 - b) for b in res.model)
            return RefutationResult(
                "not-refuted-at-degree-%d" % d, None, None, axioms, None, model,
                {"route": route},
            )
        proof = _flip_clause_proof(res.proof, axioms, order).with_domain(BOOLEAN_DOMAIN)
    else:
        axioms = tuple(encode_instance(c, order))
        working = max(2 * d, max((f.degree() for f in axioms), default=1), 1)
        basis, derivs = pc_buchberger(axioms, max(d, 1), order, working_degree=working)
        one = Polynomial.constant(1, order)
        if one not in basis.elements:
            return RefutationResult(
                "not-refuted-at-degree-%d" % d, None, None, axioms, basis, None,
                {"route": route, "working_degree": working},
            )
        proof = derivs[one].with_domain(c.domain)
        cert = pc_to_sos_square(proof)
        report = sos_verify(cert, proof_axiom_system(proof))
        if not report.ok:
            raise RuntimeError("refutation certificate failed verification")
        return RefutationResult(
            "refuted", cert, proof, axioms, basis, None,
            {"route": route, "proof_degree": proof.degree(), "working_degree": working},
        )

    cert = pc_to_sos_square(proof)
    report = sos_verify(cert, proof_axiom_system(proof))
    if not report.ok:
        raise RuntimeError("refutation certificate failed verification")
    return RefutationResult(
        "refuted", cert, proof, axioms, None, None,
        {"route": route, "proof_degree": proof.degree()},
    )


# -- ideal membership front end ------------------------------------------------------


@dataclass(frozen=True)
class ImpResult:
    member: bool
    witness: PcProof | None
    remainder: Polynomial
    basis: TruncatedBasis
    strategy: str
    note: str


def _replay_proof(builder: PcBuilder, proof: PcProof) -> int:
    if tuple(proof.axioms) != tuple(builder.axioms):
        raise ValueError("proof axioms do not match the builder")
    lines: list[int] = []
    for st in proof.steps:
        if st.kind == AXIOM:
            lines.append(builder.axiom(st.refs[0]))
        elif st.kind == DOMAIN_AXIOM:
            lines.append(builder.domain_axiom(st.var))
        elif st.kind == LINEAR_COMBINATION:
            lines.append(builder.lin(lines[st.refs[0]], lines[st.refs[1]], *st.scalars))
        elif st.kind == VARIABLE_MULTIPLICATION:
            lines.append(builder.mul_var(lines[st.refs[0]], st.var))
        else:
            raise RuntimeError("unknown step kind %r" % st.kind)
    return lines[-1]


def _detect_semilattice(c: CspInstance) -> SemilatticeStructure:
    first_err: ClosureError | None = None
    for fn in (min_semilattice, max_semilattice):
        s = fn(c.domain)
        for k, con in enumerate(c.constraints):
            w = _closure_witness(con.tuples, s.apply)
            if w is not None:
                if first_err is None:
                    first_err = ClosureError("semilattice", k, w)
                break
        else:
            return s
    raise first_err if first_err is not None else ClosureError("semilattice", None, ())


def imp_solve(
    f: Polynomial,
    c: CspInstance,
    d: int,
    strategy: str = "semilattice",
    structure: SemilatticeStructure | None = None,
    order: MonomialOrder = GRLEX,
) -> ImpResult:
    """Decide membership of f in the instance's combinatorial ideal.

    The semilattice and generic strategies divide against a d-truncated
    basis and require degree(f) <= d; the dual-discriminator strategy holds
    a full basis.  Membership comes with a PC witness assembled from the
    division quotients and the basis elements' derivations.
    """
    if strategy not in ("semilattice", "dual-discriminator", "generic"):
        raise ValueError("unknown strategy %r" % strategy)
    if d < 0:
        raise ValueError("negative degree")
    if strategy != "dual-discriminator" and f.degree() > d:
        raise DegreeOutOfRangeError(
            "query degree %d exceeds truncation degree %d" % (f.degree(), d)
        )
    if strategy == "semilattice":
        s = structure if structure is not None else _detect_semilattice(c)
        basis, derivs = semilattice_gb(c, s, d, order)
        note = "semilattice (%s), degree guarantee O(d)" % s.kind
    elif strategy == "dual-discriminator":
        basis, derivs = dual_disc_gb(c, order)
        note = "dual-discriminator, full basis"
    else:
        basis, derivs = pc_buchberger(encode_instance(c, order), d, order)
        note = "generic completion: no degree guarantee at this truncation"
    if f.is_zero():
        return ImpResult(True, None, Polynomial.zero(order), basis, strategy, note)
    qs, r = divide(f, list(basis.elements))
    member = r.is_zero()
    witness = None
    if member:
        any_proof = next(iter(derivs.values()))
        builder = PcBuilder(any_proof.axioms, domain=any_proof.domain, order=order)
        parts = []
        for g, q in zip(basis.elements, qs):
            if q.is_zero():
                continue
            parts.append((_replay_proof(builder, derivs[g]), q))
        line = builder.nsatz_line(parts)
        if builder.line(line) != f:
            raise RuntimeError("membership witness misses the query")
        witness = builder.extract([line])[0]
    return ImpResult(member, witness, r, basis, strategy, note)
