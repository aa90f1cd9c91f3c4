"""Polynomial-equation proofs: steps, verification, Horn refutation, tracked completion.

A proof is a flat sequence of steps, each carrying the polynomial it claims to
derive.  Verification replays every step from its references with exact
rational arithmetic, so nothing in a proof object is trusted.  PcBuilder is
the macro layer (monomial and polynomial multiplication, linear combinations,
memoised lines) the solvers use to emit derivations as they compute.
horn_refute decides dual-Horn clause sets by falsity propagation and, when
unsatisfiable, returns a derivation of 1 whose degree never exceeds the
largest encoded clause.  pc_buchberger reruns the truncated completion of
groebner.buchberger_truncated while recording every S-polynomial and
reduction as proof steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .csp import DomainSpec, domain_polynomial
from .groebner import TruncatedBasis, _sort_key, _truncation_metadata
from .ring import (
    GRLEX,
    Monomial,
    MonomialOrder,
    Polynomial,
    leading_term,
    s_polynomial,
)

AXIOM = "axiom"
DOMAIN_AXIOM = "domain-axiom"
LINEAR_COMBINATION = "linear-combination"
VARIABLE_MULTIPLICATION = "variable-multiplication"

_KINDS = (AXIOM, DOMAIN_AXIOM, LINEAR_COMBINATION, VARIABLE_MULTIPLICATION)


@dataclass(frozen=True)
class PcStep:
    """One derivation step; result is the claimed polynomial, never trusted."""

    kind: str
    result: Polynomial
    refs: tuple[int, ...] = ()
    scalars: tuple[Fraction, Fraction] | None = None
    var: int | None = None

    def __post_init__(self):
        if self.kind == AXIOM:
            shape = len(self.refs) == 1 and self.scalars is None and self.var is None
        elif self.kind == DOMAIN_AXIOM:
            shape = not self.refs and self.scalars is None and self.var is not None
        elif self.kind == LINEAR_COMBINATION:
            shape = len(self.refs) == 2 and self.scalars is not None and self.var is None
        elif self.kind == VARIABLE_MULTIPLICATION:
            shape = len(self.refs) == 1 and self.scalars is None and self.var is not None
        else:
            raise ValueError("unknown step kind: %r" % (self.kind,))
        if not shape:
            raise ValueError("malformed %s step" % self.kind)
        if self.var is not None and self.var < 0:
            raise ValueError("negative variable index")


@dataclass(frozen=True)
class PcProof:
    """Axioms plus steps; domain enables domain-axiom steps for its variables."""

    axioms: tuple[Polynomial, ...]
    steps: tuple[PcStep, ...]
    domain: DomainSpec | None = None

    def degree(self) -> int:
        return max((s.result.degree() for s in self.steps), default=-1)

    def size(self) -> int:
        return sum(s.result.bit_size() for s in self.steps)

    def derived(self) -> Polynomial:
        if not self.steps:
            raise ValueError("empty input")
        return self.steps[-1].result

    def with_domain(self, domain: DomainSpec) -> "PcProof":
        return PcProof(self.axioms, self.steps, domain)

    def n_vars(self) -> int:
        """1 + the largest variable index appearing anywhere in the proof."""
        top = -1
        for f in self.axioms:
            top = max(top, max(f.variables(), default=-1))
        for s in self.steps:
            top = max(top, max(s.result.variables(), default=-1))
            if s.var is not None:
                top = max(top, s.var)
        return top + 1


@dataclass(frozen=True)
class PcVerifyReport:
    ok: bool
    degree: int
    size: int
    failing_step: int | None = None
    message: str | None = None


def _replay_step(proof: PcProof, k: int) -> str | None:
    """Recompute step k; None when it checks out, else a reason."""
    st = proof.steps[k]
    for r in st.refs:
        limit = len(proof.axioms) if st.kind == AXIOM else k
        if not 0 <= r < limit:
            return "reference %d out of range" % r
    if st.kind == AXIOM:
        want = proof.axioms[st.refs[0]]
    elif st.kind == DOMAIN_AXIOM:
        if proof.domain is None:
            return "domain-axiom step without a declared domain"
        want = domain_polynomial(proof.domain, st.var, st.result.order)
    elif st.kind == LINEAR_COMBINATION:
        a, b = st.scalars
        i, j = st.refs
        want = proof.steps[i].result * a + proof.steps[j].result * b
    else:
        want = proof.steps[st.refs[0]].result * Polynomial.variable(st.var, st.result.order)
    if want != st.result:
        return "stated result does not match recomputation"
    return None


def pc_verify(proof: PcProof) -> PcVerifyReport:
    """Replay every step exactly; failures are reported, not raised."""
    degree = proof.degree()
    size = proof.size()
    for k in range(len(proof.steps)):
        try:
            reason = _replay_step(proof, k)
        except ValueError as exc:
            reason = str(exc)
        if reason is not None:
            return PcVerifyReport(False, degree, size, failing_step=k, message=reason)
    return PcVerifyReport(True, degree, size)


class PcBuilder:
    """Append-only proof construction with one memoised line per polynomial."""

    __slots__ = ("axioms", "domain", "order", "steps", "_by_poly")

    def __init__(
        self,
        axioms: Sequence[Polynomial],
        domain: DomainSpec | None = None,
        order: MonomialOrder = GRLEX,
    ):
        self.axioms = tuple(axioms)
        for f in self.axioms:
            if f.order != order:
                raise ValueError("axiom order does not match builder order")
        self.domain = domain
        self.order = order
        self.steps: list[PcStep] = []
        self._by_poly: dict[Polynomial, int] = {}

    def line(self, i: int) -> Polynomial:
        return self.steps[i].result

    def _append(self, step: PcStep) -> int:
        cached = self._by_poly.get(step.result)
        if cached is not None:
            return cached
        self.steps.append(step)
        idx = len(self.steps) - 1
        self._by_poly[step.result] = idx
        return idx

    def axiom(self, i: int) -> int:
        return self._append(PcStep(AXIOM, self.axioms[i], refs=(i,)))

    def domain_axiom(self, var: int) -> int:
        if self.domain is None:
            raise ValueError("builder has no domain")
        poly = domain_polynomial(self.domain, var, self.order)
        return self._append(PcStep(DOMAIN_AXIOM, poly, var=var))

    def lin(self, i: int, j: int, a, b) -> int:
        a, b = Fraction(a), Fraction(b)
        result = self.line(i) * a + self.line(j) * b
        return self._append(
            PcStep(LINEAR_COMBINATION, result, refs=(i, j), scalars=(a, b))
        )

    def scale(self, i: int, c) -> int:
        return self.lin(i, i, c, 0)

    def add(self, i: int, j: int) -> int:
        return self.lin(i, j, 1, 1)

    def sub(self, i: int, j: int) -> int:
        return self.lin(i, j, 1, -1)

    def mul_var(self, i: int, var: int) -> int:
        result = self.line(i) * Polynomial.variable(var, self.order)
        return self._append(
            PcStep(VARIABLE_MULTIPLICATION, result, refs=(i,), var=var)
        )

    def mul_monomial(self, i: int, m: Monomial) -> int:
        idx = i
        for var, e in enumerate(m.exps):
            for _ in range(e):
                idx = self.mul_var(idx, var)
        return idx

    def mul_poly(self, i: int, mult: Polynomial) -> int:
        """Line deriving mult * line(i), term by term."""
        if mult.is_zero():
            return self.scale(i, 0)
        parts = [(self.mul_monomial(i, m), c) for m, c in mult.sorted_terms()]
        return self.combine(parts)

    def combine(self, parts: Sequence[tuple[int, object]]) -> int:
        """Line deriving sum of c * line(i) over (i, c) pairs."""
        if not parts:
            raise ValueError("empty input")
        idx = self.scale(parts[0][0], parts[0][1])
        for i, c in parts[1:]:
            idx = self.lin(idx, i, 1, c)
        return idx

    def nsatz_line(self, parts: Sequence[tuple[int, Polynomial]]) -> int:
        """Line deriving sum of h * line(i) over (i, h) multiplier pairs."""
        return self.combine([(self.mul_poly(i, h), 1) for i, h in parts])

    def s_poly_line(self, fi: Polynomial, li: int, fj: Polynomial, lj: int) -> int:
        mf, cf = leading_term(fi)
        mg, cg = leading_term(fj)
        l = mf.lcm(mg)
        ti = self.mul_monomial(li, l.div(mf))
        tj = self.mul_monomial(lj, l.div(mg))
        return self.lin(ti, tj, Fraction(1) / cf, -Fraction(1) / cg)

    def reduce_line(
        self, i: int, divisors: Sequence[tuple[Polynomial, int]]
    ) -> tuple[Polynomial, int]:
        """Tracked multivariate division; returns (remainder, line deriving it).

        Same divisor-selection rule as ring.divide, so the remainder is
        identical to an untracked division by the same list.
        """
        line = i
        p = self.line(i)
        lead = [(g.leading_monomial(), g.leading_coefficient()) for g, _ in divisors]
        rem_terms: dict[Monomial, Fraction] = {}
        while not p.is_zero():
            m = p.leading_monomial()
            c = p.terms[m]
            for k, (lm, lc) in enumerate(lead):
                q = m.div(lm)
                if q is not None:
                    coef = c / lc
                    t = self.mul_monomial(divisors[k][1], q)
                    line = self.lin(line, t, 1, -coef)
                    p = p - divisors[k][0].mul_monomial(q, coef)
                    break
            else:
                rem_terms[m] = c
                p = p - Polynomial.term(c, m, self.order)
        return Polynomial(rem_terms, self.order), line

    def extract(self, targets: Sequence[int]) -> tuple[PcProof, dict[int, int]]:
        """Dependency-pruned sub-proof for the target lines, with index remap."""
        needed: set[int] = set()
        stack = list(targets)
        while stack:
            k = stack.pop()
            if k in needed:
                continue
            needed.add(k)
            st = self.steps[k]
            if st.kind in (LINEAR_COMBINATION, VARIABLE_MULTIPLICATION):
                stack.extend(st.refs)
        kept = sorted(needed)
        remap = {old: new for new, old in enumerate(kept)}
        out = []
        for old in kept:
            st = self.steps[old]
            if st.kind in (LINEAR_COMBINATION, VARIABLE_MULTIPLICATION):
                st = PcStep(st.kind, st.result, tuple(remap[r] for r in st.refs), st.scalars, st.var)
            out.append(st)
        return PcProof(self.axioms, tuple(out), self.domain), remap

    def proof(self) -> PcProof:
        return PcProof(self.axioms, tuple(self.steps), self.domain)


# -- Horn refutation ----------------------------------------------------------


@dataclass(frozen=True)
class HornResult:
    satisfiable: bool
    proof: PcProof | None
    model: tuple[int, ...] | None
    clause_polynomials: tuple[Polynomial, ...]


def _split_clause(clause: Sequence[int]) -> tuple[list[int], list[int]]:
    negs, poss = set(), set()
    for lit in clause:
        if not isinstance(lit, int) or lit == 0:
            raise ValueError("clause literals are nonzero integers")
        (poss if lit > 0 else negs).add(abs(lit))
    return sorted(negs), sorted(poss)


def encode_clause(clause: Sequence[int], order: MonomialOrder = GRLEX) -> Polynomial:
    """Product of x_h over negated vars and (x_j - 1) over plain vars.

    Vanishes on a 0/1 point exactly when the clause is satisfied there.
    """
    negs, poss = _split_clause(clause)
    return _clause_product(negs, poss, order)


def _clause_product(negs: Sequence[int], poss: Sequence[int], order: MonomialOrder) -> Polynomial:
    p = Polynomial.constant(1, order)
    for v in negs:
        p = p * Polynomial.variable(v - 1, order)
    one = Polynomial.constant(1, order)
    for v in poss:
        p = p * (Polynomial.variable(v - 1, order) - one)
    return p


def horn_refute(
    clauses: Sequence[Sequence[int]],
    n_vars: int | None = None,
    order: MonomialOrder = GRLEX,
) -> HornResult:
    """Decide a dual-Horn clause set (signed 1-based literals, <=1 negated per clause).

    Unsatisfiable input yields a derivation of 1 from the encoded clauses;
    satisfiable input yields the model that sets every unforced variable true.
    """
    split = []
    for k, clause in enumerate(clauses):
        negs, poss = _split_clause(clause)
        if len(negs) > 1:
            raise ValueError(
                "clause %d has %d negated literals; at most one is allowed" % (k, len(negs))
            )
        split.append((negs, poss))
    n = n_vars if n_vars is not None else max((max(ns + ps) for ns, ps in split if ns + ps), default=0)

    axioms = tuple(_clause_product(ns, ps, order) for ns, ps in split)
    builder = PcBuilder(axioms, order=order)
    false_line: dict[int, int] = {}
    conflict: int | None = None
    progress = True
    while progress and conflict is None:
        progress = False
        for idx, (negs, poss) in enumerate(split):
            if negs and negs[0] in false_line:
                continue
            if any(v not in false_line for v in poss):
                continue
            line = builder.axiom(idx)
            remaining = list(poss)
            while remaining:
                v = remaining.pop()
                g = _clause_product(negs, remaining, order)
                t = builder.mul_poly(false_line[v], g)
                line = builder.lin(t, line, 1, -1)
            if negs:
                false_line[negs[0]] = line
                progress = True
            else:
                conflict = line
                break

    if conflict is not None:
        proof, _ = builder.extract([conflict])
        bound = max((f.degree() for f in axioms), default=0)
        if proof.degree() > bound:
            raise RuntimeError("refutation exceeded the encoded clause degree")
        return HornResult(False, proof, None, axioms)
    model = tuple(0 if v + 1 in false_line else 1 for v in range(n))
    return HornResult(True, None, model, axioms)


# -- tracked truncated completion ---------------------------------------------


def _monic_line(builder: PcBuilder, f: Polynomial, line: int) -> tuple[Polynomial, int]:
    return f.monic(), builder.scale(line, Fraction(1) / f.leading_coefficient())


def _interreduce_tracked(
    builder: PcBuilder,
    items: Sequence[tuple[Polynomial, int]],
    order: MonomialOrder,
) -> list[tuple[Polynomial, int]]:
    key = _sort_key(order)

    def sort_key(t):
        return (key(t[0].leading_monomial()), str(t[0]))

    work = [_monic_line(builder, f, line) for f, line in items if not f.is_zero()]
    changed = True
    while changed:
        changed = False
        work.sort(key=sort_key)
        for i in range(len(work)):
            others = [t for j, t in enumerate(work) if j != i and not t[0].is_zero()]
            if not others:
                continue
            r, r_line = builder.reduce_line(work[i][1], others)
            if r != work[i][0]:
                changed = True
                work[i] = _monic_line(builder, r, r_line) if not r.is_zero() else (r, r_line)
        work = [t for t in work if not t[0].is_zero()]
    work.sort(key=sort_key)
    return work


def pc_buchberger(
    axioms: Sequence[Polynomial],
    d: int,
    order: MonomialOrder = GRLEX,
    working_degree: int | None = None,
) -> tuple[TruncatedBasis, dict[Polynomial, PcProof]]:
    """Truncated completion with a verified derivation per emitted element.

    Same pair selection and reduction rules as groebner.buchberger_truncated,
    so the two agree element for element; this variant additionally records
    every S-polynomial and reduction as proof steps and hands back a
    dependency-pruned proof for each basis element.
    """
    if order.kind != "grlex":
        raise ValueError("pc_buchberger requires a grlex order")
    if d < 0:
        raise ValueError("negative truncation degree")
    working = working_degree if working_degree is not None else max(2 * d, 1)
    if working < d:
        raise ValueError("working degree below truncation degree")

    builder = PcBuilder(axioms, order=order)
    dropped: list[str] = []
    basis: list[tuple[Polynomial, int]] = []
    for i, g in enumerate(builder.axioms):
        if g.is_zero():
            continue
        if g.degree() > working:
            dropped.append(str(g))
            continue
        basis.append(_monic_line(builder, g, builder.axiom(i)))

    deferred: list[tuple[int, int, int]] = []
    pairs = {(i, j) for j in range(len(basis)) for i in range(j)}
    key = _sort_key(order)

    def pair_rank(p):
        i, j = p
        l = basis[i][0].leading_monomial().lcm(basis[j][0].leading_monomial())
        return (l.deg, key(l), i, j)

    while pairs:
        i, j = min(pairs, key=pair_rank)
        pairs.discard((i, j))
        fi, li = basis[i]
        fj, lj = basis[j]
        lmi = fi.leading_monomial()
        lmj = fj.leading_monomial()
        l = lmi.lcm(lmj)
        if l.deg > working:
            deferred.append((i, j, l.deg))
            continue
        if lmi.mul(lmj) == l:
            continue  # coprime leading monomials: S-pair reduces to zero
        s = s_polynomial(fi, fj)
        if s.is_zero():
            continue
        s_line = builder.s_poly_line(fi, li, fj, lj)
        r, r_line = builder.reduce_line(s_line, basis)
        if r.is_zero():
            continue
        basis.append(_monic_line(builder, r, r_line))
        k = len(basis) - 1
        pairs.update((i2, k) for i2 in range(k))

    reduced = _interreduce_tracked(builder, basis, order)
    kept = [(f, line) for f, line in reduced if f.degree() <= d]
    tb = TruncatedBasis(
        tuple(f for f, _ in kept),
        d,
        order,
        True,
        _truncation_metadata(working, deferred, dropped),
    )
    derivations = {f: builder.extract([line])[0] for f, line in kept}
    return tb, derivations


# -- proof files ----------------------------------------------------------------


def proof_to_json_dict(proof: PcProof) -> dict:
    steps = []
    for st in proof.steps:
        rec: dict = {"kind": st.kind, "poly": str(st.result)}
        if st.refs:
            rec["refs"] = list(st.refs)
        if st.scalars is not None:
            rec["scalars"] = [str(st.scalars[0]), str(st.scalars[1])]
        if st.var is not None:
            rec["var"] = st.var
        steps.append(rec)
    out = {"axioms": [str(f) for f in proof.axioms], "steps": steps}
    if proof.domain is not None:
        out["domain"] = [str(v) for v in proof.domain.values]
    return out


def proof_from_json_dict(data: Mapping, order: MonomialOrder = GRLEX) -> PcProof:
    from .ring import parse_polynomial

    if not isinstance(data, Mapping) or "axioms" not in data or "steps" not in data:
        raise ValueError("proof record needs 'axioms' and 'steps'")
    axioms = tuple(parse_polynomial(s, order) for s in data["axioms"])
    domain = None
    if data.get("domain") is not None:
        domain = DomainSpec(tuple(data["domain"]))
    steps = []
    for rec in data["steps"]:
        if not isinstance(rec, Mapping) or "kind" not in rec or "poly" not in rec:
            raise ValueError("step record needs 'kind' and 'poly'")
        if rec["kind"] not in _KINDS:
            raise ValueError("unknown step kind: %r" % (rec["kind"],))
        scalars = None
        if rec.get("scalars") is not None:
            a, b = rec["scalars"]
            scalars = (Fraction(a), Fraction(b))
        steps.append(
            PcStep(
                rec["kind"],
                parse_polynomial(rec["poly"], order),
                tuple(rec.get("refs", ())),
                scalars,
                rec.get("var"),
            )
        )
    return PcProof(axioms, tuple(steps), domain)
