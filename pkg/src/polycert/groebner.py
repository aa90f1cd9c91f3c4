"""Degree-truncated Groebner bases over the rationals.

buchberger_truncated runs Buchberger's completion under grlex with a working
degree cap (default twice the reported truncation degree); S-pairs whose lcm
exceeds the cap are deferred and recorded in the result metadata rather than
silently dropped.  vanishing_ideal_basis computes the reduced basis of the
ideal of a finite point set directly by evaluation (Buchberger-Moller); it is
the enumeration-grade oracle that everything else is validated against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .ring import (
    GRLEX,
    Monomial,
    MonomialOrder,
    Polynomial,
    cmp_monomials,
    divide,
    leading_term,
    s_polynomial,
    _sort_key,
)


class DegreeOutOfRangeError(ValueError):
    """Raised when a query exceeds the basis truncation degree."""


@dataclass(frozen=True)
class TruncatedBasis:
    elements: tuple[Polynomial, ...]
    truncation_degree: int
    order: MonomialOrder
    reduced: bool
    metadata: dict = field(default_factory=dict, compare=False)

    def element_strings(self) -> list[str]:
        return [str(g) for g in self.elements]


def _sorted_elements(elems: Sequence[Polynomial], order: MonomialOrder) -> tuple[Polynomial, ...]:
    key = _sort_key(order)
    return tuple(sorted(elems, key=lambda g: (key(g.leading_monomial()), str(g))))


def interreduce(elems: Sequence[Polynomial], order: MonomialOrder) -> tuple[Polynomial, ...]:
    """Fixpoint inter-reduction: each element fully reduced by the others, monic."""
    work = [g.monic() for g in elems if not g.is_zero()]
    changed = True
    while changed:
        changed = False
        work = list(_sorted_elements(work, order))
        for i in range(len(work)):
            others = [g for j, g in enumerate(work) if j != i and not g.is_zero()]
            if not others:
                continue
            r = divide(work[i], others)[1]
            if r != work[i]:
                changed = True
                work[i] = r.monic() if not r.is_zero() else r
        work = [g for g in work if not g.is_zero()]
    return _sorted_elements(work, order)


def buchberger_truncated(
    generators: Sequence[Polynomial],
    d: int,
    order: MonomialOrder = GRLEX,
    working_degree: int | None = None,
) -> TruncatedBasis:
    """Reduced degree-d truncated basis of the ideal the generators span.

    Only grlex is supported: under a graded order, division of a degree-d
    query against the degree-d slice of the full reduced basis settles
    membership, which is the property the truncation relies on.
    """
    if order.kind != "grlex":
        raise ValueError("buchberger_truncated requires a grlex order")
    if d < 0:
        raise ValueError("negative truncation degree")
    working = working_degree if working_degree is not None else max(2 * d, 1)
    if working < d:
        raise ValueError("working degree below truncation degree")

    dropped = []
    basis: list[Polynomial] = []
    for g in generators:
        if g.order != order:
            raise ValueError("generator order does not match requested order")
        if g.is_zero():
            continue
        if g.degree() > working:
            dropped.append(str(g))
            continue
        basis.append(g.monic())

    deferred: list[tuple[int, int, int]] = []
    pairs: set[tuple[int, int]] = set()

    def queue_pairs_for(k: int) -> None:
        for i in range(k):
            pairs.add((i, k))

    for k in range(len(basis)):
        queue_pairs_for(k)

    key = _sort_key(order)

    def pair_rank(p: tuple[int, int]):
        i, j = p
        l = basis[i].leading_monomial().lcm(basis[j].leading_monomial())
        return (l.deg, key(l), i, j)

    while pairs:
        i, j = min(pairs, key=pair_rank)
        pairs.discard((i, j))
        lmi = basis[i].leading_monomial()
        lmj = basis[j].leading_monomial()
        l = lmi.lcm(lmj)
        if l.deg > working:
            deferred.append((i, j, l.deg))
            continue
        if lmi.mul(lmj) == l:
            continue  # coprime leading monomials: S-pair reduces to zero
        s = s_polynomial(basis[i], basis[j])
        if s.is_zero():
            continue
        r = divide(s, basis)[1]
        if r.is_zero():
            continue
        basis.append(r.monic())
        queue_pairs_for(len(basis) - 1)

    reduced = interreduce(basis, order)
    truncated = tuple(g for g in reduced if g.degree() <= d)
    return TruncatedBasis(truncated, d, order, True, _truncation_metadata(working, deferred, dropped))


def _truncation_metadata(working: int, deferred: list, dropped: list) -> dict:
    return {
        "working_degree": working,
        "rationale": "working cap = max(2*d, 1): S-pair degree growth for radical "
        "finite-domain ideals stays within twice the query degree at this scale; "
        "deferred pairs are recorded so a too-small cap is diagnosable",
        "deferred_pairs": deferred,
        "dropped_generators": dropped,
    }


def reduce_basis(basis: TruncatedBasis) -> TruncatedBasis:
    """Monic, inter-reduced form of the same basis; idempotent."""
    reduced = interreduce(basis.elements, basis.order)
    return TruncatedBasis(reduced, basis.truncation_degree, basis.order, True, dict(basis.metadata))


def make_basis(
    elements: Sequence[Polynomial],
    d: int,
    order: MonomialOrder = GRLEX,
    reduced: bool = False,
    metadata: dict | None = None,
) -> TruncatedBasis:
    return TruncatedBasis(_sorted_elements(elements, order), d, order, reduced, metadata or {})


def ideal_membership(f: Polynomial, basis: TruncatedBasis) -> bool:
    """Zero-remainder test against the truncated basis.

    Queries above the truncation degree are out of range: the basis carries no
    information about them.
    """
    if f.degree() > basis.truncation_degree:
        raise DegreeOutOfRangeError(
            "query degree %d exceeds truncation degree %d" % (f.degree(), basis.truncation_degree)
        )
    if f.is_zero():
        return True
    if not basis.elements:
        return False
    return divide(f, list(basis.elements))[1].is_zero()


# -- evaluation oracle --------------------------------------------------------


def monomials_of_degree(n: int, deg: int) -> list[Monomial]:
    """All monomials on n variables of exact total degree deg, grlex-ascending."""
    out: list[Monomial] = []

    def rec(prefix: list[int], remaining: int, pos: int) -> None:
        if pos == n - 1:
            out.append(Monomial(tuple(prefix + [remaining])))
            return
        for e in range(remaining + 1):
            rec(prefix + [e], remaining - e, pos + 1)

    if n == 0:
        return [Monomial()] if deg == 0 else []
    rec([], deg, 0)
    out.sort(key=_sort_key(GRLEX))
    return out


def monomials_up_to_degree(n: int, deg: int) -> list[Monomial]:
    out: list[Monomial] = []
    for k in range(deg + 1):
        out.extend(monomials_of_degree(n, k))
    return out


def vanishing_ideal_basis(
    points: Sequence[Sequence], n: int, order: MonomialOrder = GRLEX
) -> TruncatedBasis:
    """Reduced basis of the ideal of all polynomials vanishing on the points.

    Direct evaluation method: monomials are examined in increasing order; each
    either joins the standard set (its evaluation vector is independent) or
    yields a basis element (the dependency, read off a Gaussian elimination).
    Exact over Fraction.  Empty point set gives the unit ideal, basis {1}.
    """
    if order.kind != "grlex":
        raise ValueError("vanishing_ideal_basis requires a grlex order")
    pts = [tuple(Fraction(x) for x in p) for p in points]
    for p in pts:
        if len(p) != n:
            raise ValueError("point arity does not match n")
    if len(set(pts)) != len(pts):
        raise ValueError("duplicate points")
    if not pts:
        one = Polynomial.constant(1, order)
        return TruncatedBasis((one,), 0, order, True, {"points": 0})

    npts = len(pts)
    standard: list[Monomial] = []
    # rows[i]: reduced evaluation vector with pivot pivots[i]; combo[i]: the
    # coordinates of that vector over the standard monomials
    rows: list[list[Fraction]] = []
    pivots: list[int] = []
    combos: list[dict[Monomial, Fraction]] = []
    basis: list[Polynomial] = []
    deg = 0
    while True:
        frontier_alive = False
        for m in monomials_of_degree(n, deg):
            if any(g.leading_monomial().divides(m) for g in basis):
                continue
            frontier_alive = True
            vec = [Fraction(1) for _ in pts]
            for i, e in enumerate(m.exps):
                if e:
                    for k, p in enumerate(pts):
                        vec[k] *= p[i] ** e
            combo: dict[Monomial, Fraction] = {m: Fraction(1)}
            for r, piv, cmb in zip(rows, pivots, combos):
                c = vec[piv]
                if c:
                    for k in range(npts):
                        vec[k] -= c * r[k]
                    for mm, cc in cmb.items():
                        combo[mm] = combo.get(mm, Fraction(0)) - c * cc
            piv = next((k for k, v in enumerate(vec) if v != 0), None)
            if piv is None:
                basis.append(Polynomial(combo, order))
            else:
                scale = Fraction(1) / vec[piv]
                vec = [v * scale for v in vec]
                combo = {mm: cc * scale for mm, cc in combo.items()}
                # keep earlier rows reduced against the new pivot
                for r, cmb in zip(rows, combos):
                    c = r[piv]
                    if c:
                        for k in range(npts):
                            r[k] -= c * vec[k]
                        for mm, cc in combo.items():
                            cmb[mm] = cmb.get(mm, Fraction(0)) - c * cc
                rows.append(vec)
                pivots.append(piv)
                combos.append(combo)
                standard.append(m)
        if not frontier_alive:
            break
        deg += 1
    maxdeg = max((g.degree() for g in basis), default=0)
    elems = _sorted_elements(basis, order)
    return TruncatedBasis(elems, maxdeg, order, True, {"points": npts})


def vanishes_on(f: Polynomial, points: Sequence[Sequence]) -> bool:
    """Brute-force vanishing check, the other half of the oracle pair."""
    return all(f.evaluate(list(p)) == 0 for p in points)


def enumerate_zero_set(
    polys: Sequence[Polynomial], domain_values: Sequence, n: int
) -> list[tuple[Fraction, ...]]:
    """All points of the domain grid where every polynomial vanishes."""
    vals = [Fraction(v) for v in domain_values]
    out = []
    for p in itertools.product(vals, repeat=n):
        if all(f.evaluate(p) == 0 for f in polys):
            out.append(p)
    return out
