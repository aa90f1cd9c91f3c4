"""Finite-domain CSP instances and their polynomial encodings.

An instance is a list of constraints (scope, allowed tuples) over one shared
rational domain.  encode_instance turns it into a polynomial system whose
zero set inside the domain grid is exactly the solution set: one canonical
constraint polynomial per constraint plus one domain polynomial per variable.

The semilattice half of the module builds binary encodings: an injective map
from domain values to bit tuples that turns semilattice-closed instances into
Boolean instances closed under componentwise Min or Max, together with the
decoder, gate and bit-extractor polynomials used to move proofs back.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .ring import (
    GRLEX,
    Monomial,
    MonomialOrder,
    Polynomial,
    divide,
    parse_polynomial,
)


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class DomainSpec:
    """An ordered tuple of distinct rational domain values."""

    values: tuple[Fraction, ...]

    def __init__(self, values: Iterable):
        vals = tuple(_frac(v) for v in values)
        if not vals:
            raise ValueError("empty domain")
        if len(set(vals)) != len(vals):
            raise ValueError("domain values must be distinct")
        object.__setattr__(self, "values", vals)

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def beta(self) -> int:
        """Bits needed for the worst domain value (numerator plus denominator)."""
        return max(abs(v.numerator).bit_length() + v.denominator.bit_length() for v in self.values)

    def __contains__(self, x) -> bool:
        return _frac(x) in self.values


BOOLEAN_DOMAIN = DomainSpec((0, 1))


@dataclass(frozen=True)
class Constraint:
    scope: tuple[int, ...]
    tuples: frozenset[tuple[Fraction, ...]]

    def sorted_tuples(self) -> list[tuple[Fraction, ...]]:
        return sorted(self.tuples)


@dataclass(frozen=True)
class CspInstance:
    n: int
    domain: DomainSpec
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("instance needs at least one variable")
        for c in self.constraints:
            if any(v < 0 or v >= self.n for v in c.scope):
                raise ValueError("constraint scope outside variable range")
            if len(set(c.scope)) != len(c.scope):
                raise ValueError("repeated variable in scope")
            for t in c.tuples:
                if len(t) != len(c.scope):
                    raise ValueError("tuple arity does not match scope")
                if any(x not in self.domain for x in t):
                    raise ValueError("tuple value outside domain")

    def solutions(self) -> list[tuple[Fraction, ...]]:
        """Exhaustive solution enumeration (desk scale only)."""
        out = []
        for point in itertools.product(self.domain.values, repeat=self.n):
            ok = True
            for c in self.constraints:
                if tuple(point[v] for v in c.scope) not in c.tuples:
                    ok = False
                    break
            if ok:
                out.append(point)
        return out


def make_instance(n: int, domain: Iterable, constraints: Iterable[tuple[Sequence[int], Iterable]]) -> CspInstance:
    dom = domain if isinstance(domain, DomainSpec) else DomainSpec(domain)
    cons = []
    for scope, tuples in constraints:
        cons.append(
            Constraint(tuple(scope), frozenset(tuple(_frac(x) for x in t) for t in tuples))
        )
    return CspInstance(n, dom, tuple(cons))


# -- single-variable polynomials ---------------------------------------------


def domain_polynomial(domain: DomainSpec, var: int, order: MonomialOrder = GRLEX) -> Polynomial:
    """Monic product of (x_var - a) over the domain values."""
    x = Polynomial.variable(var, order)
    f = Polynomial.constant(1, order)
    for a in domain.values:
        f = f * (x - Polynomial.constant(a, order))
    return f


def lagrange_interpolate(points: Sequence[tuple], var: int = 0, order: MonomialOrder = GRLEX) -> Polynomial:
    """Unique degree < len(points) polynomial in x_var through the points."""
    pts = [(_frac(a), _frac(b)) for a, b in points]
    xs = [a for a, _ in pts]
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate interpolation abscissa")
    x = Polynomial.variable(var, order)
    total = Polynomial.zero(order)
    for i, (xi, yi) in enumerate(pts):
        if yi == 0:
            continue
        num = Polynomial.constant(yi, order)
        for j, (xj, _) in enumerate(pts):
            if j != i:
                num = num * (x - Polynomial.constant(xj, order)) * (Fraction(1) / (xi - xj))
        total = total + num
    return total


def indicator_polynomial(domain: DomainSpec, value, var: int, order: MonomialOrder = GRLEX) -> Polynomial:
    """The Lagrange basis polynomial: 1 at value, 0 at other domain values."""
    v = _frac(value)
    if v not in domain:
        raise ValueError("value outside domain")
    return lagrange_interpolate([(a, 1 if a == v else 0) for a in domain.values], var, order)


def constraint_polynomial(
    domain: DomainSpec, scope: Sequence[int], tuples: Iterable, order: MonomialOrder = GRLEX
) -> Polynomial:
    """Canonical polynomial vanishing on exactly the allowed tuples.

    Product of (1 - indicator of t) over allowed tuples, reduced modulo the
    scope's domain polynomials after every factor so per-variable degrees stay
    below the domain size.
    """
    scope = tuple(scope)
    dpolys = [domain_polynomial(domain, v, order) for v in scope]
    allowed = sorted(tuple(_frac(x) for x in t) for t in set(map(tuple, tuples)))
    acc = Polynomial.constant(1, order)
    for t in allowed:
        chi = Polynomial.constant(1, order)
        for v, val in zip(scope, t):
            chi = chi * indicator_polynomial(domain, val, v, order)
        acc = acc * (Polynomial.constant(1, order) - chi)
        acc = divide(acc, dpolys)[1]
    return acc


def encode_instance(inst: CspInstance, order: MonomialOrder = GRLEX) -> list[Polynomial]:
    """Constraint polynomials (zero ones omitted) followed by domain polynomials."""
    out = []
    for c in inst.constraints:
        f = constraint_polynomial(inst.domain, c.scope, c.tuples, order)
        if not f.is_zero():
            out.append(f)
    for v in range(inst.n):
        out.append(domain_polynomial(inst.domain, v, order))
    return out


# -- semilattices and binary encodings ----------------------------------------


class SemilatticeLawError(ValueError):
    def __init__(self, law: str, witness):
        super().__init__("semilattice law violated: %s at %s" % (law, witness))
        self.law = law
        self.witness = witness


@dataclass(frozen=True)
class SemilatticeStructure:
    """A commutative, associative, idempotent binary operation on the domain."""

    domain: DomainSpec
    op: dict = field(hash=False)
    kind: str = "meet"

    def __init__(self, domain: DomainSpec, op: Mapping, kind: str = "meet"):
        if kind not in ("meet", "join"):
            raise ValueError("kind must be 'meet' or 'join'")
        table = {}
        vals = domain.values
        for a in vals:
            for b in vals:
                key = (a, b)
                if key not in op:
                    raise SemilatticeLawError("totality", key)
                c = _frac(op[key])
                if c not in domain:
                    raise SemilatticeLawError("closure", (a, b, c))
                table[key] = c
        for a in vals:
            if table[(a, a)] != a:
                raise SemilatticeLawError("idempotency", (a,))
            for b in vals:
                if table[(a, b)] != table[(b, a)]:
                    raise SemilatticeLawError("commutativity", (a, b))
                for c in vals:
                    if table[(table[(a, b)], c)] != table[(a, table[(b, c)])]:
                        raise SemilatticeLawError("associativity", (a, b, c))
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "op", table)
        object.__setattr__(self, "kind", kind)

    def apply(self, a, b) -> Fraction:
        return self.op[(_frac(a), _frac(b))]

    def below(self, a, b) -> bool:
        """The induced order: a below b (meet: a = a op b; join: b = a op b)."""
        a, b = _frac(a), _frac(b)
        return self.op[(a, b)] == (a if self.kind == "meet" else b)

    def fold(self) -> Fraction:
        """Meet (or join) of the whole domain: the dropped-column element."""
        vals = self.domain.values
        acc = vals[0]
        for v in vals[1:]:
            acc = self.op[(acc, v)]
        return acc


def min_semilattice(domain: DomainSpec) -> SemilatticeStructure:
    return SemilatticeStructure(
        domain, {(a, b): min(a, b) for a in domain.values for b in domain.values}, "meet"
    )


def max_semilattice(domain: DomainSpec) -> SemilatticeStructure:
    return SemilatticeStructure(
        domain, {(a, b): max(a, b) for a in domain.values for b in domain.values}, "join"
    )


@dataclass(frozen=True)
class BinaryEncoding:
    structure: SemilatticeStructure
    mu: dict = field(hash=False)
    inverse: dict = field(hash=False)
    dropped_column: int = 0

    @property
    def width(self) -> int:
        return self.structure.domain.size - 1

    def image(self) -> list[tuple[int, ...]]:
        return sorted(self.mu.values())


def semilattice_encoding(s: SemilatticeStructure) -> BinaryEncoding:
    """Injective bit encoding whose image is closed under componentwise Min
    (meet structures) or Max (join structures).

    Meet: bit j of mu(d) is 1 iff column element d_j is below d; the column of
    the global meet (always 1) is dropped.  Join: bit j is 1 iff d is NOT
    below d_j; the column of the global join (always 0) is dropped.
    """
    vals = s.domain.values
    bottom = s.fold()
    dropped = vals.index(bottom)
    mu = {}
    for d in vals:
        bits = []
        for j, e in enumerate(vals):
            if j == dropped:
                continue
            if s.kind == "meet":
                bits.append(1 if s.below(e, d) else 0)
            else:
                bits.append(0 if s.below(d, e) else 1)
        mu[d] = tuple(bits)
    inverse = {bits: d for d, bits in mu.items()}
    if len(inverse) != len(vals):
        raise ValueError("encoding failed to separate domain values")
    return BinaryEncoding(s, mu, inverse, dropped)


def bit_extractors(enc: BinaryEncoding, var: int = 0, order: MonomialOrder = GRLEX) -> list[Polynomial]:
    """Univariate polynomials Q_j with Q_j(d) = bit j of mu(d) for d in the domain."""
    vals = enc.structure.domain.values
    out = []
    for j in range(enc.width):
        out.append(lagrange_interpolate([(d, enc.mu[d][j]) for d in vals], var, order))
    return out


def decoder_polynomial(enc: BinaryEncoding, bit_vars: Sequence[int], order: MonomialOrder = GRLEX) -> Polynomial:
    """Multilinear decoder: maps mu(d) back to d on the bit variables given."""
    if len(bit_vars) != enc.width:
        raise ValueError("bit variable count does not match encoding width")
    total = Polynomial.zero(order)
    one = Polynomial.constant(1, order)
    for d in sorted(enc.mu):
        if d == 0:
            continue
        part = Polynomial.constant(d, order)
        for j, y in enumerate(bit_vars):
            yv = Polynomial.variable(y, order)
            part = part * (yv if enc.mu[d][j] else one - yv)
        total = total + part
    return total


def gate_polynomial(enc: BinaryEncoding, bit_vars: Sequence[int], order: MonomialOrder = GRLEX) -> Polynomial:
    """Vanishes on exactly the encoding image within the Boolean cube."""
    if len(bit_vars) != enc.width:
        raise ValueError("bit variable count does not match encoding width")
    one = Polynomial.constant(1, order)
    total = one
    for v in enc.image():
        prod = one
        for j, y in enumerate(bit_vars):
            yv = Polynomial.variable(y, order)
            prod = prod * (one - Fraction(v[j]) + yv)
        total = total * (one - prod)
    return total


@dataclass(frozen=True)
class BooleanizedInstance:
    """A Boolean view of a semilattice-closed instance.

    instance: relational Boolean CSP (constraint images plus one gate relation
    per original variable).  polynomials: the composed polynomial view, namely
    the original constraint polynomials evaluated at the decoders, the gate
    polynomials, and the Boolean domain polynomials.
    """

    instance: CspInstance
    encoding: BinaryEncoding
    varmap: tuple[tuple[int, ...], ...]
    constraint_polys: tuple[Polynomial, ...]
    gate_polys: tuple[Polynomial, ...]
    bit_axioms: tuple[Polynomial, ...]

    def all_polynomials(self) -> list[Polynomial]:
        return list(self.constraint_polys) + list(self.gate_polys) + list(self.bit_axioms)


def booleanize_instance(inst: CspInstance, enc: BinaryEncoding, order: MonomialOrder = GRLEX) -> BooleanizedInstance:
    if enc.structure.domain != inst.domain:
        raise ValueError("encoding domain does not match instance domain")
    u = enc.width
    varmap = tuple(tuple(range(i * u, (i + 1) * u)) for i in range(inst.n))
    n_bits = inst.n * u

    rel_constraints = []
    for c in inst.constraints:
        bit_scope = tuple(b for v in c.scope for b in varmap[v])
        bit_tuples = set()
        for t in c.tuples:
            bits = tuple(Fraction(b) for val in t for b in enc.mu[val])
            bit_tuples.add(bits)
        rel_constraints.append(Constraint(bit_scope, frozenset(bit_tuples)))
    image = [tuple(Fraction(b) for b in bits) for bits in enc.image()]
    for v in range(inst.n):
        rel_constraints.append(Constraint(varmap[v], frozenset(image)))
    bool_inst = CspInstance(n_bits, BOOLEAN_DOMAIN, tuple(rel_constraints))

    decoders = {v: decoder_polynomial(enc, varmap[v], order) for v in range(inst.n)}
    cpolys = []
    for c in inst.constraints:
        f = constraint_polynomial(inst.domain, c.scope, c.tuples, order)
        if f.is_zero():
            continue
        cpolys.append(f.substitute(decoders))
    gates = tuple(gate_polynomial(enc, varmap[v], order) for v in range(inst.n))
    bits = tuple(
        domain_polynomial(BOOLEAN_DOMAIN, b, order) for b in range(n_bits)
    )
    return BooleanizedInstance(bool_inst, enc, varmap, tuple(cpolys), gates, bits)


def pullback_polynomial(
    f: Polynomial,
    varmap: Sequence[Sequence[int]],
    extractors: Sequence[Polynomial],
    order: MonomialOrder = GRLEX,
) -> Polynomial:
    """Substitute Q_j(x_i) for bit variable y_ij; exact, no reduction."""
    sub = {}
    for i, bits in enumerate(varmap):
        for j, y in enumerate(bits):
            # extractor templates live in x0; move them onto x_i
            sub[y] = extractors[j].substitute({0: Polynomial.variable(i, order)})
    return f.substitute(sub)


# -- serialization -------------------------------------------------------------


def _frac_to_json(x: Fraction):
    if x.denominator == 1:
        return x.numerator
    return "%d/%d" % (x.numerator, x.denominator)


def instance_to_json_dict(inst: CspInstance) -> dict:
    return {
        "domain": [_frac_to_json(v) for v in inst.domain.values],
        "n": inst.n,
        "constraints": [
            {
                "scope": list(c.scope),
                "tuples": [[_frac_to_json(x) for x in t] for t in c.sorted_tuples()],
            }
            for c in inst.constraints
        ],
    }


def instance_from_json_dict(data: Mapping) -> CspInstance:
    try:
        domain = DomainSpec(data["domain"])
        n = int(data["n"])
        constraints = [(c["scope"], c["tuples"]) for c in data.get("constraints", [])]
    except (KeyError, TypeError) as e:
        raise ValueError("malformed instance object: %s" % (e,)) from None
    return make_instance(n, domain, constraints)


def parse_dimacs(text: str) -> tuple[CspInstance, list[tuple[int, ...]]]:
    """DIMACS CNF to a Boolean instance plus the raw signed clause list.

    DIMACS variables are 1-based; instance variables are 0-based.
    """
    clauses: list[tuple[int, ...]] = []
    nvars = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError("line %d: bad problem line" % lineno)
            nvars = int(parts[2])
            continue
        try:
            lits = [int(tok) for tok in line.split()]
        except ValueError:
            raise ValueError("line %d: bad literal" % lineno) from None
        if not lits or lits[-1] != 0:
            raise ValueError("line %d: clause must end with 0" % lineno)
        lits = lits[:-1]
        if not lits:
            raise ValueError("line %d: empty clause" % lineno)
        clauses.append(tuple(lits))
        nvars = max(nvars, max(abs(l) for l in lits))
    if nvars == 0:
        raise ValueError("no variables declared or used")
    constraints = []
    for cl in clauses:
        scope = tuple(abs(l) - 1 for l in cl)
        if len(set(scope)) != len(scope):
            # drop duplicate literals by collapsing onto distinct variables
            seen = {}
            for l in cl:
                v = abs(l) - 1
                seen.setdefault(v, set()).add(l > 0)
            scope = tuple(seen)
            sat = []
            for bits in itertools.product((0, 1), repeat=len(scope)):
                if any((bits[i] == 1) in seen[v] for i, v in enumerate(scope)):
                    sat.append(tuple(Fraction(b) for b in bits))
            constraints.append((scope, sat))
            continue
        sat = []
        for bits in itertools.product((0, 1), repeat=len(scope)):
            ok = False
            for i, l in enumerate(cl):
                if (bits[i] == 1) == (l > 0):
                    ok = True
                    break
            if ok:
                sat.append(tuple(Fraction(b) for b in bits))
        constraints.append((scope, sat))
    return make_instance(nvars, BOOLEAN_DOMAIN, constraints), clauses
