"""Exact sparse multivariate polynomial arithmetic over the rationals.

Everything downstream (basis computation, proof checking, certificate
verification) runs on the types in this module.  Coefficients are
fractions.Fraction, monomials are exponent tuples, and all operations are
pure: no function mutates its arguments.

Variables are identified by nonnegative integers and printed x0, x1, ...
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence


class Monomial:
    """A power product x0^e0 * x1^e1 * ... stored as a trimmed exponent tuple."""

    __slots__ = ("exps", "deg", "_hash")

    def __init__(self, exps: Iterable[int] = ()):
        e = tuple(exps)
        while e and e[-1] == 0:
            e = e[:-1]
        for x in e:
            if x < 0:
                raise ValueError("negative exponent")
        self.exps = e
        self.deg = sum(e)
        self._hash = hash(e)

    def exponent(self, var: int) -> int:
        return self.exps[var] if var < len(self.exps) else 0

    def variables(self) -> tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.exps) if e > 0)

    def mul(self, other: "Monomial") -> "Monomial":
        a, b = self.exps, other.exps
        if len(a) < len(b):
            a, b = b, a
        return Monomial(tuple(x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)))

    def divides(self, other: "Monomial") -> bool:
        a = self.exps
        if len(a) > len(other.exps):
            return False
        b = other.exps
        return all(x <= b[i] for i, x in enumerate(a))

    def div(self, other: "Monomial") -> "Monomial | None":
        """Exact quotient self / other, or None when not divisible."""
        if not other.divides(self):
            return None
        b = other.exps
        return Monomial(tuple(x - (b[i] if i < len(b) else 0) for i, x in enumerate(self.exps)))

    def lcm(self, other: "Monomial") -> "Monomial":
        a, b = self.exps, other.exps
        n = max(len(a), len(b))
        return Monomial(tuple(max(a[i] if i < len(a) else 0, b[i] if i < len(b) else 0) for i in range(n)))

    def gcd(self, other: "Monomial") -> "Monomial":
        a, b = self.exps, other.exps
        n = min(len(a), len(b))
        return Monomial(tuple(min(a[i], b[i]) for i in range(n)))

    def is_one(self) -> bool:
        return not self.exps

    def __eq__(self, other) -> bool:
        return isinstance(other, Monomial) and self.exps == other.exps

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "Monomial(%r)" % (self.exps,)

    def __str__(self) -> str:
        if not self.exps:
            return "1"
        parts = []
        for i, e in enumerate(self.exps):
            if e == 1:
                parts.append("x%d" % i)
            elif e > 1:
                parts.append("x%d^%d" % (i, e))
        return "*".join(parts)


ONE_MONOMIAL = Monomial()


class MonomialOrder:
    """A monomial order: 'lex' or 'grlex', with optional variable precedence.

    precedence lists variable ids from most significant to least.  When
    omitted, x0 beats x1 beats x2 and so on.
    """

    __slots__ = ("kind", "precedence")

    def __init__(self, kind: str, precedence: Sequence[int] | None = None):
        if kind not in ("lex", "grlex"):
            raise ValueError("unknown order kind: %r" % (kind,))
        if precedence is not None:
            p = tuple(precedence)
            if sorted(p) != list(range(len(p))):
                raise ValueError("precedence must be a permutation of 0..n-1")
            precedence = p
        self.kind = kind
        self.precedence = precedence

    def _mapped(self, m: Monomial, width: int) -> tuple[int, ...]:
        if self.precedence is None:
            e = m.exps
            return e + (0,) * (width - len(e))
        if len(m.exps) > len(self.precedence):
            raise ValueError("monomial uses variables outside the order's precedence")
        return tuple(m.exponent(v) for v in self.precedence)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MonomialOrder)
            and self.kind == other.kind
            and self.precedence == other.precedence
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.precedence))

    def __repr__(self) -> str:
        if self.precedence is None:
            return "MonomialOrder(%r)" % (self.kind,)
        return "MonomialOrder(%r, %r)" % (self.kind, self.precedence)


LEX = MonomialOrder("lex")
GRLEX = MonomialOrder("grlex")


def cmp_monomials(a: Monomial, b: Monomial, order: MonomialOrder) -> int:
    """Three-way comparison: -1, 0 or 1 as a <, ==, > b under order."""
    if order.kind == "grlex" and a.deg != b.deg:
        return -1 if a.deg < b.deg else 1
    width = max(len(a.exps), len(b.exps))
    ea = order._mapped(a, width)
    eb = order._mapped(b, width)
    if ea == eb:
        return 0
    return 1 if ea > eb else -1


def _sort_key(order: MonomialOrder):
    """Ascending sort key for monomials under order (fixed-width mapped tuple)."""
    if order.precedence is None:
        # Trimmed exponent tuples never end in zero, so comparing them
        # directly agrees with compare-with-padding: at the first index where
        # one tuple runs out, the longer one still holds a later nonzero.
        if order.kind == "grlex":
            return lambda m: (m.deg, m.exps)
        return lambda m: m.exps

    def key(m: Monomial):
        if order.kind == "grlex":
            return (m.deg, order._mapped(m, len(m.exps)) + (0,) * 64)
        return order._mapped(m, len(m.exps)) + (0,) * 64

    # Appending zeros makes tuple comparison behave like compare-with-padding
    # for any monomials on up to 64 variables, far beyond desk scale.
    return key


class Polynomial:
    """A polynomial with Fraction coefficients tagged with its monomial order."""

    __slots__ = ("terms", "order", "_lm", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None, order: MonomialOrder = GRLEX):
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if type(c) is not Fraction:
                    c = Fraction(c)
                if c:
                    clean[m] = c
        self.terms = clean
        self.order = order
        self._lm: Monomial | None = None
        self._hash: int | None = None

    @classmethod
    def _raw(cls, terms: dict, order: MonomialOrder) -> "Polynomial":
        """Wrap a terms dict known to be clean (Fraction values, no zeros)."""
        p = object.__new__(cls)
        p.terms = terms
        p.order = order
        p._lm = None
        p._hash = None
        return p

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(order: MonomialOrder = GRLEX) -> "Polynomial":
        return Polynomial({}, order)

    @staticmethod
    def constant(c, order: MonomialOrder = GRLEX) -> "Polynomial":
        return Polynomial({ONE_MONOMIAL: Fraction(c)}, order)

    @staticmethod
    def variable(i: int, order: MonomialOrder = GRLEX) -> "Polynomial":
        return Polynomial({Monomial((0,) * i + (1,)): Fraction(1)}, order)

    @staticmethod
    def term(c, m: Monomial, order: MonomialOrder = GRLEX) -> "Polynomial":
        return Polynomial({m: Fraction(c)}, order)

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(m.deg for m in self.terms)

    def leading_monomial(self) -> Monomial:
        if not self.terms:
            raise ValueError("leading term of the zero polynomial (empty input)")
        if self._lm is None:
            key = _sort_key(self.order)
            self._lm = max(self.terms, key=key)
        return self._lm

    def leading_coefficient(self) -> Fraction:
        return self.terms[self.leading_monomial()]

    def coefficient(self, m: Monomial) -> Fraction:
        return self.terms.get(m, Fraction(0))

    def constant_part(self) -> Fraction:
        return self.terms.get(ONE_MONOMIAL, Fraction(0))

    def variables(self) -> tuple[int, ...]:
        seen: set[int] = set()
        for m in self.terms:
            seen.update(m.variables())
        return tuple(sorted(seen))

    def max_norm(self) -> Fraction:
        """Infinity norm: the largest coefficient magnitude (0 for the zero poly)."""
        if not self.terms:
            return Fraction(0)
        return max(abs(c) for c in self.terms.values())

    def bit_size(self) -> int:
        """Bit-encoding size: numerator + denominator + exponent bit lengths."""
        total = 0
        for m, c in self.terms.items():
            total += abs(c.numerator).bit_length() + c.denominator.bit_length() + 1
            total += sum(e.bit_length() for e in m.exps)
        return total

    def sorted_terms(self, reverse: bool = True) -> list[tuple[Monomial, Fraction]]:
        key = _sort_key(self.order)
        return [(m, self.terms[m]) for m in sorted(self.terms, key=key, reverse=reverse)]

    # -- arithmetic --------------------------------------------------------

    def _check_order(self, other: "Polynomial") -> None:
        if self.order != other.order:
            raise ValueError("mixed monomial orders")

    def __add__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other, self.order)
        self._check_order(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(out, self.order)

    def __radd__(self, other) -> "Polynomial":
        return self.__add__(other)

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({m: -c for m, c in self.terms.items()}, self.order)

    def __sub__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other, self.order)
        return self.__add__(other.__neg__())

    def __rsub__(self, other) -> "Polynomial":
        return (self.__neg__()).__add__(Polynomial.constant(other, self.order))

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            c = Fraction(other)
            if c == 0:
                return Polynomial.zero(self.order)
            return Polynomial._raw({m: co * c for m, co in self.terms.items()}, self.order)
        self._check_order(other)
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict[Monomial, Fraction] = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = ma.mul(mb)
                s = out.get(m, 0) + ca * cb
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Polynomial._raw(out, self.order)

    def __rmul__(self, other) -> "Polynomial":
        return self.__mul__(other)

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(1, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def monic(self) -> "Polynomial":
        lc = self.leading_coefficient()
        if lc == 1:
            return self
        return self * (Fraction(1) / lc)

    def mul_monomial(self, m: Monomial, c=Fraction(1)) -> "Polynomial":
        c = Fraction(c)
        if c == 0:
            return Polynomial.zero(self.order)
        return Polynomial._raw({mm.mul(m): cc * c for mm, cc in self.terms.items()}, self.order)

    def with_order(self, order: MonomialOrder) -> "Polynomial":
        return Polynomial(self.terms, order)

    # -- evaluation and substitution ----------------------------------------

    def evaluate(self, point: Sequence) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for i, e in enumerate(m.exps):
                if e:
                    v *= Fraction(point[i]) ** e
            total += v
        return total

    def substitute(self, sub: Mapping[int, "Polynomial"]) -> "Polynomial":
        """Substitute polynomials for variables; unmapped variables stay put."""
        out = Polynomial.zero(self.order)
        powers: dict[tuple[int, int], Polynomial] = {}
        for m, c in self.terms.items():
            part = Polynomial.constant(c, self.order)
            for i, e in enumerate(m.exps):
                if not e:
                    continue
                if i in sub:
                    key = (i, e)
                    if key not in powers:
                        powers[key] = sub[i] ** e
                    part = part * powers[key]
                else:
                    part = part.mul_monomial(Monomial((0,) * i + (e,)))
            out = out + part
        return out

    # -- comparisons and printing -------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            if isinstance(other, (int, Fraction)):
                return self.terms == Polynomial.constant(other, self.order).terms
            return NotImplemented
        return self.order == other.order and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.order, frozenset(self.terms.items())))
        return self._hash

    def __str__(self) -> str:
        return format_polynomial(self)

    def __repr__(self) -> str:
        return "Polynomial(%s)" % format_polynomial(self)


def poly_add(f: Polynomial, g: Polynomial) -> Polynomial:
    """Sum of two polynomials; rejects mixed monomial orders."""
    return f + g


def poly_mul(f: Polynomial, g: Polynomial) -> Polynomial:
    """Product of two polynomials; rejects mixed monomial orders."""
    return f * g


def leading_term(f: Polynomial) -> tuple[Monomial, Fraction]:
    """Leading (monomial, coefficient) pair under f's order."""
    m = f.leading_monomial()
    return m, f.terms[m]


def divide(f: Polynomial, divisors: Sequence[Polynomial]) -> tuple[list[Polynomial], Polynomial]:
    """Multivariate division with remainder.

    Divisors are tried in caller order at every reduction step, so the result
    is deterministic.  Returns (quotients, remainder) with
    f == sum(q*d) + remainder exactly, and no remainder term divisible by any
    divisor's leading monomial.
    """
    if not divisors:
        raise ValueError("empty divisor list")
    order = f.order
    lead: list[tuple[Monomial, Fraction]] = []
    for d in divisors:
        if d.order != order:
            raise ValueError("mixed monomial orders")
        if d.is_zero():
            raise ValueError("zero divisor")
        lead.append(leading_term(d))
    quots = [Polynomial.zero(order) for _ in divisors]
    rem_terms: dict[Monomial, Fraction] = {}
    p = f
    key = _sort_key(order)
    while not p.is_zero():
        m = p.leading_monomial()
        c = p.terms[m]
        for i, (lm, lc) in enumerate(lead):
            q = m.div(lm)
            if q is not None:
                coef = c / lc
                quots[i] = quots[i] + Polynomial.term(coef, q, order)
                p = p - divisors[i].mul_monomial(q, coef)
                break
        else:
            rem_terms[m] = c
            p = p - Polynomial.term(c, m, order)
    return quots, Polynomial(rem_terms, order)


def reduce_mod(f: Polynomial, divisors: Sequence[Polynomial]) -> Polynomial:
    """Remainder of f under division by divisors."""
    return divide(f, divisors)[1] if divisors else f


def s_polynomial(f: Polynomial, g: Polynomial) -> Polynomial:
    """S-polynomial: the lcm-matched cancellation of the two leading terms."""
    if f.order != g.order:
        raise ValueError("mixed monomial orders")
    mf, cf = leading_term(f)
    mg, cg = leading_term(g)
    l = mf.lcm(mg)
    return f.mul_monomial(l.div(mf), Fraction(1) / cf) - g.mul_monomial(l.div(mg), Fraction(1) / cg)


# -- canonical text form -----------------------------------------------------


def _format_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return "%d/%d" % (c.numerator, c.denominator)


def format_polynomial(f: Polynomial) -> str:
    """Canonical string: terms in decreasing order, 'coeff*x<i>^e*...' pieces."""
    if f.is_zero():
        return "0"
    parts: list[str] = []
    for m, c in f.sorted_terms():
        mono = str(m)
        body = _format_coeff(abs(c)) if mono == "1" else "%s*%s" % (_format_coeff(abs(c)), mono)
        if not parts:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)


class PolynomialParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__("%s (at position %d)" % (message, position))
        self.position = position


def parse_polynomial(text: str, order: MonomialOrder = GRLEX) -> Polynomial:
    """Parse the canonical text form back into a Polynomial.

    Accepts 'x0' without an explicit coefficient and '^1' omitted, so every
    string produced by format_polynomial round-trips exactly.
    """
    s = text.strip()
    if not s:
        raise PolynomialParseError("empty polynomial text", 0)
    # Split into signed chunks at top-level '+'/'-' separators.
    chunks: list[tuple[int, str, int]] = []  # (sign, chunk, start offset)
    sign = 1
    i = 0
    n = len(s)
    while i < n:
        while i < n and s[i].isspace():
            i += 1
        if i < n and s[i] in "+-":
            sign = 1 if s[i] == "+" else -1
            i += 1
            while i < n and s[i].isspace():
                i += 1
        start = i
        last = ""
        while i < n:
            ch = s[i]
            if ch in "+-" and last not in "^*":
                break
            if not ch.isspace():
                last = ch
            i += 1
        chunk = s[start:i].strip()
        if not chunk:
            raise PolynomialParseError("missing term", start)
        chunks.append((sign, chunk, start))
        sign = 1
    total = Polynomial.zero(order)
    for sign, chunk, start in chunks:
        coeff = Fraction(sign)
        mono_exps: dict[int, int] = {}
        for piece in chunk.split("*"):
            piece = piece.strip()
            if not piece:
                raise PolynomialParseError("empty factor", start)
            if piece[0] == "x":
                var_part, caret, exp_part = piece.partition("^")
                try:
                    v = int(var_part[1:])
                except ValueError:
                    raise PolynomialParseError("bad variable %r" % piece, start) from None
                e = 1
                if caret:
                    try:
                        e = int(exp_part)
                    except ValueError:
                        raise PolynomialParseError("bad exponent %r" % piece, start) from None
                if v < 0 or e < 0:
                    raise PolynomialParseError("bad factor %r" % piece, start)
                mono_exps[v] = mono_exps.get(v, 0) + e
            else:
                try:
                    coeff *= Fraction(piece)
                except (ValueError, ZeroDivisionError):
                    raise PolynomialParseError("bad coefficient %r" % piece, start) from None
        width = max(mono_exps) + 1 if mono_exps else 0
        m = Monomial(tuple(mono_exps.get(i, 0) for i in range(width)))
        total = total + Polynomial.term(coeff, m, order)
    return total


def poly_from_coeffs(coeffs: Sequence, var: int = 0, order: MonomialOrder = GRLEX) -> Polynomial:
    """Build a univariate polynomial from an ascending coefficient list."""
    terms: dict[Monomial, Fraction] = {}
    for e, c in enumerate(coeffs):
        c = Fraction(c)
        if c:
            terms[Monomial((0,) * var + (e,)) if e else ONE_MONOMIAL] = c
    return Polynomial(terms, order)


def univariate_coeffs(f: Polynomial, var: int | None = None) -> list[Fraction]:
    """Ascending coefficient list of a univariate polynomial.

    Raises if f involves more than one variable.  var pins which variable is
    expected; a constant polynomial is fine either way.
    """
    vs = f.variables()
    if len(vs) > 1:
        raise ValueError("polynomial is not univariate")
    if vs and var is not None and vs[0] != var:
        raise ValueError("expected a polynomial in x%d" % var)
    v = vs[0] if vs else (var if var is not None else 0)
    deg = f.degree()
    out = [Fraction(0)] * (max(deg, 0) + 1)
    for m, c in f.terms.items():
        out[m.exponent(v)] = c
    return out
