"""Moment matrices of finite point sets and exact spectral checks.

The moment matrix of a point set S at degree d averages v(a)v(a)^T over S,
where v enumerates the monomials of degree at most d. Everything here runs
over Fractions: characteristic polynomials come from the division-free
Berkowitz algorithm on an integer scaling of the matrix, eigenvalues are
located by Sturm-chain bisection, and the Gram rewriting of certificates
uses exact kernel projections instead of numeric eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .groebner import monomials_up_to_degree
from .ring import GRLEX, Monomial, MonomialOrder, Polynomial
from .sos import (
    SosCertificate,
    _c_deg,
    _c_deriv,
    _c_divmod,
    _c_eval,
    _c_gcd,
    _c_trim,
    exact_ldl,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class MomentMatrix:
    """Averaged outer products of the monomial vector over a finite point set."""

    entries: tuple[tuple[Fraction, ...], ...]
    variety_size: int
    d: int
    n: int
    basis: tuple[Monomial, ...]


@dataclass(frozen=True)
class SpectralReport:
    rich: bool
    delta: Fraction
    zero_multiplicity: int
    min_nonzero_lo: Fraction | None
    min_nonzero_hi: Fraction | None
    integer_bound: Fraction


@dataclass(frozen=True)
class GramRewrite:
    squares: tuple[tuple[Fraction, Polynomial], ...]
    ideal_poly: Polynomial
    trace: Fraction
    trace_bound: Fraction


def canonical_points(points: Sequence[Sequence]) -> list[tuple[Fraction, ...]]:
    """Deduplicated, sorted, Fraction-coordinate copies of the given points."""
    if not points:
        raise ValueError("empty input")
    n = len(points[0])
    out = set()
    for p in points:
        if len(p) != n:
            raise ValueError("points of mixed dimension")
        out.add(tuple(Fraction(c) for c in p))
    return sorted(out)


def moment_matrix(points: Sequence[Sequence], d: int, order: MonomialOrder = GRLEX) -> MomentMatrix:
    """Exact moment matrix of the point set at degree d."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    pts = canonical_points(points)
    n = len(pts[0])
    basis = tuple(monomials_up_to_degree(n, d))
    size = len(pts)
    vectors = []
    for p in pts:
        row = []
        for m in basis:
            val = _ONE
            for j, e in enumerate(m.exps):
                val *= p[j] ** e
            row.append(val)
        vectors.append(row)
    dim = len(basis)
    entries = [[_ZERO] * dim for _ in range(dim)]
    for row in vectors:
        for i in range(dim):
            if row[i]:
                for j in range(i, dim):
                    entries[i][j] += row[i] * row[j]
    for i in range(dim):
        for j in range(i):
            entries[i][j] = entries[j][i]
    frozen = tuple(tuple(c / size for c in row) for row in entries)
    return MomentMatrix(frozen, size, d, n, basis)


def _format_monomial(m: Monomial) -> str:
    if m.is_one():
        return "1"
    parts = []
    for j, e in enumerate(m.exps):
        if e == 1:
            parts.append("x%d" % j)
        elif e > 1:
            parts.append("x%d^%d" % (j, e))
    return "*".join(parts)


def format_moment_matrix(matrix: MomentMatrix) -> str:
    """Monomial-basis header followed by one row of rational entries per line."""
    lines = [" ".join(_format_monomial(m) for m in matrix.basis)]
    for row in matrix.entries:
        lines.append(" ".join(str(c) for c in row))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def _nullspace(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Basis of the right kernel via fraction-exact Gaussian elimination."""
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for c in free:
        v = [_ZERO] * ncols
        v[c] = _ONE
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][c]
        basis.append(v)
    return basis


def _mat_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0])
    out = [[_ZERO] * cols for _ in range(rows)]
    for i in range(rows):
        for k in range(inner):
            x = a[i][k]
            if x:
                for j in range(cols):
                    if b[k][j]:
                        out[i][j] += x * b[k][j]
    return out


def _mat_inverse(a):
    n = len(a)
    m = [list(row) + [_ONE if i == j else _ZERO for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        pivot_row = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot_row is None:
            raise ValueError("singular matrix")
        m[c], m[pivot_row] = m[pivot_row], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [row[n:] for row in m]


def kernel_vectors(matrix: MomentMatrix) -> list[list[Fraction]]:
    return _nullspace(matrix.entries)


def kernel_polynomials(matrix: MomentMatrix, order: MonomialOrder = GRLEX) -> list[Polynomial]:
    """Polynomials whose coefficient vectors span the kernel; they vanish on S."""
    out = []
    for v in kernel_vectors(matrix):
        terms = {m: c for m, c in zip(matrix.basis, v) if c != 0}
        out.append(Polynomial(terms, order))
    return out


# ---------------------------------------------------------------------------
# characteristic polynomial and root isolation


def berkowitz_charpoly(matrix: Sequence[Sequence]) -> list[Fraction]:
    """Monic characteristic polynomial det(x*I - A), ascending coefficients."""
    n = len(matrix)
    if n == 0:
        return [_ONE]
    a = [[Fraction(x) for x in row] for row in matrix]
    # descending coefficient vector, built by Toeplitz products over leading
    # principal submatrices (division-free)
    coeffs = [_ONE, -a[0][0]]
    for i in range(1, n):
        row = a[i][:i]
        col = [a[j][i] for j in range(i)]
        toeplitz = [_ONE, -a[i][i]]
        v = col
        for _ in range(i - 1):
            toeplitz.append(-sum(x * y for x, y in zip(row, v)))
            v = [sum(a[r][c] * v[c] for c in range(i)) for r in range(i)]
        toeplitz.append(-sum(x * y for x, y in zip(row, v)))
        new = [_ZERO] * (i + 2)
        for r in range(i + 2):
            acc = _ZERO
            for k in range(min(r, i) + 1):
                acc += toeplitz[r - k] * coeffs[k]
            new[r] = acc
        coeffs = new
    return list(reversed(coeffs))


def _radical(g: list[Fraction]) -> list[Fraction]:
    gg = _c_gcd(g, _c_deriv(g))
    if _c_deg(gg) == 0:
        return list(g)
    quo, rem = _c_divmod(g, gg)
    if rem:
        raise RuntimeError("inexact division while removing repeated roots")
    return quo


def _sturm_chain(g: list[Fraction]) -> list[list[Fraction]]:
    chain = [list(g), _c_deriv(g)]
    while chain[-1]:
        rem = _c_divmod(chain[-2], chain[-1])[1]
        if not rem:
            break
        chain.append([-c for c in rem])
    return chain


def _variations(chain: Sequence[Sequence[Fraction]], x: Fraction) -> int:
    signs = []
    for p in chain:
        v = _c_eval(p, x)
        if v:
            signs.append(1 if v > 0 else -1)
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _count_roots(chain, a: Fraction, b: Fraction) -> int:
    """Distinct roots in (a, b] for a squarefree chain head not vanishing at a, b."""
    return _variations(chain, a) - _variations(chain, b)


def _root_bound(g: list[Fraction]) -> Fraction:
    lc = abs(g[-1])
    return 1 + max(abs(c) for c in g) / lc


def _isolate_smallest_positive_root(
    g: list[Fraction], tol: Fraction
) -> tuple[Fraction, Fraction] | None:
    """Interval (lo, hi] around the smallest positive root of squarefree g."""
    chain = _sturm_chain(g)
    hi = _root_bound(g)
    v0 = _variations(chain, _ZERO)
    if v0 - _variations(chain, hi) == 0:
        return None
    lo = _ZERO
    while hi - lo > tol or lo == 0:
        mid = (lo + hi) / 2
        if _c_eval(g, mid) == 0:
            hi = mid
            continue
        if v0 - _variations(chain, mid) >= 1:
            hi = mid
        else:
            lo = mid
    if _c_eval(g, hi) == 0:
        # g is squarefree, so hi is a simple root; collapse to a point when no
        # smaller root hides inside the interval
        quotient, _ = _c_divmod(g, [-hi, _ONE])
        short_chain = _sturm_chain(quotient)
        if _count_roots(short_chain, _ZERO, hi) == 0:
            return hi, hi
    return lo, hi


def integer_scale(matrix: MomentMatrix) -> int:
    """Smallest s such that s * variety_size * M has integer entries."""
    denom = 1
    for row in matrix.entries:
        for c in row:
            denom = lcm(denom, (c * matrix.variety_size).denominator)
    return denom


def spectral_richness(
    matrix: MomentMatrix, delta, refine_bits: int = 24
) -> SpectralReport:
    """Exact richness decision plus a certified interval for the smallest
    nonzero eigenvalue.

    The decision (every nonzero eigenvalue at least delta) is made by Sturm
    root counting on the characteristic polynomial of an integer scaling of
    the matrix, so it is exact even when the threshold falls on an
    eigenvalue. The reported interval is refined to width 2**-refine_bits.
    Also reports the generic lower bound (B*N)**-N for an integer N x N
    matrix with entries bounded by B, transported to the moment matrix's
    scale.
    """
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    scale = integer_scale(matrix) * matrix.variety_size
    dim = len(matrix.entries)
    scaled = [[int(c * scale) for c in row] for row in matrix.entries]
    big = max(1, max(abs(x) for row in scaled for x in row))
    integer_bound = Fraction(big * dim) ** (-dim) / scale

    char = berkowitz_charpoly(scaled)
    zero_mult = 0
    while char[zero_mult] == 0:
        zero_mult += 1
    reduced = char[zero_mult:]
    if _c_deg(reduced) == 0:
        return SpectralReport(True, delta, zero_mult, None, None, integer_bound)
    squarefree = _radical(reduced)
    neg_chain = _sturm_chain(squarefree)
    bound = _root_bound(squarefree)
    if _count_roots(neg_chain, -bound, _ZERO) > 0:
        raise ValueError("matrix is not positive semidefinite")

    threshold = delta * scale
    trimmed = list(squarefree)
    x_minus = [-threshold, _ONE]
    while _c_eval(trimmed, threshold) == 0:
        trimmed, rem = _c_divmod(trimmed, x_minus)
        if rem:
            raise RuntimeError("inexact division at a rational eigenvalue")
    rich = _count_roots(_sturm_chain(trimmed), _ZERO, threshold) == 0

    tol = Fraction(scale, 2 ** refine_bits)
    iso = _isolate_smallest_positive_root(squarefree, tol)
    lo, hi = iso
    return SpectralReport(rich, delta, zero_mult, lo / scale, hi / scale, integer_bound)


# ---------------------------------------------------------------------------
# Gram rewriting


def _coefficient_vector(q: Polynomial, index: dict[Monomial, int], dim: int) -> list[Fraction]:
    vec = [_ZERO] * dim
    for m, c in q.terms.items():
        pos = index.get(m)
        if pos is None:
            raise ValueError("square of degree beyond the basis degree")
        vec[pos] = c
    return vec


def gram_rewrite(
    cert: SosCertificate,
    points: Sequence[Sequence],
    d: int,
    delta,
    order: MonomialOrder = GRLEX,
    refine_bits: int = 24,
) -> GramRewrite:
    """Rewrite a certificate as bounded squares plus a polynomial vanishing
    on the point set.

    The square part is projected through I - (kernel projection) of the
    moment matrix, exactly: the kernel is rational, so no eigenvectors are
    needed. The output satisfies target + epsilon == sum of new squares +
    ideal_poly with ideal_poly vanishing on every point (checked here by
    enumeration), and tr(C') <= E[target + epsilon]/delta is reported.
    """
    matrix = moment_matrix(points, d, order)
    report = spectral_richness(matrix, delta, refine_bits)
    if not report.rich:
        raise ValueError(
            "point set is not %s-spectrally rich: smallest nonzero eigenvalue in (%s, %s]"
            % (delta, report.min_nonzero_lo, report.min_nonzero_hi)
        )
    dim = len(matrix.basis)
    index = {m: i for i, m in enumerate(matrix.basis)}
    gram = [[_ZERO] * dim for _ in range(dim)]
    for w, q in cert.squares:
        vec = _coefficient_vector(q, index, dim)
        for i in range(dim):
            if vec[i]:
                for j in range(dim):
                    if vec[j]:
                        gram[i][j] += w * vec[i] * vec[j]

    kernel = _nullspace(matrix.entries)
    if kernel:
        k = len(kernel)
        ktk = [[sum(kernel[i][t] * kernel[j][t] for t in range(dim)) for j in range(k)] for i in range(k)]
        ktk_inv = _mat_inverse(ktk)
        kt = [list(v) for v in kernel]
        kmat = [[kernel[j][i] for j in range(k)] for i in range(dim)]
        pi0 = _mat_mul(_mat_mul(kmat, ktk_inv), kt)
        pi_plus = [
            [(_ONE if i == j else _ZERO) - pi0[i][j] for j in range(dim)]
            for i in range(dim)
        ]
        projected = _mat_mul(_mat_mul(pi_plus, gram), pi_plus)
    else:
        projected = gram

    ldl = exact_ldl(projected, semidefinite=True)
    if ldl is None:
        raise RuntimeError("projected Gram matrix lost positive semidefiniteness")
    low, diag = ldl
    squares = []
    square_sum = Polynomial.zero(order)
    for i in range(dim):
        if diag[i] == 0:
            continue
        terms = {}
        for j in range(dim):
            if low[j][i]:
                terms[matrix.basis[j]] = low[j][i]
        poly = Polynomial(terms, order)
        squares.append((diag[i], poly))
        square_sum = square_sum + poly * poly * diag[i]

    ideal_poly = cert.target + cert.epsilon - square_sum
    pts = canonical_points(points)
    for p in pts:
        val = ideal_poly.evaluate(p)
        if val != 0:
            raise ValueError(
                "rewrite leaves value %s at point %s; certificate does not hold on the set"
                % (val, tuple(str(c) for c in p))
            )

    trace = sum((projected[i][i] for i in range(dim)), _ZERO)
    mean = sum(((cert.target + cert.epsilon).evaluate(p) for p in pts), _ZERO) / len(pts)
    return GramRewrite(tuple(squares), ideal_poly, trace, mean / Fraction(delta))
