"""Tests for moment matrices, eigenvalue isolation, and Gram rewriting."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycert.csp import BOOLEAN_DOMAIN, domain_polynomial
from polycert.groebner import enumerate_zero_set
from polycert.ring import GRLEX, Polynomial, format_polynomial
from polycert.sos import _mk_cert, poly_bound_cert, sos_verify
from polycert.spectral import (
    GramRewrite,
    MomentMatrix,
    berkowitz_charpoly,
    canonical_points,
    format_moment_matrix,
    gram_rewrite,
    integer_scale,
    kernel_polynomials,
    kernel_vectors,
    moment_matrix,
    spectral_richness,
)

X = Polynomial.variable(0)
Y = Polynomial.variable(1)
HALF = Fraction(1, 2)


# -- moment matrices -----------------------------------------------------------


def test_single_point_origin_matrix():
    m = moment_matrix([(0,)], 2)
    assert m.entries == (
        (Fraction(1), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(0), Fraction(0)),
    )
    assert m.variety_size == 1 and m.d == 2 and m.n == 1


def test_two_point_line_matrix():
    m = moment_matrix([(0,), (1,)], 1)
    assert m.entries == ((Fraction(1), HALF), (HALF, HALF))


def test_matrix_dimension_is_binomial():
    m = moment_matrix([(0, 1, 0)], 2)
    assert len(m.basis) == 10  # C(3+2, 2)
    assert len(m.entries) == 10


def test_moment_matrix_deduplicates_points():
    m = moment_matrix([(0,), (0,), (1,)], 1)
    assert m.variety_size == 2


def test_moment_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        moment_matrix([], 1)
    with pytest.raises(ValueError):
        moment_matrix([(0,), (0, 1)], 1)
    with pytest.raises(ValueError):
        moment_matrix([(0,)], -1)


def test_rank_deficient_diagonal_pair():
    m = moment_matrix([(0, 0), (1, 1)], 1)
    kernel = kernel_polynomials(m)
    assert len(kernel) == 1
    assert kernel[0].monic() == (X - Y).monic()


def test_format_moment_matrix_golden():
    m = moment_matrix([(0,), (1,)], 1)
    assert format_moment_matrix(m) == "1 x0\n1 1/2\n1/2 1/2"


def test_format_includes_powers():
    m = moment_matrix([(1, 1)], 2)
    header = format_moment_matrix(m).splitlines()[0]
    assert header == "1 x1 x0 x1^2 x0*x1 x0^2"


@given(
    st.lists(
        st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=1, max_size=6
    ),
    st.integers(1, 2),
)
@settings(deadline=None, max_examples=40)
def test_kernel_polynomials_vanish_on_points(raw, d):
    m = moment_matrix(raw, d)
    pts = canonical_points(raw)
    for q in kernel_polynomials(m):
        assert all(q.evaluate(p) == 0 for p in pts)


@given(
    st.lists(
        st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=4
    )
)
@settings(deadline=None, max_examples=30)
def test_zero_multiplicity_matches_kernel_dimension(raw):
    m = moment_matrix(raw, 1)
    report = spectral_richness(m, Fraction(1, 10 ** 9))
    assert report.zero_multiplicity == len(kernel_vectors(m))


# -- characteristic polynomial ---------------------------------------------------


def _det_poly(entries):
    """Determinant of x*I - A via cofactor expansion, as an oracle."""
    n = len(entries)
    x = Polynomial.variable(0)
    mat = [
        [
            (x if i == j else Polynomial.zero(GRLEX)) - Fraction(entries[i][j])
            for j in range(n)
        ]
        for i in range(n)
    ]

    def det(rows, cols):
        if len(cols) == 1:
            return mat[rows[0]][cols[0]]
        acc = Polynomial.zero(GRLEX)
        for k, c in enumerate(cols):
            minor = det(rows[1:], cols[:k] + cols[k + 1:])
            term = mat[rows[0]][c] * minor
            acc = acc + (term if k % 2 == 0 else -term)
        return acc

    return det(tuple(range(n)), tuple(range(n)))


def test_charpoly_pinned_two_by_two():
    m = moment_matrix([(0,), (1,)], 1)
    assert berkowitz_charpoly(m.entries) == [Fraction(1, 4), Fraction(-3, 2), Fraction(1)]


def test_charpoly_one_by_one():
    assert berkowitz_charpoly([[5]]) == [Fraction(-5), Fraction(1)]


def test_charpoly_matches_cofactor_oracle():
    rng = random.Random(7)
    for _ in range(25):
        n = rng.randint(1, 4)
        a = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        coeffs = berkowitz_charpoly(a)
        oracle = _det_poly(a)
        got = Polynomial.zero(GRLEX)
        xp = Polynomial.constant(1, GRLEX)
        for c in coeffs:
            got = got + xp * c
            xp = xp * Polynomial.variable(0)
        assert got == oracle


# -- spectral richness -------------------------------------------------------------


def test_single_point_exactly_rich():
    m = moment_matrix([(0,)], 2)
    report = spectral_richness(m, 1)
    assert report.rich
    assert report.min_nonzero_lo == 1 and report.min_nonzero_hi == 1
    assert report.zero_multiplicity == 2


def test_single_point_scalar_matrix():
    m = moment_matrix([(0,)], 0)
    assert m.entries == ((Fraction(1),),)
    report = spectral_richness(m, 1)
    assert report.rich
    assert report.min_nonzero_lo == 1 == report.min_nonzero_hi


def test_two_point_interval_pinned():
    m = moment_matrix([(0,), (1,)], 1)
    report = spectral_richness(m, Fraction(19, 100))
    assert report.rich
    assert Fraction(19, 100) < report.min_nonzero_lo
    assert report.min_nonzero_hi < Fraction(20, 100)
    strict = spectral_richness(m, Fraction(20, 100))
    assert not strict.rich


def test_richness_threshold_is_inclusive():
    m = moment_matrix([(0,)], 1)
    # eigenvalues are exactly 0 and 1
    assert spectral_richness(m, 1).rich
    assert not spectral_richness(m, Fraction(10001, 10000)).rich


def test_zero_eigenvalue_excluded_from_minimum():
    m = moment_matrix([(0, 0), (1, 1)], 1)
    report = spectral_richness(m, Fraction(1, 4))
    assert report.zero_multiplicity == 1
    assert report.min_nonzero_lo > Fraction(1, 4)


def test_richness_rejects_bad_delta():
    m = moment_matrix([(0,)], 1)
    with pytest.raises(ValueError):
        spectral_richness(m, 0)


def test_non_psd_matrix_rejected():
    fake = MomentMatrix(
        ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0))),
        1,
        1,
        1,
        moment_matrix([(0,)], 1).basis,
    )
    with pytest.raises(ValueError):
        spectral_richness(fake, Fraction(1, 2))


def test_integer_bound_pinned_two_point():
    m = moment_matrix([(0,), (1,)], 1)
    report = spectral_richness(m, Fraction(1, 10))
    # |S|*M = [[2,1],[1,1]]: B=2, N=2, bound (BN)^-N / |S| = 1/32
    assert report.integer_bound == Fraction(1, 32)
    assert report.min_nonzero_lo >= report.integer_bound


def test_integer_scale_on_fractional_points():
    m = moment_matrix([(Fraction(1, 2),), (1,)], 1)
    s = integer_scale(m)
    for row in m.entries:
        for c in row:
            assert (c * s * m.variety_size).denominator == 1


@given(
    st.lists(
        st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=1, max_size=5
    ),
    st.integers(1, 2),
)
@settings(deadline=None, max_examples=30)
def test_integer_bound_holds_on_integral_sets(raw, d):
    m = moment_matrix(raw, d)
    report = spectral_richness(m, Fraction(1, 10 ** 12))
    # the exact decision at delta = bound certifies min nonzero eig >= bound
    assert spectral_richness(m, report.integer_bound).rich


@given(st.lists(st.fractions(-2, 2), min_size=1, max_size=4), st.integers(1, 2))
@settings(deadline=None, max_examples=30)
def test_scaled_bound_holds_on_rational_sets(vals, d):
    raw = [(v,) for v in vals]
    m = moment_matrix(raw, d)
    report = spectral_richness(m, Fraction(1, 10 ** 18))
    assert spectral_richness(m, report.integer_bound).rich
    assert report.min_nonzero_lo > 0


# -- Gram rewriting ------------------------------------------------------------------


def _boolean_grid(n):
    doms = [domain_polynomial(BOOLEAN_DOMAIN, j) for j in range(n)]
    return doms, enumerate_zero_set(doms, (0, 1), n)


def test_gram_rewrite_sphere_slice_on_origin():
    sphere = X * X + Y * Y
    axioms = [sphere]
    squares = [
        (Fraction(1), Polynomial.constant(HALF, GRLEX) - X),
        (Fraction(1), Y),
    ]
    cert = _mk_cert(
        Polynomial.constant(Fraction(1, 4), GRLEX) - X,
        squares,
        [(Polynomial.constant(-1, GRLEX), 0)],
        0,
        axioms,
    )
    assert sos_verify(cert, axioms).ok
    result = gram_rewrite(cert, [(0, 0)], 1, HALF)
    assert result.squares == ((Fraction(1, 4), Polynomial.constant(1, GRLEX)),)
    assert result.ideal_poly == -X
    assert result.ideal_poly.evaluate((Fraction(0), Fraction(0))) == 0


def test_gram_rewrite_ideal_only_cert():
    doms, grid = _boolean_grid(2)
    cert = _mk_cert(doms[0] * 3, [], [(Polynomial.constant(3, GRLEX), 0)], 0, doms)
    result = gram_rewrite(cert, grid, 1, Fraction(1, 100))
    assert result.squares == ()
    assert result.ideal_poly == cert.target
    assert result.trace == 0


def test_gram_rewrite_identity_and_vanishing():
    doms, grid = _boolean_grid(2)
    g = X * Y - 2
    cert = poly_bound_cert(BOOLEAN_DOMAIN, g, doms, 0)
    result = gram_rewrite(cert, grid, 4, Fraction(1, 10000))
    acc = cert.target + cert.epsilon - result.ideal_poly
    for w, q in result.squares:
        acc = acc - q * q * w
    assert acc.is_zero()
    assert all(result.ideal_poly.evaluate(p) == 0 for p in grid)
    assert all(q.degree() <= 4 for _, q in result.squares)
    assert result.trace <= result.trace_bound


def test_gram_rewrite_rejects_poor_set():
    doms, grid = _boolean_grid(2)
    cert = poly_bound_cert(BOOLEAN_DOMAIN, X * Y - 2, doms, 0)
    with pytest.raises(ValueError, match="spectrally rich"):
        gram_rewrite(cert, grid, 4, Fraction(1))


def test_gram_rewrite_rejects_oversized_squares():
    doms, grid = _boolean_grid(2)
    cert = poly_bound_cert(BOOLEAN_DOMAIN, X * Y - 2, doms, 0)
    with pytest.raises(ValueError, match="basis degree"):
        gram_rewrite(cert, grid, 1, Fraction(1, 10000))


def test_gram_rewrite_detects_certificate_not_holding():
    # target x0 with ideal part x0 vanishes only at 0; over {1} it fails
    cert = _mk_cert(X, [], [(Polynomial.constant(1, GRLEX), 0)], 0, [X])
    with pytest.raises(ValueError, match="does not hold"):
        gram_rewrite(cert, [(1,)], 1, Fraction(1, 100))


def test_gram_rewrite_epsilon_folds_into_identity():
    doms, grid = _boolean_grid(1)
    one = Polynomial.constant(1, GRLEX)
    cert = _mk_cert(-one, [(Fraction(1), one)], [], 2, doms)
    assert sos_verify(cert, doms).ok
    result = gram_rewrite(cert, grid, 1, Fraction(1, 100))
    acc = cert.target + cert.epsilon - result.ideal_poly
    for w, q in result.squares:
        acc = acc - q * q * w
    assert acc.is_zero()
    assert all(result.ideal_poly.evaluate(p) == 0 for p in grid)


@given(
    st.lists(
        st.tuples(st.integers(-2, 3), st.fractions(-1, 2)),
        min_size=1,
        max_size=6,
    )
)
@settings(deadline=None, max_examples=25)
def test_gram_rewrite_random_square_certs(pairs):
    # certificates that are plain sums of squares hold on any point set
    squares = [
        (Fraction(w) if w > 0 else Fraction(1), X * c + w)
        for w, c in pairs
    ]
    target = Polynomial.zero(GRLEX)
    for w, q in squares:
        target = target + q * q * w
    cert = _mk_cert(target, squares, [], 0, [])
    pts = [(Fraction(i), Fraction(i % 2)) for i in range(3)]
    result = gram_rewrite(cert, pts, 1, Fraction(1, 10 ** 9))
    acc = target - result.ideal_poly
    for w, q in result.squares:
        acc = acc - q * q * w
    assert acc.is_zero()
    assert all(result.ideal_poly.evaluate(p) == 0 for p in pts)
