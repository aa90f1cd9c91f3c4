"""Tests for exact sum-of-squares certificates and their builders."""

import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycert.csp import BOOLEAN_DOMAIN, DomainSpec, domain_polynomial
from polycert.pc import PcBuilder, pc_verify
from polycert.ring import (
    GRLEX,
    Polynomial,
    format_polynomial,
    parse_polynomial,
)
from polycert.sos import (
    DecompositionPrecisionError,
    NsatzCertificate,
    SosCertificate,
    alpha_power_cert,
    approx_from_square,
    archimedean_bound_cert,
    archimedean_constant,
    certificate_coeff_bits,
    certificate_from_json_dict,
    certificate_to_json_dict,
    compose_approx,
    exact_ldl,
    make_nsatz_certificate,
    nsatz_to_sos,
    nsatz_verify,
    pad_epsilon,
    padded_domain_polynomial,
    pc_to_sos_square,
    poly_bound_cert,
    poly_sqrt,
    product_cert,
    proof_axiom_system,
    shifted_multiplier_cert,
    sos_verify,
    univariate_psd_decompose,
)
from polycert.sos import _mk_cert, _nonneg_on_domain_cert

X = Polynomial.variable(0)
Y = Polynomial.variable(1)
ONE = Polynomial.constant(1, GRLEX)
D3 = DomainSpec((0, 1, 2))


def _square_sum(squares):
    acc = Polynomial.zero(GRLEX)
    for w, q in squares:
        acc = acc + q * q * w
    return acc


def _check_exact(cert, axioms):
    report = sos_verify(cert, axioms)
    assert report.ok, report.message
    return report


# -- verification ------------------------------------------------------------


def test_sphere_slice_certificate():
    n = 3
    sphere = sum(
        (Polynomial.variable(i) ** 2 for i in range(n)), Polynomial.zero(GRLEX)
    )
    axioms = [sphere]
    squares = [(Fraction(1), Polynomial.constant(Fraction(1, 2), GRLEX) - X)]
    squares += [(Fraction(1), Polynomial.variable(i)) for i in range(1, n)]
    cert = _mk_cert(
        Polynomial.constant(Fraction(1, 4), GRLEX) - X,
        squares,
        [(Polynomial.constant(-1, GRLEX), 0)],
        0,
        axioms,
    )
    report = _check_exact(cert, axioms)
    assert report.degree == 2


def test_verify_rejects_negative_weight():
    axioms = [X * X]
    cert = SosCertificate(X * X, ((Fraction(-1), X),), (), Fraction(0), 2)
    report = sos_verify(cert, axioms)
    assert not report.ok
    assert "negative weight" in report.message


def test_verify_rejects_negative_epsilon():
    cert = SosCertificate(Polynomial.zero(GRLEX), (), (), Fraction(-1), 0)
    assert not sos_verify(cert, []).ok


def test_verify_rejects_bad_axiom_index():
    cert = SosCertificate(X, (), ((ONE, 3),), Fraction(0), 1)
    report = sos_verify(cert, [X])
    assert not report.ok
    assert "axiom 3" in report.message


def test_verify_rejects_wrong_identity():
    cert = SosCertificate(X, ((Fraction(1), X),), (), Fraction(0), 2)
    report = sos_verify(cert, [])
    assert not report.ok
    assert "residual" in report.message


def test_verify_rejects_wrong_degree():
    cert = SosCertificate(X * X, ((Fraction(1), X),), (), Fraction(0), 4)
    report = sos_verify(cert, [])
    assert not report.ok
    assert "declared degree" in report.message


def test_empty_certificate_for_zero_target():
    cert = SosCertificate(Polynomial.zero(GRLEX), (), (), Fraction(0), 0)
    assert sos_verify(cert, []).ok


def test_fabricated_linear_from_square_axiom_fails():
    # x is not an exact combination of squares and multiples of x**2
    cert = SosCertificate(X, ((Fraction(1), ONE),), ((ONE, 0),), Fraction(0), 2)
    assert not sos_verify(cert, [X * X]).ok


def test_pad_epsilon_round_trip():
    axioms = [X * X - X]
    cert = _mk_cert(Polynomial.zero(GRLEX), (), (), 0, axioms)
    padded = pad_epsilon(cert, Fraction(1, 3), axioms)
    assert padded.epsilon == Fraction(1, 3)
    _check_exact(padded, axioms)
    with pytest.raises(ValueError):
        pad_epsilon(padded, Fraction(1, 4), axioms)


# -- polynomial square root ---------------------------------------------------


def test_poly_sqrt_recovers_square():
    p = X * Y - 2 * Y + Fraction(1, 3)
    assert poly_sqrt(p * p) in (p, -p)


def test_poly_sqrt_rejects_non_square():
    with pytest.raises(ValueError):
        poly_sqrt(X * X + 1)
    with pytest.raises(ValueError):
        poly_sqrt(X * 2)


@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4))
def test_poly_sqrt_round_trip(a, b, c):
    p = X * a + Y * b + c
    if p.is_zero():
        return
    s = poly_sqrt(p * p)
    assert s * s == p * p


# -- univariate PSD decomposition ---------------------------------------------


def test_decompose_sum_of_two_squares():
    dec = univariate_psd_decompose(X * X + 1, 0)
    assert dec.slack == 0
    assert _square_sum(dec.weights_and_squares) == X * X + 1


def test_decompose_perfect_square():
    p = (X * X - 1) ** 2
    dec = univariate_psd_decompose(p, 0)
    assert dec.slack == 0
    assert [w for w, _ in dec.weights_and_squares] == [Fraction(1)]
    assert _square_sum(dec.weights_and_squares) == p


def test_decompose_completed_square():
    p = X * X - 2 * X + 40
    dec = univariate_psd_decompose(p, 0)
    assert dec.slack == 0
    pairs = {(w, format_polynomial(q)) for w, q in dec.weights_and_squares}
    assert pairs == {(Fraction(1), "1*x0 - 1"), (Fraction(39), "1")}


def test_decompose_quartic_exactly():
    p = X ** 4 + X + 1
    dec = univariate_psd_decompose(p, 0)
    assert dec.slack == 0
    assert _square_sum(dec.weights_and_squares) == p


def test_decompose_rejects_negative_inputs():
    for p in (X, -(X * X), X * X - 1, Polynomial.constant(-3, GRLEX), X ** 3 + 1):
        with pytest.raises(ValueError):
            univariate_psd_decompose(p, Fraction(1, 2))


def test_decompose_rejects_multivariate():
    with pytest.raises(ValueError):
        univariate_psd_decompose(X * Y + 1, 0)


def test_decompose_sextic_within_budget():
    p = X ** 6 + X + 2
    budget = Fraction(1, 1024)
    dec = univariate_psd_decompose(p, budget)
    assert 0 <= dec.slack <= budget
    assert _square_sum(dec.weights_and_squares) == p + dec.slack


def test_decompose_zero_budget_failure_is_typed():
    with pytest.raises((DecompositionPrecisionError, ValueError)):
        univariate_psd_decompose(X ** 6 + X + 2, 0)


def test_decompose_respects_variable_index():
    z = Polynomial.variable(5)
    dec = univariate_psd_decompose(z * z + 4, 0)
    assert _square_sum(dec.weights_and_squares) == z * z + 4
    assert all(q.variables() in ((), (5,)) for _, q in dec.weights_and_squares)


@given(
    st.lists(st.integers(-3, 3), min_size=1, max_size=3),
    st.lists(st.integers(-3, 3), min_size=1, max_size=3),
    st.integers(0, 9),
)
@settings(deadline=None, max_examples=40)
def test_decompose_certified_nonnegative_inputs(c1, c2, shift):
    from polycert.ring import poly_from_coeffs

    a = poly_from_coeffs([Fraction(c) for c in c1] or [Fraction(0)])
    b = poly_from_coeffs([Fraction(c) for c in c2] or [Fraction(0)])
    p = a * a + b * b + shift
    budget = Fraction(1, 64)
    dec = univariate_psd_decompose(p, budget)
    assert 0 <= dec.slack <= budget
    assert _square_sum(dec.weights_and_squares) == p + dec.slack
    assert len(dec.weights_and_squares) <= max(p.degree(), 0) + 3


def test_exact_ldl_strict_and_semidefinite():
    g = [[Fraction(4), Fraction(2)], [Fraction(2), Fraction(2)]]
    low, diag = exact_ldl(g)
    assert diag == [Fraction(4), Fraction(1)]
    assert low[1][0] == Fraction(1, 2)
    singular = [[Fraction(1), Fraction(1)], [Fraction(1), Fraction(1)]]
    assert exact_ldl(singular) is None
    low, diag = exact_ldl(singular, semidefinite=True)
    assert diag == [Fraction(1), Fraction(0)]
    indefinite = [[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]
    assert exact_ldl(indefinite, semidefinite=True) is None


# -- archimedean bound certificates --------------------------------------------


def test_archimedean_constant_boolean():
    assert archimedean_constant(BOOLEAN_DOMAIN) == 40


def test_archimedean_constant_three_values():
    assert archimedean_constant(D3) == 1300


def test_padded_domain_polynomial_odd_size():
    p = padded_domain_polynomial(D3, 0)
    assert p == X * X * (X - 1) * (X - 2)


def test_archimedean_cert_boolean_exact():
    t, upper, lower = archimedean_bound_cert(BOOLEAN_DOMAIN, 0)
    assert t == 40
    assert upper.epsilon == 0 and lower.epsilon == 0
    axioms = [domain_polynomial(BOOLEAN_DOMAIN, 0)]
    _check_exact(upper, axioms)
    _check_exact(lower, axioms)
    assert upper.target == Polynomial.constant(40, GRLEX) - X
    assert lower.target == Polynomial.constant(40, GRLEX) + X


def test_archimedean_cert_three_values_exact():
    t, upper, lower = archimedean_bound_cert(D3, 0)
    assert t == 1300
    assert upper.epsilon == 0 and lower.epsilon == 0
    axioms = [domain_polynomial(D3, 0)]
    _check_exact(upper, axioms)
    _check_exact(lower, axioms)


def test_archimedean_cert_other_variable_and_index():
    t, upper, lower = archimedean_bound_cert(BOOLEAN_DOMAIN, 2, axiom_index=5)
    axioms = [Polynomial.zero(GRLEX)] * 5 + [domain_polynomial(BOOLEAN_DOMAIN, 2)]
    _check_exact(upper, axioms)
    _check_exact(lower, axioms)
    assert upper.target.variables() == (2,)


# -- refutation steps to squares ------------------------------------------------


def _boolean_contradiction_proof():
    builder = PcBuilder((X, X - 1), domain=BOOLEAN_DOMAIN)
    one = builder.lin(builder.axiom(0), builder.axiom(1), 1, -1)
    proof, _ = builder.extract([one])
    return proof


def test_square_cert_axiom_and_lin():
    proof = _boolean_contradiction_proof()
    cert = pc_to_sos_square(proof)
    axioms = proof_axiom_system(proof)
    assert cert.epsilon == 0
    assert cert.target == Polynomial.constant(-1, GRLEX)
    _check_exact(cert, axioms)


def test_square_cert_domain_axiom_step():
    builder = PcBuilder((), domain=BOOLEAN_DOMAIN)
    line = builder.domain_axiom(0)
    proof, _ = builder.extract([line])
    cert = pc_to_sos_square(proof, 0)
    axioms = proof_axiom_system(proof)
    _check_exact(cert, axioms)
    d = domain_polynomial(BOOLEAN_DOMAIN, 0)
    assert cert.target == -(d * d)
    assert cert.squares == ()


def test_square_cert_variable_multiplication_boolean():
    builder = PcBuilder((X * Y - 1, X), domain=BOOLEAN_DOMAIN)
    shifted = builder.mul_var(builder.axiom(1), 1)
    final = builder.lin(builder.axiom(0), shifted, 1, -1)
    proof, _ = builder.extract([final])
    assert proof.steps[-1].result == Polynomial.constant(-1, GRLEX)
    cert = pc_to_sos_square(proof)
    axioms = proof_axiom_system(proof)
    _check_exact(cert, axioms)
    assert cert.epsilon == 0
    assert cert.degree <= 2 * (proof.degree() + BOOLEAN_DOMAIN.size - 1)


def test_square_cert_variable_multiplication_three_values():
    builder = PcBuilder((X - 2, X * Y - 1, Y - 1), domain=D3)
    shifted = builder.mul_var(builder.axiom(0), 1)
    partial = builder.lin(builder.axiom(1), shifted, 1, -1)
    final = builder.lin(partial, builder.axiom(2), 1, -2)
    proof, _ = builder.extract([final])
    assert proof.steps[-1].result == ONE
    cert = pc_to_sos_square(proof)
    axioms = proof_axiom_system(proof)
    _check_exact(cert, axioms)
    assert cert.epsilon == 0
    assert cert.degree <= 2 * (proof.degree() + D3.size - 1)


def test_square_cert_rejects_broken_proof():
    from polycert.pc import AXIOM, PcProof, PcStep

    bad = PcProof((X,), (PcStep(AXIOM, X + 1, (0,)),), BOOLEAN_DOMAIN)
    with pytest.raises(ValueError):
        pc_to_sos_square(bad)


def test_square_cert_requires_domain():
    builder = PcBuilder((X,))
    builder.axiom(0)
    with pytest.raises(ValueError):
        pc_to_sos_square(builder.proof())


@given(
    st.integers(-3, 3).filter(bool),
    st.integers(-3, 3).filter(bool),
    st.integers(0, 2),
    st.integers(0, 2),
)
@settings(deadline=None, max_examples=30)
def test_square_cert_linear_combinations(a, b, e1, e2):
    f1 = X ** e1 * Y - 1 if e1 else X - Y
    f2 = Y ** e2 + X * 2 if e2 else Y + 2
    builder = PcBuilder((f1, f2), domain=BOOLEAN_DOMAIN)
    line = builder.lin(builder.axiom(0), builder.axiom(1), a, b)
    proof, _ = builder.extract([line])
    cert = pc_to_sos_square(proof)
    axioms = proof_axiom_system(proof)
    _check_exact(cert, axioms)
    combo = f1 * a + f2 * b
    assert cert.target == -(combo * combo)


def test_square_cert_nested_variable_multiplications():
    builder = PcBuilder((X + Y - 2,), domain=D3)
    line = builder.axiom(0)
    line = builder.mul_var(line, 0)
    line = builder.mul_var(line, 1)
    proof, _ = builder.extract([line])
    cert = pc_to_sos_square(proof)
    axioms = proof_axiom_system(proof)
    _check_exact(cert, axioms)
    assert cert.degree <= 2 * (proof.degree() + D3.size - 1)


# -- approximate certificates ----------------------------------------------------


@pytest.mark.parametrize("eps", [Fraction(1), Fraction(1, 8), Fraction(1, 1024)])
def test_approx_from_square_epsilons(eps):
    proof = _boolean_contradiction_proof()
    base = pc_to_sos_square(proof)
    axioms = proof_axiom_system(proof)
    plus, minus = approx_from_square(base, eps)
    assert plus.epsilon == eps and minus.epsilon == eps
    assert plus.target == ONE and minus.target == -ONE
    _check_exact(plus, axioms)
    _check_exact(minus, axioms)


def test_approx_from_square_rejects_bad_eps():
    base = pc_to_sos_square(_boolean_contradiction_proof())
    with pytest.raises(ValueError):
        approx_from_square(base, 0)


def test_approx_coefficient_growth_is_polynomial_in_inverse_eps():
    base = pc_to_sos_square(_boolean_contradiction_proof())
    bits = []
    epsilons = [Fraction(1), Fraction(1, 8), Fraction(1, 1024)]
    for eps in epsilons:
        plus, _ = approx_from_square(base, eps)
        bits.append(certificate_coeff_bits(plus))
    import math

    slopes = []
    for (b1, e1), (b2, e2) in zip(
        list(zip(bits, epsilons))[:-1], list(zip(bits, epsilons))[1:]
    ):
        slopes.append(
            (math.log(b2) - math.log(b1)) / (math.log(1 / e2) - math.log(1 / e1))
        )
    assert all(s <= 2 for s in slopes)


def test_alpha_power_cert_small_alphas():
    p = X * Y - Y + 2
    for alpha, ell in [(1, 1), (2, 1), (3, 2), (5, 3), (9, 4), (17, 5)]:
        axioms = [p ** alpha]
        cert = alpha_power_cert(p, alpha, Fraction(1, 8), 0, axioms)
        assert cert.epsilon == Fraction(1, 8)
        _check_exact(cert, axioms)
        forced = alpha_power_cert(p, alpha, Fraction(1, 8), 0, axioms, ell=ell)
        _check_exact(forced, axioms)


def test_alpha_power_cert_validates_axiom():
    p = X + 1
    with pytest.raises(ValueError):
        alpha_power_cert(p, 3, Fraction(1, 2), 0, [p ** 2])
    with pytest.raises(ValueError):
        alpha_power_cert(p, 3, Fraction(1, 2), 0, [p ** 3], ell=1)
    with pytest.raises(ValueError):
        alpha_power_cert(p, 3, 0, 0, [p ** 3])


@given(st.integers(1, 20), st.fractions(Fraction(1, 64), Fraction(4)))
@settings(deadline=None, max_examples=30)
def test_alpha_power_cert_property(alpha, eps):
    p = X - 2 * Y
    axioms = [p ** alpha]
    cert = alpha_power_cert(p, alpha, eps, 0, axioms)
    _check_exact(cert, axioms)
    assert cert.epsilon == eps


# -- bound and product certificates ----------------------------------------------


def test_nonneg_on_domain_cert_boolean_pinned():
    doms = [domain_polynomial(BOOLEAN_DOMAIN, 0)]
    cert = _nonneg_on_domain_cert(
        BOOLEAN_DOMAIN, {0: Fraction(1), 1: Fraction(0)}, 0, 0, doms, GRLEX
    )
    _check_exact(cert, doms)
    assert cert.target == ONE - X
    with pytest.raises(ValueError):
        _nonneg_on_domain_cert(
            BOOLEAN_DOMAIN, {0: Fraction(-1), 1: Fraction(0)}, 0, 0, doms, GRLEX
        )


def test_poly_bound_cert_boolean():
    doms = [domain_polynomial(BOOLEAN_DOMAIN, j) for j in range(2)]
    g = X * Y - 2
    cert = poly_bound_cert(BOOLEAN_DOMAIN, g, doms, 0)
    _check_exact(cert, doms)
    assert cert.epsilon == 0
    n_val = (cert.target + g * g + 1).constant_part()
    assert n_val > 0
    assert (cert.target + g * g + 1).degree() == 0


def test_poly_bound_cert_three_values():
    doms = [domain_polynomial(D3, j) for j in range(2)]
    g = X - Y + 1
    cert = poly_bound_cert(D3, g, doms, 0)
    _check_exact(cert, doms)
    assert (cert.target + g * g + 1).degree() == 0


def _boolean_half_pair(eps):
    doms = [domain_polynomial(BOOLEAN_DOMAIN, j) for j in range(2)]
    p = X - Fraction(1, 2)
    eps = Fraction(eps)
    upper = _nonneg_on_domain_cert(
        BOOLEAN_DOMAIN,
        {0: eps + Fraction(1, 2), 1: eps - Fraction(1, 2)},
        0, 0, doms, GRLEX,
    )
    lower = _nonneg_on_domain_cert(
        BOOLEAN_DOMAIN,
        {0: eps - Fraction(1, 2), 1: eps + Fraction(1, 2)},
        0, 0, doms, GRLEX,
    )
    plus = _mk_cert(p, lower.squares, lower.ideal_part, eps, doms)
    minus = _mk_cert(-p, upper.squares, upper.ideal_part, eps, doms)
    return p, plus, minus, doms


def test_product_cert_boolean():
    p, plus, minus, doms = _boolean_half_pair(1)
    g = X * Y - 2
    bound = poly_bound_cert(BOOLEAN_DOMAIN, g, doms, 0)
    n_val = (bound.target + g * g + 1).constant_part()
    prod = product_cert(plus, minus, g, bound, n_val / 2, doms)
    _check_exact(prod, doms)
    assert prod.target == p * g
    assert prod.epsilon == n_val / 2


def test_product_cert_negated_multiplier():
    p, plus, minus, doms = _boolean_half_pair(1)
    g = X * Y - 2
    bound = poly_bound_cert(BOOLEAN_DOMAIN, -g, doms, 0)
    n_val = (bound.target + g * g + 1).constant_part()
    prod = product_cert(plus, minus, -g, bound, n_val / 2, doms)
    _check_exact(prod, doms)
    assert prod.target == -(p * g)


def test_product_cert_constant_multiplier():
    p, plus, minus, doms = _boolean_half_pair(1)
    bound = poly_bound_cert(BOOLEAN_DOMAIN, ONE, doms, 0)
    prod = product_cert(plus, minus, ONE, bound, Fraction(1), doms)
    _check_exact(prod, doms)
    assert prod.target == p


def test_product_cert_rejects_oversized_input_slack():
    p, plus, minus, doms = _boolean_half_pair(1)
    g = X * Y - 2
    bound = poly_bound_cert(BOOLEAN_DOMAIN, g, doms, 0)
    with pytest.raises(ValueError):
        product_cert(plus, minus, g, bound, Fraction(1, 100), doms)


def test_product_cert_rejects_mismatched_pair():
    p, plus, minus, doms = _boolean_half_pair(1)
    with pytest.raises(ValueError):
        product_cert(plus, plus, ONE, poly_bound_cert(BOOLEAN_DOMAIN, ONE, doms, 0), 1, doms)


def test_shifted_multiplier_cert():
    p = X + 2 * Y - 1
    sigma_squares = [X - Y, Polynomial.constant(Fraction(1, 2), GRLEX)]
    c = Fraction(3, 2)
    g = sum((q * q for q in sigma_squares), Polynomial.zero(GRLEX)) + c
    axioms = [p * g]
    plus, minus = shifted_multiplier_cert(p, sigma_squares, c, 0, Fraction(1, 4), axioms)
    assert plus.target == p and minus.target == -p
    assert plus.epsilon == Fraction(1, 4)
    _check_exact(plus, axioms)
    _check_exact(minus, axioms)


def test_shifted_multiplier_cert_validates_axiom():
    p = X + 1
    with pytest.raises(ValueError):
        shifted_multiplier_cert(p, [X], 1, 0, Fraction(1, 2), [p])


@given(
    st.integers(-3, 3),
    st.integers(-3, 3),
    st.integers(1, 4),
    st.fractions(Fraction(1, 32), Fraction(2)),
)
@settings(deadline=None, max_examples=30)
def test_shifted_multiplier_property(a, b, c_num, eps):
    p = X * a + Y * b + 1
    sigma_squares = [X + Y * 2]
    c = Fraction(c_num)
    g = sigma_squares[0] * sigma_squares[0] + c
    axioms = [p * g]
    plus, minus = shifted_multiplier_cert(p, sigma_squares, c, 0, eps, axioms)
    _check_exact(plus, axioms)
    _check_exact(minus, axioms)


def test_compose_approx_chain():
    p, _, _, doms = _boolean_half_pair(1)
    mid_axioms = [p]
    plus_mid = _mk_cert(p, [], [(ONE, 0)], 0, mid_axioms)
    minus_mid = _mk_cert(-p, [], [(-ONE, 0)], 0, mid_axioms)

    def factory(j, budget):
        assert j == 0
        _, plus, minus, _ = _boolean_half_pair(budget)
        return plus, minus

    total = Fraction(4)
    plus, minus = compose_approx(
        (plus_mid, minus_mid), mid_axioms, factory, BOOLEAN_DOMAIN, doms, 0, total
    )
    assert plus.target == p and minus.target == -p
    assert plus.epsilon <= total and minus.epsilon <= total
    _check_exact(plus, doms)
    _check_exact(minus, doms)


def test_compose_approx_rejects_oversized_input():
    p, plus, minus, doms = _boolean_half_pair(1)
    with pytest.raises(ValueError):
        compose_approx(
            (plus, minus), [p], lambda j, b: None, BOOLEAN_DOMAIN, doms, 0, Fraction(1, 2)
        )


# -- Nullstellensatz certificates -------------------------------------------------


def test_nsatz_verify_and_conversion():
    target = parse_polynomial("1*x0^2*x1 - 1*x1")
    axioms = [X * X - 1]
    cert = make_nsatz_certificate(target, [(Y, 0)], axioms)
    report = nsatz_verify(cert, axioms)
    assert report.ok and report.degree == 3
    sos = nsatz_to_sos(cert)
    assert sos.epsilon == 0 and sos.squares == ()
    _check_exact(sos, axioms)


def test_nsatz_verify_rejects_wrong_combination():
    cert = NsatzCertificate(X, ((ONE, 0),), 2)
    assert not nsatz_verify(cert, [X * X]).ok
    out_of_range = NsatzCertificate(X, ((ONE, 2),), 1)
    assert not nsatz_verify(out_of_range, [X]).ok


# -- serialization ----------------------------------------------------------------


def test_certificate_json_round_trip():
    proof = _boolean_contradiction_proof()
    cert = pc_to_sos_square(proof)
    axioms = proof_axiom_system(proof)
    doc = certificate_to_json_dict(cert)
    assert sorted(doc.keys()) == ["epsilon", "ideal", "squares", "target"]
    text = json.dumps(doc)
    back = certificate_from_json_dict(json.loads(text), axioms)
    assert back == cert
    _check_exact(back, axioms)


def test_certificate_json_rejects_malformed():
    with pytest.raises(ValueError):
        certificate_from_json_dict([], [])
    with pytest.raises(ValueError):
        certificate_from_json_dict({"target": "1*x0"}, [])
    with pytest.raises(ValueError):
        certificate_from_json_dict(
            {"target": "1*x0", "epsilon": "0", "squares": [{"w": "1"}], "ideal": []},
            [],
        )
