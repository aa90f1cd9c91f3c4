"""Exact sum-of-squares certificates over the rationals.

A certificate is an explicit polynomial identity

    target + epsilon == sum_i w_i * q_i**2 + sum_j h_j * axioms[k_j]

with nonnegative rational weights w_i and a nonnegative rational constant
epsilon.  Verification replays the identity with Fraction arithmetic, so
there is no floating-point tolerance anywhere; approximation enters only
through the declared epsilon.  Builders keep that discipline by folding any
rounding slack from numeric decompositions into positive constants inside
the identity rather than into hidden error terms.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Callable, Mapping, Sequence

import mpmath

from .csp import DomainSpec, domain_polynomial
from .pc import (
    AXIOM,
    DOMAIN_AXIOM,
    LINEAR_COMBINATION,
    VARIABLE_MULTIPLICATION,
    PcProof,
    pc_verify,
)
from .ring import (
    GRLEX,
    Monomial,
    MonomialOrder,
    Polynomial,
    format_polynomial,
    parse_polynomial,
    poly_from_coeffs,
    univariate_coeffs,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


class DecompositionPrecisionError(RuntimeError):
    """Raised when the numeric decomposition cannot meet its slack budget."""

    def __init__(self, message: str, dps_tried: int, budget: Fraction):
        super().__init__(message)
        self.dps_tried = dps_tried
        self.budget = budget


def _max_dps() -> int:
    return int(os.environ.get("POLYCERT_MAX_DPS", "4000"))


# ---------------------------------------------------------------------------
# certificate containers


@dataclass(frozen=True)
class SosCertificate:
    """target + epsilon == sum of weighted squares plus an ideal combination."""

    target: Polynomial
    squares: tuple[tuple[Fraction, Polynomial], ...]
    ideal_part: tuple[tuple[Polynomial, int], ...]
    epsilon: Fraction
    degree: int


@dataclass(frozen=True)
class NsatzCertificate:
    """target == sum_j multipliers[j] * axioms[k_j], an exact ideal identity."""

    target: Polynomial
    multipliers: tuple[tuple[Polynomial, int], ...]
    degree: int


@dataclass(frozen=True)
class UnivariatePsdDecomposition:
    """p + slack == sum of weighted squares, slack a nonnegative constant."""

    p: Polynomial
    weights_and_squares: tuple[tuple[Fraction, Polynomial], ...]
    slack: Fraction


@dataclass(frozen=True)
class SosVerifyReport:
    ok: bool
    message: str
    degree: int
    coeff_bits: int


@dataclass(frozen=True)
class NsatzVerifyReport:
    ok: bool
    message: str
    degree: int


def _coeff_bits(f: Polynomial) -> int:
    out = 0
    for _, c in f.terms.items():
        out = max(out, abs(c.numerator).bit_length() + c.denominator.bit_length())
    return out


def _frac_bits(c: Fraction) -> int:
    return abs(c.numerator).bit_length() + c.denominator.bit_length()


def certificate_coeff_bits(cert: SosCertificate) -> int:
    """Largest coefficient bit-size appearing anywhere in the certificate."""
    out = max(_coeff_bits(cert.target), _frac_bits(cert.epsilon))
    for w, q in cert.squares:
        out = max(out, _frac_bits(w), _coeff_bits(q))
    for h, _ in cert.ideal_part:
        out = max(out, _coeff_bits(h))
    return out


def _combo_degree(squares, ideal_part, axioms) -> int:
    cands = [0]
    for _, q in squares:
        cands.append(2 * q.degree())
    for h, i in ideal_part:
        a = axioms[i]
        if not h.is_zero() and not a.is_zero():
            cands.append(h.degree() + a.degree())
    return max(cands)


def _mk_cert(target, squares, ideal_part, epsilon, axioms) -> SosCertificate:
    sq = tuple((Fraction(w), q) for w, q in squares if Fraction(w) != 0 and not q.is_zero())
    ip = tuple((h, int(i)) for h, i in ideal_part if not h.is_zero())
    return SosCertificate(target, sq, ip, Fraction(epsilon), _combo_degree(sq, ip, axioms))


# ---------------------------------------------------------------------------
# verification


def sos_verify(cert: SosCertificate, axioms: Sequence[Polynomial]) -> SosVerifyReport:
    """Replay the certificate identity exactly; failures come back as data."""
    bits = certificate_coeff_bits(cert)
    if cert.epsilon < 0:
        return SosVerifyReport(False, "negative epsilon %s" % cert.epsilon, cert.degree, bits)
    for pos, (w, _) in enumerate(cert.squares):
        if w < 0:
            return SosVerifyReport(
                False, "negative weight %s in square %d" % (w, pos), cert.degree, bits
            )
    for pos, (_, i) in enumerate(cert.ideal_part):
        if not 0 <= i < len(axioms):
            return SosVerifyReport(
                False, "ideal term %d references axiom %d of %d" % (pos, i, len(axioms)),
                cert.degree, bits,
            )
    acc = Polynomial.zero(cert.target.order) + cert.target + cert.epsilon
    for w, q in cert.squares:
        acc = acc - q * q * w
    for h, i in cert.ideal_part:
        acc = acc - h * axioms[i]
    if not acc.is_zero():
        return SosVerifyReport(
            False,
            "identity fails; residual has %d terms, max-norm %s" % (len(acc.terms), acc.max_norm()),
            cert.degree, bits,
        )
    computed = _combo_degree(cert.squares, cert.ideal_part, axioms)
    if computed != cert.degree:
        return SosVerifyReport(
            False, "declared degree %d but components give %d" % (cert.degree, computed),
            cert.degree, bits,
        )
    return SosVerifyReport(True, "ok", cert.degree, bits)


def nsatz_verify(cert: NsatzCertificate, axioms: Sequence[Polynomial]) -> NsatzVerifyReport:
    for pos, (_, i) in enumerate(cert.multipliers):
        if not 0 <= i < len(axioms):
            return NsatzVerifyReport(
                False, "multiplier %d references axiom %d of %d" % (pos, i, len(axioms)),
                cert.degree,
            )
    acc = Polynomial.zero(cert.target.order) + cert.target
    for h, i in cert.multipliers:
        acc = acc - h * axioms[i]
    if not acc.is_zero():
        return NsatzVerifyReport(False, "identity fails; residual max-norm %s" % acc.max_norm(), cert.degree)
    computed = _combo_degree((), cert.multipliers, axioms)
    if computed != cert.degree:
        return NsatzVerifyReport(
            False, "declared degree %d but components give %d" % (cert.degree, computed),
            cert.degree,
        )
    return NsatzVerifyReport(True, "ok", cert.degree)


def make_nsatz_certificate(target, multipliers, axioms) -> NsatzCertificate:
    mult = tuple((h, int(i)) for h, i in multipliers if not h.is_zero())
    return NsatzCertificate(target, mult, _combo_degree((), mult, axioms))


def nsatz_to_sos(cert: NsatzCertificate) -> SosCertificate:
    """An exact ideal identity is the epsilon-zero, square-free certificate."""
    return SosCertificate(cert.target, (), cert.multipliers, _ZERO, cert.degree)


# ---------------------------------------------------------------------------
# small certificate algebra

def pad_epsilon(cert: SosCertificate, epsilon, axioms) -> SosCertificate:
    """Raise the declared slack by adding a constant square."""
    epsilon = Fraction(epsilon)
    if epsilon < cert.epsilon:
        raise ValueError("cannot shrink declared slack %s to %s" % (cert.epsilon, epsilon))
    if epsilon == cert.epsilon:
        return cert
    one = Polynomial.constant(1, cert.target.order)
    squares = cert.squares + ((epsilon - cert.epsilon, one),)
    return _mk_cert(cert.target, squares, cert.ideal_part, epsilon, axioms)


def _scale_cert(cert: SosCertificate, c: Fraction, axioms) -> SosCertificate:
    c = Fraction(c)
    if c < 0:
        raise ValueError("scale factor must be nonnegative")
    squares = tuple((w * c, q) for w, q in cert.squares)
    ideal = tuple((h * c, i) for h, i in cert.ideal_part)
    return _mk_cert(cert.target * c, squares, ideal, cert.epsilon * c, axioms)


def _sum_certs(certs: Sequence[SosCertificate], axioms) -> SosCertificate:
    if not certs:
        raise ValueError("empty input")
    target = certs[0].target
    eps = certs[0].epsilon
    squares = list(certs[0].squares)
    ideal = list(certs[0].ideal_part)
    for c in certs[1:]:
        target = target + c.target
        eps = eps + c.epsilon
        squares.extend(c.squares)
        ideal.extend(c.ideal_part)
    return _mk_cert(target, squares, ideal, eps, axioms)


def _cert_product(c1: SosCertificate, c2: SosCertificate, axioms) -> SosCertificate:
    """Multiply two slack-free certificates into one for the product target."""
    if c1.epsilon != 0 or c2.epsilon != 0:
        raise ValueError("certificate products need slack-free inputs")
    order = c1.target.order
    s1 = Polynomial.zero(order)
    for w, q in c1.squares:
        s1 = s1 + q * q * w
    squares = [(w1 * w2, q1 * q2) for w1, q1 in c1.squares for w2, q2 in c2.squares]
    ideal = [(s1 * h2, i2) for h2, i2 in c2.ideal_part]
    ideal.extend((h1 * c2.target, i1) for h1, i1 in c1.ideal_part)
    return _mk_cert(c1.target * c2.target, squares, ideal, _ZERO, axioms)


# ---------------------------------------------------------------------------
# exact univariate coefficient arithmetic (ascending lists of Fractions)


def _c_trim(a: list[Fraction]) -> list[Fraction]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _c_deg(a: Sequence[Fraction]) -> int:
    return len(a) - 1


def _c_add(a, b) -> list[Fraction]:
    n = max(len(a), len(b))
    out = [Fraction(0)] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return _c_trim(out)


def _c_sub(a, b) -> list[Fraction]:
    return _c_add(a, [-c for c in b])


def _c_scale(a, c) -> list[Fraction]:
    c = Fraction(c)
    if c == 0:
        return []
    return [x * c for x in a]


def _c_mul(a, b) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return _c_trim(out)


def _c_xshift(a) -> list[Fraction]:
    return [Fraction(0)] + list(a) if a else []


def _c_divmod(a, b) -> tuple[list[Fraction], list[Fraction]]:
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    rem = list(a)
    quo = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    db, lb = _c_deg(b), b[-1]
    while _c_deg(rem) >= db and rem:
        shift = _c_deg(rem) - db
        c = rem[-1] / lb
        quo[shift] = c
        for i, y in enumerate(b):
            rem[shift + i] -= c * y
        _c_trim(rem)
    return _c_trim(quo), rem


def _c_monic(a) -> list[Fraction]:
    if not a:
        return []
    lc = a[-1]
    return [x / lc for x in a]


def _c_gcd(a, b) -> list[Fraction]:
    a, b = list(a), list(b)
    while b:
        a, b = b, _c_divmod(a, b)[1]
    return _c_monic(a)


def _c_deriv(a) -> list[Fraction]:
    return _c_trim([a[i] * i for i in range(1, len(a))])


def _c_eval(a, x) -> Fraction:
    x = Fraction(x)
    out = Fraction(0)
    for c in reversed(a):
        out = out * x + c
    return out


def _c_to_poly(a, var: int, order: MonomialOrder) -> Polynomial:
    return poly_from_coeffs(a, var, order)


def _sf_split(p: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Split monic p as S**2 * U with U squarefree; both parts monic."""
    if _c_deg(p) <= 0:
        return [Fraction(1)], list(p) or [Fraction(1)]
    g = _c_gcd(p, _c_deriv(p))
    if _c_deg(g) == 0:
        return [Fraction(1)], list(p)
    s_g, u_g = _sf_split(g)
    radical, rem = _c_divmod(p, g)
    if rem:
        raise RuntimeError("inexact division in squarefree split")
    u, rem = _c_divmod(radical, u_g)
    if rem:
        raise RuntimeError("inexact division in squarefree split")
    return _c_mul(s_g, u_g), u


# ---------------------------------------------------------------------------
# exact polynomial square root


def _frac_sqrt(c: Fraction) -> Fraction | None:
    if c < 0:
        return None
    n, d = c.numerator, c.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn != n or rd * rd != d:
        return None
    return Fraction(rn, rd)


def poly_sqrt(f: Polynomial) -> Polynomial:
    """Exact square root of a polynomial; raises ValueError when none exists."""
    if f.is_zero():
        return f
    lm = f.leading_monomial()
    if any(e % 2 for e in lm.exps):
        raise ValueError("not a perfect square")
    lc = _frac_sqrt(f.leading_coefficient())
    if lc is None:
        raise ValueError("not a perfect square")
    half = Monomial(tuple(e // 2 for e in lm.exps))
    s = Polynomial.term(lc, half, f.order)
    guard = 4 * (len(f.terms) + 2) ** 2 + 64
    for _ in range(guard):
        rem = f - s * s
        if rem.is_zero():
            return s
        mr = rem.leading_monomial()
        mq = mr.div(half)
        if mq is None:
            raise ValueError("not a perfect square")
        s = s + Polynomial.term(rem.leading_coefficient() / (2 * lc), mq, f.order)
    raise ValueError("not a perfect square")


# ---------------------------------------------------------------------------
# univariate PSD decomposition


def _mpf_to_frac(x, max_den_bits: int) -> Fraction:
    if not mpmath.isfinite(x):
        raise ValueError("nonfinite value from numeric root finding")
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    if man == 0:
        return Fraction(0)
    v = Fraction(man if sign == 0 else -man)
    v = v * (Fraction(2) ** exp)
    return v.limit_denominator(1 << max_den_bits)


def exact_ldl(g: Sequence[Sequence[Fraction]], semidefinite: bool = False):
    """LDL factorization with Fractions; None when the matrix is not PD/PSD."""
    n = len(g)
    a = [[Fraction(x) for x in row] for row in g]
    low = [[Fraction(0)] * n for _ in range(n)]
    d = [Fraction(0)] * n
    for j in range(n):
        pivot = a[j][j] - sum(low[j][k] * low[j][k] * d[k] for k in range(j))
        if pivot < 0 or (pivot == 0 and not semidefinite):
            return None
        d[j] = pivot
        low[j][j] = Fraction(1)
        for i in range(j + 1, n):
            num = a[i][j] - sum(low[i][k] * low[j][k] * d[k] for k in range(j))
            if pivot == 0:
                if num != 0:
                    return None
                continue
            low[i][j] = num / pivot
    return low, d


def _phase_a_quartic(u: list[Fraction]) -> list[tuple[Fraction, list[Fraction]]] | None:
    """Monic squarefree quartic as a quadratic square plus a PSD quadratic.

    Scans rational completion shifts; misses are handed to the numeric phase.
    """
    u0, u1, u2, u3 = u[0], u[1], u[2], u[3]
    a_max = (u2 - u3 * u3 / 4) / 2
    base = a_max.numerator // a_max.denominator
    cands: list[Fraction] = [a_max]
    cands.extend(base - Fraction(j, 4) for j in range(41))
    if u0 > 1:
        root = isqrt(int(u0))
        cands.extend(Fraction(k - root) for k in range(65))
    for a in cands:
        if a > a_max:
            continue
        quad_w = u2 - u3 * u3 / 4 - 2 * a
        lin_w = u1 - u3 * a
        const_w = u0 - a * a
        if quad_w < 0 or const_w < 0 or lin_w * lin_w > 4 * quad_w * const_w:
            continue
        out = [(Fraction(1), [a, u3 / 2, Fraction(1)])]
        if quad_w == 0:
            if lin_w != 0:
                continue
            if const_w:
                out.append((const_w, [Fraction(1)]))
        else:
            out.append((quad_w, [lin_w / (2 * quad_w), Fraction(1)]))
            rem = const_w - lin_w * lin_w / (4 * quad_w)
            if rem:
                out.append((rem, [Fraction(1)]))
        return out
    return None


def _phase_a(coeffs: list[Fraction]) -> list[tuple[Fraction, list[Fraction]]] | None:
    """Exact decomposition attempts; None falls through to the numeric phase."""
    lc = coeffs[-1]
    s, u = _sf_split(_c_monic(coeffs))
    du = _c_deg(u)
    if du == 0:
        return [(lc, s)]
    if du == 1 or du % 2:
        raise ValueError("polynomial is negative on an interval")
    if du == 2:
        b, c = u[1], u[0]
        rem = c - b * b / 4
        if rem < 0:
            raise ValueError("polynomial is negative on an interval")
        out = [(lc, _c_mul(s, [b / 2, Fraction(1)]))]
        if rem:
            out.append((lc * rem, s))
        return out
    if du == 4:
        quartic = _phase_a_quartic(u)
        if quartic is not None:
            return [(lc * w, _c_mul(s, q)) for w, q in quartic]
    return None


def _sample_negativity(coeffs: list[Fraction]) -> None:
    """Exact sign check at rational points suggested by numeric roots."""
    try:
        with mpmath.workdps(60):
            rev = [mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator) for c in reversed(coeffs)]
            roots = mpmath.polyroots(rev, maxsteps=100, extraprec=120)
    except (mpmath.libmp.NoConvergence, ZeroDivisionError):
        return
    points = sorted(_mpf_to_frac(mpmath.re(z), 128) for z in roots)
    probes = list(points)
    for a, b in zip(points, points[1:]):
        probes.append((a + b) / 2)
    for x in probes:
        if _c_eval(coeffs, x) < 0:
            raise ValueError("not nonnegative: value %s at x = %s" % (_c_eval(coeffs, x), x))


class _EscalatePrecision(Exception):
    pass


def _phase_b_attempt(
    target: list[Fraction],
    theta: Fraction,
    eps_hat: Fraction,
    budget: Fraction,
    dps: int,
) -> tuple[list[tuple[Fraction, list[Fraction]]], Fraction]:
    d2 = _c_deg(target)
    d = d2 // 2
    lead = target[-1]
    with mpmath.workdps(dps):
        rev = [mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator) for c in reversed(target)]
        try:
            roots = mpmath.polyroots(rev, maxsteps=120, extraprec=3 * dps)
        except (mpmath.libmp.NoConvergence, ZeroDivisionError):
            raise _EscalatePrecision()
        tol = mpmath.mpf(10) ** (-(dps // 3))
        chosen = []
        reals = []
        for z in roots:
            if mpmath.im(z) > tol:
                chosen.append((mpmath.re(z), mpmath.im(z)))
            elif mpmath.im(z) >= -tol:
                reals.append(mpmath.re(z))
        if len(reals) % 2:
            raise _EscalatePrecision()
        reals.sort()
        for r1, r2 in zip(reals[0::2], reals[1::2]):
            chosen.append(((r1 + r2) / 2, mpmath.mpf(0)))
        if len(chosen) != d:
            raise _EscalatePrecision()
        bits = max(64, 4 * dps)
        factors = [(_mpf_to_frac(re, bits), _mpf_to_frac(im, bits)) for re, im in chosen]
    # exact complex product prod (x - a - i*b) = u + i*v
    u, v = [Fraction(1)], []
    for a, b in factors:
        nu = _c_add(_c_sub(_c_xshift(u), _c_scale(u, a)), _c_scale(v, b))
        nv = _c_sub(_c_sub(_c_xshift(v), _c_scale(v, a)), _c_scale(u, b))
        u, v = nu, nv
    phat = _c_scale(_c_add(_c_mul(u, u), _c_mul(v, v)), lead)
    err = _c_sub(target, phat)
    err = err + [Fraction(0)] * (d2 + 1 - len(err))
    if max((abs(c) for c in err), default=_ZERO) > theta / (4 * (d + 1)):
        raise _EscalatePrecision()
    n1 = d + 1
    u = u + [Fraction(0)] * (n1 - len(u))
    v = v + [Fraction(0)] * (n1 - len(v))
    gram = [
        [lead * (u[i] * u[j] + v[i] * v[j]) + (theta if i == j else 0) for j in range(n1)]
        for i in range(n1)
    ]
    for spow in range(1, d2 + 1):
        e_s = err[spow]
        if not e_s:
            continue
        if spow % 2 == 0:
            gram[spow // 2][spow // 2] += e_s
        else:
            gram[spow // 2][spow // 2 + 1] += e_s / 2
            gram[spow // 2 + 1][spow // 2] += e_s / 2
    slack = eps_hat - err[0]
    if slack < 0 or slack > budget:
        raise _EscalatePrecision()
    ldl = exact_ldl(gram)
    if ldl is None:
        raise _EscalatePrecision()
    low, diag = ldl
    squares = []
    for i in range(n1):
        if diag[i]:
            squares.append((diag[i], _c_trim([low[j][i] for j in range(n1)])))
    check = [Fraction(0)]
    for w, q in squares:
        check = _c_add(check, _c_scale(_c_mul(q, q), w))
    want = list(target)
    want[0] += slack - eps_hat
    for i in range(d + 1):
        want[2 * i] += theta
    if _c_trim(check) != _c_trim(want):
        raise RuntimeError("inconsistent exact reconstruction in PSD decomposition")
    return squares, slack


def _phase_b(coeffs: list[Fraction], budget: Fraction):
    d2 = _c_deg(coeffs)
    d = d2 // 2
    lc = coeffs[-1]
    eps_hat = min(budget / 2, lc)
    bound = 1 + 2 * sum(abs(c) for c in coeffs[:-1]) / lc
    theta = eps_hat / (2 * sum(bound ** (2 * i) for i in range(d + 1)))
    target = list(coeffs)
    target[0] += eps_hat
    for i in range(d + 1):
        target[2 * i] -= theta
    dps = 60
    cap = _max_dps()
    while dps <= cap:
        try:
            return _phase_b_attempt(target, theta, eps_hat, budget, dps)
        except _EscalatePrecision:
            dps *= 2
    raise DecompositionPrecisionError(
        "decomposition needs more than %d digits for slack budget %s" % (cap, budget),
        cap,
        budget,
    )


def univariate_psd_decompose(p: Polynomial, eps_budget) -> UnivariatePsdDecomposition:
    """Write p + slack as an exact weighted sum of squares, slack <= eps_budget.

    Exact routes (squarefree splitting, completed squares) are tried first and
    give slack 0; otherwise numeric root pairing at escalating precision
    produces a rational Gram matrix that is repaired exactly, leaving all
    rounding error in the constant slack.
    """
    budget = Fraction(eps_budget)
    if budget < 0:
        raise ValueError("slack budget must be nonnegative")
    vs = p.variables()
    if len(vs) > 1:
        raise ValueError("polynomial is not univariate")
    var = vs[0] if vs else 0
    order = p.order
    coeffs = _c_trim(univariate_coeffs(p))
    if not coeffs:
        return UnivariatePsdDecomposition(p, (), _ZERO)
    if _c_deg(coeffs) == 0:
        if coeffs[0] < 0:
            raise ValueError("negative constant polynomial")
        one = Polynomial.constant(1, order)
        return UnivariatePsdDecomposition(p, ((coeffs[0], one),), _ZERO)
    if _c_deg(coeffs) % 2 or coeffs[-1] < 0:
        raise ValueError("polynomial is negative for large arguments")
    exact = _phase_a(coeffs)
    if exact is not None:
        squares = tuple((w, _c_to_poly(q, var, order)) for w, q in exact)
        return UnivariatePsdDecomposition(p, squares, _ZERO)
    _sample_negativity(coeffs)
    if budget == 0:
        raise DecompositionPrecisionError(
            "exact decomposition unavailable and the slack budget is zero", 0, budget
        )
    squares, slack = _phase_b(coeffs, budget)
    out = tuple((w, _c_to_poly(q, var, order)) for w, q in squares)
    return UnivariatePsdDecomposition(p, out, slack)


# ---------------------------------------------------------------------------
# domain geometry: padded domain polynomials and archimedean bounds


def _padded_roots(domain: DomainSpec) -> list[Fraction]:
    roots = sorted(domain.values)
    if len(roots) % 2:
        roots = [roots[0]] + roots
    return roots


def padded_domain_polynomial(domain: DomainSpec, var: int, order: MonomialOrder = GRLEX) -> Polynomial:
    """Even-degree domain polynomial; odd-size domains repeat their minimum."""
    x = Polynomial.variable(var, order)
    out = Polynomial.constant(1, order)
    for r in _padded_roots(domain):
        out = out * (x - r)
    return out


def _pad_factor(domain: DomainSpec, var: int, order: MonomialOrder) -> Polynomial:
    if domain.size % 2:
        return Polynomial.variable(var, order) - min(domain.values)
    return Polynomial.constant(1, order)


def archimedean_constant(domain: DomainSpec) -> Fraction:
    """The bound t = (3a)**(2k) + 2a with a = max(2, max |root|)."""
    a = max(Fraction(2), max(abs(v) for v in domain.values))
    kk = len(_padded_roots(domain))
    return (3 * a) ** kk + 2 * a


def archimedean_bound_cert(
    domain: DomainSpec,
    var: int,
    axiom_index: int = 0,
    eps_budget=Fraction(1, 1024),
    order: MonomialOrder = GRLEX,
) -> tuple[Fraction, SosCertificate, SosCertificate]:
    """Certificates for t - x and t + x from the domain polynomial of x.

    The returned slack is whatever the univariate decompositions could not
    place exactly; it is zero whenever the exact phase succeeds.
    """
    t = archimedean_constant(domain)
    dtil = padded_domain_polynomial(domain, var, order)
    x = Polynomial.variable(var, order)
    pad = _pad_factor(domain, var, order)
    axioms = {axiom_index: domain_polynomial(domain, var, order)}
    out = []
    for sign in (1, -1):
        dec = univariate_psd_decompose(dtil - x * sign + t, eps_budget)
        cert = _mk_cert(
            (x * (-sign)) + t,
            dec.weights_and_squares,
            ((-pad, axiom_index),),
            dec.slack,
            axioms,
        )
        out.append(cert)
    return t, out[0], out[1]


# ---------------------------------------------------------------------------
# PC refutation steps to exact squares


class _Shape:
    """Structured certificate for -(r**2): axiom weights, domain multipliers, squares."""

    __slots__ = ("f", "q", "squares")

    def __init__(self):
        self.f: dict[int, Fraction] = {}
        self.q: dict[int, Polynomial] = {}
        self.squares: list[tuple[Fraction, Polynomial]] = []

    def add_scaled(self, other: "_Shape", c: Fraction) -> None:
        if c == 0:
            return
        for i, a in other.f.items():
            self.f[i] = self.f.get(i, _ZERO) + c * a
        for v, h in other.q.items():
            cur = self.q.get(v)
            self.q[v] = h * c if cur is None else cur + h * c
        self.squares.extend((w * c, s) for w, s in other.squares)

    def add_domain_multiplier(self, var: int, h: Polynomial) -> None:
        cur = self.q.get(var)
        self.q[var] = h if cur is None else cur + h


class _Case4Pieces:
    __slots__ = ("t", "c_eff", "pad", "arch_squares", "c_squares")

    def __init__(self, domain: DomainSpec, order: MonomialOrder):
        dtil = padded_domain_polynomial(domain, 0, order)
        x = Polynomial.variable(0, order)
        t0 = archimedean_constant(domain)
        arch = univariate_psd_decompose(dtil - x + t0, _ONE)
        self.t = t0 + arch.slack
        self.arch_squares = arch.weights_and_squares
        kk = len(_padded_roots(domain))
        c0 = 4 * (4 * self.t) ** kk + 16 * self.t * self.t
        cdec = univariate_psd_decompose(dtil * 4 - (x - self.t) ** 2 + c0, _ONE)
        self.c_eff = c0 + cdec.slack
        self.c_squares = cdec.weights_and_squares
        self.pad = _pad_factor(domain, 0, order)


_PIECES_CACHE: dict = {}


def _case4_pieces(domain: DomainSpec, order: MonomialOrder) -> _Case4Pieces:
    key = (domain.values, order)
    pieces = _PIECES_CACHE.get(key)
    if pieces is None:
        pieces = _Case4Pieces(domain, order)
        _PIECES_CACHE[key] = pieces
    return pieces


def proof_axiom_system(proof: PcProof) -> tuple[Polynomial, ...]:
    """Axiom list certificates derived from a proof refer to: the proof's own
    axioms followed by one domain polynomial per variable."""
    if proof.domain is None:
        raise ValueError("proof carries no domain")
    if proof.axioms:
        order = proof.axioms[0].order
    elif proof.steps:
        order = proof.steps[0].result.order
    else:
        order = GRLEX
    doms = tuple(domain_polynomial(proof.domain, j, order) for j in range(proof.n_vars()))
    return tuple(proof.axioms) + doms


def pc_to_sos_square(proof: PcProof, step_index: int | None = None) -> SosCertificate:
    """Exact certificate for -(r**2) where r is the polynomial a proof step derives.

    Structural induction over the step's ancestors: axiom lines contribute
    -f*f, domain lines -D*D, linear combinations split through the
    parallelogram identity, and variable multiplications go through the
    bounded-interval construction with all decomposition slack folded into
    the positive constants, so epsilon is always exactly zero.
    """
    report = pc_verify(proof)
    if not report.ok:
        raise ValueError("proof does not verify: %s" % report.message)
    if proof.domain is None:
        raise ValueError("proof carries no domain")
    steps = proof.steps
    if not steps:
        raise ValueError("empty input")
    if step_index is None:
        step_index = len(steps) - 1
    if not 0 <= step_index < len(steps):
        raise ValueError("step index %d out of range" % step_index)
    order = steps[step_index].result.order
    axioms = proof_axiom_system(proof)
    n_ax = len(proof.axioms)

    needed = set()
    stack = [step_index]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        if steps[i].kind != AXIOM:
            stack.extend(steps[i].refs)

    pieces: _Case4Pieces | None = None
    shapes: dict[int, _Shape] = {}
    for idx in sorted(needed):
        st = steps[idx]
        sh = _Shape()
        if st.kind == AXIOM:
            sh.f[st.refs[0]] = _ONE
        elif st.kind == DOMAIN_AXIOM:
            sh.add_domain_multiplier(st.var, -st.result)
        elif st.kind == LINEAR_COMBINATION:
            i, j = st.refs
            a, b = st.scalars
            sh.squares.append((_ONE, steps[i].result * a - steps[j].result * b))
            sh.add_scaled(shapes[i], 2 * a * a)
            sh.add_scaled(shapes[j], 2 * b * b)
        elif st.kind == VARIABLE_MULTIPLICATION:
            if pieces is None:
                pieces = _case4_pieces(proof.domain, order)
            r = steps[st.refs[0]].result
            sub = {0: Polynomial.variable(st.var, order)}
            t, c_eff = pieces.t, pieces.c_eff
            for w, q in pieces.c_squares:
                sh.squares.append((w, r * q.substitute(sub)))
            for w, q in pieces.arch_squares:
                sh.squares.append((2 * t * w, r * q.substitute(sub)))
            sh.add_scaled(shapes[st.refs[0]], c_eff + t * t)
            sh.add_domain_multiplier(
                st.var, r * r * pieces.pad.substitute(sub) * (-4 - 2 * t)
            )
        else:
            raise ValueError("unknown step kind %r" % st.kind)
        shapes[idx] = sh

    final = shapes[step_index]
    r_final = steps[step_index].result
    ideal = [(axioms[i] * (-a), i) for i, a in sorted(final.f.items())]
    ideal.extend((final.q[v], n_ax + v) for v in sorted(final.q))
    return _mk_cert(-(r_final * r_final), final.squares, ideal, _ZERO, axioms)


# ---------------------------------------------------------------------------
# approximate positivity from squares


def approx_from_square(cert: SosCertificate, eps) -> tuple[SosCertificate, SosCertificate]:
    """From a certificate for -(r**2), certificates for r + eps and -r + eps."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = poly_sqrt(-cert.target)
    order = r.order
    one = Polynomial.constant(1, order)
    out = []
    for sign in (1, -1):
        lead = one + r * Fraction(sign, 2 * eps)
        squares = [(eps, lead)]
        squares.extend((w / (4 * eps), q) for w, q in cert.squares)
        ideal = tuple((h * Fraction(1, 4 * eps), i) for h, i in cert.ideal_part)
        degree = max(cert.degree, 2 * lead.degree())
        out.append(
            SosCertificate(
                r * sign,
                tuple((w, q) for w, q in squares if w != 0 and not q.is_zero()),
                tuple((h, i) for h, i in ideal if not h.is_zero()),
                eps + cert.epsilon / (4 * eps),
                degree,
            )
        )
    return out[0], out[1]


def alpha_power_cert(
    p: Polynomial,
    alpha: int,
    eps,
    axiom_index: int,
    axioms: Sequence[Polynomial],
    ell: int | None = None,
) -> SosCertificate:
    """Certificate for p + eps from the single axiom p**alpha.

    Repeated squaring: ell doubling squares reach p**(2**ell) with
    2**ell >= alpha, and the telescoping weights keep every cross term
    cancelling exactly.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    if ell is None:
        ell = max(1, (alpha - 1).bit_length())
    if (1 << ell) < alpha:
        raise ValueError("2**ell must reach alpha")
    if axioms[axiom_index] != p ** alpha:
        raise ValueError("axiom %d is not p**alpha" % axiom_index)
    u2 = eps / ell
    order = p.order
    one = Polynomial.constant(1, order)
    c = 1
    squares = [(u2, one + p * (1 / (2 * u2)))]
    for i in range(1, ell):
        c = 2 * c + 1
        gamma = Fraction(1) / (2 ** c * u2 ** ((c + 1) // 2))
        squares.append((u2, one - (p ** (2 ** i)) * gamma))
    coeff = (Fraction(1) / (4 * u2)) ** c
    mult = (p ** ((1 << ell) - alpha)) * (-coeff)
    return _mk_cert(p, squares, ((mult, axiom_index),), eps, axioms)


# ---------------------------------------------------------------------------
# bound certificates and approximate products


def _nonneg_on_domain_cert(
    domain: DomainSpec,
    values: Mapping[Fraction, Fraction],
    var: int,
    axiom_index: int,
    axioms,
    order: MonomialOrder,
) -> SosCertificate:
    """Certificate for the interpolant of nonnegative values on the domain.

    Uses squared Lagrange basis polynomials; the error against the target is
    an exact multiple of the domain polynomial.
    """
    x = Polynomial.variable(var, order)
    target = Polynomial.zero(order)
    ssum = Polynomial.zero(order)
    squares = []
    for v in domain.values:
        val = Fraction(values[v])
        if val < 0:
            raise ValueError("value %s at %s is negative" % (val, v))
        basis = Polynomial.constant(1, order)
        for w in domain.values:
            if w != v:
                basis = basis * (x - w) * Fraction(1, (v - w))
        target = target + basis * val
        if val:
            squares.append((val, basis))
            ssum = ssum + basis * basis * val
    num = univariate_coeffs(target - ssum, var)
    dom = univariate_coeffs(domain_polynomial(domain, var, order), var)
    quo, rem = _c_divmod(_c_trim(num), dom)
    if _c_trim(rem):
        raise RuntimeError("interpolation residue not divisible by the domain polynomial")
    return _mk_cert(target, squares, ((_c_to_poly(quo, var, order), axiom_index),), _ZERO, axioms)


def _variable_bound_pair(
    domain: DomainSpec,
    var: int,
    dom_offset: int,
    axioms,
    order: MonomialOrder,
) -> tuple[Fraction, SosCertificate, SosCertificate]:
    bound = max(_ONE, max(abs(v) for v in domain.values))
    idx = dom_offset + var
    upper = _nonneg_on_domain_cert(
        domain, {v: bound - v for v in domain.values}, var, idx, axioms, order
    )
    lower = _nonneg_on_domain_cert(
        domain, {v: bound + v for v in domain.values}, var, idx, axioms, order
    )
    return bound, upper, lower


def _trivial_pair(order, axioms) -> tuple[Fraction, SosCertificate, SosCertificate]:
    one = Polynomial.constant(1, order)
    upper = _mk_cert(Polynomial.zero(order), (), (), _ZERO, axioms)
    lower = _mk_cert(one * 2, ((Fraction(2), one),), (), _ZERO, axioms)
    return _ONE, upper, lower


def poly_bound_cert(
    domain: DomainSpec,
    g: Polynomial,
    axioms: Sequence[Polynomial],
    dom_offset: int,
) -> SosCertificate:
    """Slack-free certificate for N - (g**2 + 1) from domain axioms alone.

    N is assembled monomial by monomial from per-variable bound certificates
    through the half-sum product identities, so it is exact but deliberately
    generous; axiom dom_offset + j must be the domain polynomial of x_j.
    """
    order = g.order
    h = g * g + 1
    pair_cache: dict[int, tuple] = {}

    def var_pair(j):
        if j not in pair_cache:
            pair_cache[j] = _variable_bound_pair(domain, j, dom_offset, axioms, order)
        return pair_cache[j]

    parts = []
    total = Polynomial.zero(order)
    for mono, coeff in h.sorted_terms():
        t_m, upper, lower = _trivial_pair(order, axioms)
        for j, e in enumerate(mono.exps):
            for _ in range(e):
                bnd, v_up, v_lo = var_pair(j)
                half = Fraction(1, 2)
                new_up = _sum_certs(
                    [
                        _scale_cert(_cert_product(upper, v_lo, axioms), half, axioms),
                        _scale_cert(_cert_product(lower, v_up, axioms), half, axioms),
                    ],
                    axioms,
                )
                new_lo = _sum_certs(
                    [
                        _scale_cert(_cert_product(upper, v_up, axioms), half, axioms),
                        _scale_cert(_cert_product(lower, v_lo, axioms), half, axioms),
                    ],
                    axioms,
                )
                t_m, upper, lower = t_m * bnd, new_up, new_lo
        picked = upper if coeff > 0 else lower
        parts.append(_scale_cert(picked, abs(coeff), axioms))
        total = total + Polynomial.constant(t_m * abs(coeff), order)
    cert = _sum_certs(parts, axioms)
    want = total - h
    if cert.target != want:
        raise RuntimeError("bound certificate assembled an unexpected target")
    return cert


def product_cert(
    cert_plus: SosCertificate,
    cert_minus: SosCertificate,
    g: Polynomial,
    bound_cert: SosCertificate,
    eps,
    axioms: Sequence[Polynomial],
) -> SosCertificate:
    """From certificates of p + eps' and -p + eps', one for p*g + eps.

    bound_cert must prove N - (g**2 + 1) for a constant N; the two input
    certificates are padded to slack exactly 2*eps/N and multiplied against
    the half-shift squares of g.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = cert_plus.target
    if cert_minus.target != -p:
        raise ValueError("certificate pair targets do not match")
    n_poly = bound_cert.target + g * g + 1
    if n_poly.degree() > 0:
        raise ValueError("bound certificate does not match g**2 + 1")
    n_val = n_poly.constant_part()
    if n_val <= 0:
        raise ValueError("bound constant must be positive")
    eps_in = 2 * eps / n_val
    plus = pad_epsilon(cert_plus, eps_in, axioms)
    minus = pad_epsilon(cert_minus, eps_in, axioms)
    half = Fraction(1, 2)
    a = (g + 1) * half
    b = (g - 1) * half
    squares = [(w, q * a) for w, q in plus.squares]
    squares.extend((w, q * b) for w, q in minus.squares)
    ideal = [(h * a * a, i) for h, i in plus.ideal_part]
    ideal.extend((h * b * b, i) for h, i in minus.ideal_part)
    scale = eps_in * half
    squares.extend((w * scale, q) for w, q in bound_cert.squares)
    ideal.extend((h * scale, i) for h, i in bound_cert.ideal_part)
    eps_out = eps + scale * bound_cert.epsilon
    return _mk_cert(p * g, squares, ideal, eps_out, axioms)


def shifted_multiplier_cert(
    p: Polynomial,
    sigma_squares: Sequence[Polynomial],
    c,
    axiom_index: int,
    eps,
    axioms: Sequence[Polynomial],
) -> tuple[SosCertificate, SosCertificate]:
    """Certificates for p + eps and -p + eps from the single axiom p*g, where
    g = sum of the given squares plus the positive constant c."""
    eps = Fraction(eps)
    c = Fraction(c)
    if eps <= 0 or c <= 0:
        raise ValueError("eps and c must be positive")
    order = p.order
    sigma = Polynomial.zero(order)
    for q in sigma_squares:
        sigma = sigma + q * q
    gpoly = sigma + c
    if axioms[axiom_index] != p * gpoly:
        raise ValueError("axiom %d is not p*g" % axiom_index)
    w_lead = Fraction(1, 4 * c * c * eps)
    w_cross = Fraction(1, 4 * c * eps)
    out = []
    for sign in (1, -1):
        lead = sigma * p - Polynomial.constant(2 * eps * c * sign, order)
        squares = [(w_lead, lead)]
        squares.extend((w_cross, q * p) for q in sigma_squares)
        mult = (sigma * (-1) * p + Polynomial.constant(4 * eps * c * sign, order)) * w_lead
        out.append(_mk_cert(p * sign, squares, ((mult, axiom_index),), eps, axioms))
    return out[0], out[1]


def compose_approx(
    pair_p: tuple[SosCertificate, SosCertificate],
    mid_axioms: Sequence[Polynomial],
    pair_factory: Callable[[int, Fraction], tuple[SosCertificate, SosCertificate]],
    domain: DomainSpec,
    axioms: Sequence[Polynomial],
    dom_offset: int,
    eps,
) -> tuple[SosCertificate, SosCertificate]:
    """Chain approximate derivations: pair_p proves +-p (slack <= eps/2) from
    mid_axioms, pair_factory(j, budget) proves +-mid_axioms[j] from the final
    axioms, and the result proves +-p from the final axioms with slack <= eps.

    Each ideal term h*q of the middle certificates is replaced by a product
    certificate for q*h at budget eps/(2*m), m the middle axiom count.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if pair_p[0].target != -pair_p[1].target:
        raise ValueError("certificate pair targets do not match")
    m = len(mid_axioms)
    slot = eps / (2 * m) if m else _ZERO
    out = []
    for cert in pair_p:
        if cert.epsilon > eps / 2:
            raise ValueError("input slack %s exceeds eps/2" % cert.epsilon)
        squares = list(cert.squares)
        ideal: list[tuple[Polynomial, int]] = []
        eps_acc = cert.epsilon
        for h, j in cert.ideal_part:
            q_j = mid_axioms[j]
            bound = poly_bound_cert(domain, h, axioms, dom_offset)
            n_val = (bound.target + h * h + 1).constant_part()
            q_plus, q_minus = pair_factory(j, 2 * slot / n_val)
            prod = product_cert(q_plus, q_minus, h, bound, slot, axioms)
            if prod.target != q_j * h:
                raise ValueError("factory certificates do not target axiom %d" % j)
            squares.extend(prod.squares)
            ideal.extend(prod.ideal_part)
            eps_acc += prod.epsilon
        out.append(_mk_cert(cert.target, squares, ideal, eps_acc, axioms))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# serialization


def certificate_to_json_dict(cert: SosCertificate) -> dict:
    return {
        "target": format_polynomial(cert.target),
        "epsilon": str(cert.epsilon),
        "squares": [
            {"w": str(w), "q": format_polynomial(q)} for w, q in cert.squares
        ],
        "ideal": [
            {"h": format_polynomial(h), "axiom": i} for h, i in cert.ideal_part
        ],
    }


def certificate_from_json_dict(
    data: dict, axioms: Sequence[Polynomial], order: MonomialOrder = GRLEX
) -> SosCertificate:
    if not isinstance(data, dict):
        raise ValueError("certificate document must be an object")
    try:
        target = parse_polynomial(data["target"], order)
        epsilon = Fraction(data["epsilon"])
        squares = tuple(
            (Fraction(item["w"]), parse_polynomial(item["q"], order))
            for item in data["squares"]
        )
        ideal = tuple(
            (parse_polynomial(item["h"], order), int(item["axiom"]))
            for item in data["ideal"]
        )
    except (KeyError, TypeError) as exc:
        raise ValueError("malformed certificate document: %s" % exc) from None
    return SosCertificate(target, squares, ideal, epsilon, _combo_degree(squares, ideal, axioms))
