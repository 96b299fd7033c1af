"""Residual evaluators for the functional equations of the integral hierarchy.

Each evaluator assembles the three additive terms of a second-order
difference (or difference-recurrence) identity and reports the sum together
with the largest term magnitude, so that residuals are meaningful relative
quantities even when prefactors span many orders of magnitude.  Parameter
maps between the coordinate systems used by the different forms of the same
equation live here as well.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma

from .core import (
    EllipticBase,
    Quasiperiods,
    complex_gamma,
    elliptic_gamma,
    hyperbolic_gamma,
    pochhammer,
    theta,
)
from .errors import DomainError, PoleError
from .integrals import (
    DEFAULT_SPEC,
    ComplexParams,
    HypParams,
    RatParams,
    VParams,
    complex_F,
    complex_R,
    hyperbolic_integral,
    rational_integral,
    rational_integral_tilde,
    v_function,
)
from .quadrature import QuadratureSpec

_POLE_TOL = 1e-10


@dataclass(frozen=True)
class Residual:
    """Sum of the additive terms of an identity plus their magnitude scale."""

    value: complex
    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("residual scale must be positive")

    @property
    def relative(self) -> float:
        return abs(self.value) / self.scale


def _residual(terms) -> Residual:
    terms = [complex(t) for t in terms]
    scale = max(abs(t) for t in terms)
    if scale == 0:
        raise ValueError("all terms vanish; residual undefined")
    return Residual(sum(terms), scale)


def _swap67(values):
    out = list(values)
    out[5], out[6] = out[6], out[5]
    return tuple(out)


# ---------------------------------------------------------------------------
# elliptic level


@dataclass(frozen=True)
class EpsilonParams:
    """Multiplicative parameters of the one-body difference-equation form.

    Invariants: prod(eps) = (pq)^2, eps8 = q*eps7, c^2 = eps6*eps8/p^4.
    """

    eps: tuple
    c: complex
    base: EllipticBase

    def __post_init__(self):
        eps = tuple(complex(v) for v in self.eps)
        if len(eps) != 8 or any(v == 0 for v in eps):
            raise DomainError("EpsilonParams needs 8 nonzero entries")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "c", complex(self.c))
        p, q = self.base.p, self.base.q
        target = (p * q) ** 2
        if abs(np.prod(np.asarray(eps)) - target) > 1e-9 * abs(target):
            raise DomainError("epsilon balancing prod(eps) = (pq)^2 violated")
        if abs(eps[7] - q * eps[6]) > 1e-9 * abs(eps[7]):
            raise DomainError("eps8 = q*eps7 violated")
        c2 = eps[5] * eps[7] / p**4
        if abs(self.c**2 - c2) > 1e-9 * abs(c2):
            raise DomainError("c^2 = eps6*eps8/p^4 violated")


def map_t_to_epsilon(t, base: EllipticBase):
    """Multiplicative parameter change for the one-body equation form.

    Returns (EpsilonParams, z) with t6 = c*z, t7 = c/z for the principal
    branch c = sqrt(t6*t7); ``map_epsilon_to_t`` inverts the pair.
    """
    t = tuple(complex(v) for v in t)
    if len(t) != 8 or any(v == 0 for v in t):
        raise DomainError("parameter map needs 8 nonzero entries")
    p, q = base.p, base.q
    c = cmath.sqrt(t[5] * t[6])
    z = t[5] / c
    eps = tuple(q / (c * t[k]) for k in range(5)) + (
        p**4 * c * t[7],
        c / (q * t[7]),
        c / t[7],
    )
    return EpsilonParams(eps, c, base), z


def map_epsilon_to_t(ep: EpsilonParams, z):
    """Inverse of ``map_t_to_epsilon``."""
    z = complex(z)
    if z == 0:
        raise DomainError("z must be nonzero")
    c, q = ep.c, ep.base.q
    t = tuple(q / (c * ep.eps[k]) for k in range(5)) + (
        c * z,
        c / z,
        c / ep.eps[7],
    )
    return t


def potential_B_elliptic(t, q, p) -> complex:
    """Theta-ratio coefficient of the elliptic three-term identity."""
    t = tuple(complex(v) for v in t)
    num = (
        complex(theta(t[5] / (q * t[7]), p))
        * complex(theta(t[5] * t[7], p))
        * complex(theta(t[7] / t[5], p))
    )
    den = (
        complex(theta(t[5] / t[6], p))
        * complex(theta(t[6] / (q * t[5]), p))
        * complex(theta(t[6] * t[5] / q, p))
    )
    for k in range(5):
        num *= complex(theta(t[6] * t[k] / q, p))
        den *= complex(theta(t[7] * t[k], p))
    if abs(den) < _POLE_TOL * max(abs(num), 1.0):
        raise PoleError("theta zero in the denominator of the potential")
    return num / den


def _u_solution(t, base, spec) -> complex:
    v = v_function(VParams(t, base), spec)
    den = 1.0 + 0.0j
    for a in (t[5] * t[7], t[5] / t[7], t[6] * t[7], t[6] / t[7]):
        den *= complex(elliptic_gamma(a, base))
    return v / den


def residual_elliptic_eq(
    t,
    base: EllipticBase,
    spec: QuadratureSpec = DEFAULT_SPEC,
    which: str = "elldif",
) -> Residual:
    """Three-term contiguous identity for the normalized V-function.

    ``which='elldif'`` shifts by q, ``which='elldif2'`` by p (the identity
    holds in both bases because the integral is symmetric in them).
    """
    if which not in ("elldif", "elldif2"):
        raise ValueError("which must be 'elldif' or 'elldif2'")
    q, p = (base.q, base.p) if which == "elldif" else (base.p, base.q)
    t = tuple(complex(v) for v in t)
    u0 = _u_solution(t, base, spec)
    terms = []
    for a, b in ((5, 6), (6, 5)):
        shifted = list(t)
        shifted[a] *= q
        shifted[b] /= q
        ub = _u_solution(tuple(shifted), base, spec)
        pot_args = list(t)
        pot_args[5], pot_args[6] = t[a], t[b]
        pot = potential_B_elliptic(tuple(pot_args), q, p)
        terms.append(pot * (ub - u0))
    terms.append(u0)
    return _residual(terms)


def f1_solution(ep: EpsilonParams, spec: QuadratureSpec = DEFAULT_SPEC):
    """Explicit one-body eigenfunction built from the V-function."""
    base, c, eps = ep.base, ep.c, ep.eps
    q = base.q

    def psi(z):
        z = complex(z)
        t = tuple(q / (c * eps[k]) for k in range(5)) + (c * z, c / z, c / eps[7])
        v = v_function(VParams(t, base), spec)
        den = 1.0 + 0.0j
        for a in (eps[7] * z, eps[7] / z, c * c * z / eps[7], c * c / (z * eps[7])):
            den *= complex(elliptic_gamma(a, base))
        return v / den

    return psi


def _one_body_coefficients(eps, z, q, p):
    """Shift coefficients of the one-body equation: all thetas in base p."""
    z = complex(z)
    a_plus = np.prod([complex(theta(e * z, p)) for e in eps]) / (
        complex(theta(z * z, p)) * complex(theta(q * z * z, p))
    )
    a_minus = np.prod([complex(theta(e / z, p)) for e in eps]) / (
        complex(theta(1.0 / z**2, p)) * complex(theta(q / z**2, p))
    )
    lam = np.prod([complex(theta(eps[k] * eps[7] / q, p)) for k in range(6)])
    return complex(a_plus), complex(a_minus), complex(lam)


def residual_n1_prime(
    ep: EpsilonParams, z, psi=None, spec: QuadratureSpec = DEFAULT_SPEC
) -> Residual:
    """One-body q-difference equation in the multiplicative parameters."""
    q, p = ep.base.q, ep.base.p
    if psi is None:
        psi = f1_solution(ep, spec)
    z = complex(z)
    a_plus, a_minus, lam = _one_body_coefficients(ep.eps, z, q, p)
    p0 = psi(z)
    terms = [
        a_plus * (psi(q * z) - p0),
        a_minus * (psi(z / q) - p0),
        lam * p0,
    ]
    return _residual(terms)


def eigenvalue_n1(ep: EpsilonParams) -> complex:
    """Special eigenvalue picked out by the balancing constraints."""
    q, p = ep.base.q, ep.base.p
    return -np.prod(
        [complex(theta(ep.eps[k] * ep.eps[7] / q, p)) for k in range(6)]
    )


def tilde_epsilon(ep: EpsilonParams) -> EpsilonParams:
    """Parameter change carrying the q-shift equation into the p-shift one."""
    p, q = ep.base.p, ep.base.q
    e = ep.eps
    te = tuple((p / q) * e[k] for k in range(5)) + (
        (q**4 / p**4) * e[5],
        (q / p) * e[6],
        e[7],
    )
    swapped = EllipticBase(q, p)
    c = cmath.sqrt(te[5] * te[7] / q**4)
    return EpsilonParams(te, c, swapped)


def residual_n2(
    ep: EpsilonParams, z, psi=None, spec: QuadratureSpec = DEFAULT_SPEC
) -> Residual:
    """Companion p-difference equation satisfied by the same eigenfunction."""
    if psi is None:
        psi = f1_solution(ep, spec)
    tep = tilde_epsilon(ep)
    p, q = ep.base.p, ep.base.q
    z = complex(z)
    # same one-body structure with the roles of p and q exchanged and the
    # parameters mapped accordingly
    a_plus, a_minus, lam = _one_body_coefficients(tep.eps, z, p, q)
    p0 = psi(z)
    terms = [
        a_plus * (psi(p * z) - p0),
        a_minus * (psi(z / p) - p0),
        lam * p0,
    ]
    return _residual(terms)


# ---------------------------------------------------------------------------
# hyperbolic level


def potential_A_hyperbolic(g, shift_period, qp: Quasiperiods) -> complex:
    """Sine-ratio coefficient of the hyperbolic three-term identity.

    ``shift_period`` is the quasiperiod by which the equation shifts; the
    sines live on the other quasiperiod.
    """
    g = tuple(complex(v) for v in g)
    w2 = complex(shift_period)
    w1 = qp.omega1 + qp.omega2 - w2

    def s(x):
        return cmath.sin(cmath.pi * x / w1)

    num = s(g[5] - g[7] - w2) * s(g[5] + g[7]) * s(g[7] - g[5])
    den = s(g[5] - g[6]) * s(g[6] - g[5] - w2) * s(g[6] + g[5] - w2)
    for k in range(5):
        num *= s(g[6] + g[k] - w2)
        den *= s(g[7] + g[k])
    if abs(den) < _POLE_TOL * max(abs(num), 1.0):
        raise PoleError("sine zero in the denominator of the potential")
    return num / den


def _y_solution(g, qp, spec) -> complex:
    ih = hyperbolic_integral(HypParams(g, qp), spec)
    den = 1.0 + 0.0j
    for a in (g[5] + g[7], g[5] - g[7], g[6] + g[7], g[6] - g[7]):
        den *= complex(hyperbolic_gamma(a, qp))
    return ih / den


def residual_hyperbolic_eq(
    g,
    qp: Quasiperiods,
    which: str = "br",
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> Residual:
    """Three-term difference identity for the normalized hyperbolic integral.

    ``which='br'`` shifts by omega2 (sines on omega1); ``which='br2'`` is
    the quasiperiod-swapped equation.
    """
    if which not in ("br", "br2"):
        raise ValueError("which must be 'br' or 'br2'")
    shift = qp.omega2 if which == "br" else qp.omega1
    g = tuple(complex(v) for v in g)
    y0 = _y_solution(g, qp, spec)
    terms = []
    for a, b in ((5, 6), (6, 5)):
        shifted = list(g)
        shifted[a] += shift
        shifted[b] -= shift
        yb = _y_solution(tuple(shifted), qp, spec)
        pot_args = list(g)
        pot_args[5], pot_args[6] = g[a], g[b]
        pot = potential_A_hyperbolic(tuple(pot_args), shift, qp)
        terms.append(pot * (yb - y0))
    terms.append(y0)
    return _residual(terms)


# ---------------------------------------------------------------------------
# rational level


def potential_B_rational(alpha) -> complex:
    """Rational coefficient shared by the three degenerate equation families."""
    a = tuple(complex(v) for v in alpha)
    num = (a[5] - a[7] - 1) * (a[5] + a[7]) * (a[7] - a[5])
    den = (a[5] - a[6]) * (a[6] - a[5] - 1) * (a[6] + a[5] - 1)
    for k in range(5):
        num *= a[6] + a[k] - 1
        den *= a[7] + a[k]
    if abs(den) < _POLE_TOL * max(abs(num), 1.0):
        raise PoleError("vanishing denominator in the rational potential")
    return num / den


def _i_r_solution(alpha, spec) -> complex:
    val = rational_integral(RatParams(alpha), spec)
    log_den = 0.0 + 0.0j
    for x in (
        alpha[5] + alpha[7],
        alpha[5] - alpha[7],
        alpha[6] + alpha[7],
        alpha[6] - alpha[7],
    ):
        log_den += loggamma(x)
    return val * complex(np.exp(-log_den))


def _sine_coefficient(a):
    num = (
        cmath.sin(cmath.pi * (a[7] + a[5]))
        * cmath.sin(cmath.pi * (a[7] - a[5]))
        * cmath.sin(cmath.pi * (a[6] + a[3]))
        * cmath.sin(cmath.pi * (a[6] + a[4]))
    )
    den = cmath.sin(cmath.pi * (a[5] - a[6]))
    for k in range(3):
        den *= cmath.sin(cmath.pi * (a[7] + a[k]))
    if abs(den) < _POLE_TOL * max(abs(num), 1.0):
        raise PoleError("sine zero in the identity coefficient")
    return num / den


def residual_rational_eq(
    alpha, which: str = "rateq1", spec: QuadratureSpec = DEFAULT_SPEC
) -> Residual:
    """Difference equation ('rateq1') or the companion two-integral identity
    ('ratid1') for the normalized plain hypergeometric integral."""
    if which not in ("rateq1", "ratid1"):
        raise ValueError("which must be 'rateq1' or 'ratid1'")
    alpha = tuple(complex(v) for v in alpha)
    i0 = _i_r_solution(alpha, spec)
    terms = []
    if which == "rateq1":
        for a, b in ((5, 6), (6, 5)):
            shifted = list(alpha)
            shifted[a] += 1
            shifted[b] -= 1
            ib = _i_r_solution(tuple(shifted), spec)
            pot_args = list(alpha)
            pot_args[5], pot_args[6] = alpha[a], alpha[b]
            pot = potential_B_rational(tuple(pot_args))
            terms.append(pot * (ib - i0))
    else:
        for args in (alpha, _swap67(alpha)):
            tilde = rational_integral_tilde(RatParams(args), spec)
            terms.append(_sine_coefficient(args) * (tilde - i0))
    terms.append(i0)
    return _residual(terms)


# ---------------------------------------------------------------------------
# complex level


def _cgamma4(s, ns, i, j):
    val = 1.0 + 0.0j
    for sgn in (1.0, -1.0):
        val *= complex(complex_gamma(s[i] + sgn * s[j], round(ns[i] + sgn * ns[j])))
    return val


def _calF(params: ComplexParams, spec) -> complex:
    f = complex_F(params, spec)
    den = _cgamma4(params.s, params.n, 5, 7) * _cgamma4(params.s, params.n, 6, 7)
    return f / den


def _shift_complex(params: ComplexParams, ds6, dn6, ds7, dn7):
    s = list(params.s)
    n = list(params.n)
    s[5] += ds6
    n[5] += dn6
    s[6] += ds7
    n[6] += dn7
    return ComplexParams(tuple(s), tuple(n), params.nu, params.family)


def residual_complex_eq(
    params: ComplexParams, which: str = "brn1", spec: QuadratureSpec = DEFAULT_SPEC
) -> Residual:
    """Difference-recurrence equations for the normalized complex-field
    hypergeometric sum-integral (family F)."""
    if which not in ("brn1", "brn1p"):
        raise ValueError("which must be 'brn1' or 'brn1p'")
    if params.family != "F":
        raise DomainError("residual_complex_eq needs family-F parameters")
    dn = -1 if which == "brn1" else 1
    sign = 1.0 if which == "brn1" else -1.0

    def ident(sk, nk):
        # 'brn1' pairs the continuous shift with alpha = (i s - n)/2,
        # 'brn1p' with the conjugate identification (i s + n)/2
        return 0.5 * (1j * sk - sign * nk)

    f0 = _calF(params, spec)
    terms = []
    for a, b in ((5, 6), (6, 5)):
        ds = [0.0] * 8
        dnv = [0] * 8
        ds[a], dnv[a] = -1j, dn
        ds[b], dnv[b] = 1j, -dn
        shifted = _shift_complex(params, ds[5], dnv[5], ds[6], dnv[6])
        fb = _calF(shifted, spec)
        al = [ident(sk, nk) for sk, nk in zip(params.s, params.n)]
        al[5], al[6] = ident(params.s[a], params.n[a]), ident(params.s[b], params.n[b])
        pot = potential_B_rational(al)
        terms.append(pot * (fb - f0))
    terms.append(f0)
    return _residual(terms)


def _calR(params: ComplexParams, spec, method) -> complex:
    r = complex_R(params, spec, method=method)
    den = 1.0 + 0.0j
    for k in (5, 6):
        for sgn in (1.0, -1.0):
            a = 1.0 - (
                params.n[k]
                + 1j * params.s[k]
                + sgn * (params.n[7] + 1j * params.s[7])
            ) / 2.0
            m = round(params.n[k] + sgn * params.n[7] - 1)
            den *= complex(pochhammer(a, m))
    return r / den


def residual_complex_rat_eq(
    params: ComplexParams,
    which: str = "brnrat1",
    spec: QuadratureSpec = DEFAULT_SPEC,
    method: str = "residues",
) -> Residual:
    """Difference-recurrence equations for the normalized rational
    sum-integral (family R)."""
    if which not in ("brnrat1", "brnrat2"):
        raise ValueError("which must be 'brnrat1' or 'brnrat2'")
    if params.family != "R":
        raise DomainError("residual_complex_rat_eq needs family-R parameters")
    ds = -1j if which == "brnrat1" else 1j
    sign = 1.0 if which == "brnrat1" else -1.0

    def ident(sk, nk):
        # 'brnrat1' uses (i s + n)/2, 'brnrat2' uses (-i s + n)/2
        return 0.5 * (sign * 1j * sk + nk)

    r0 = _calR(params, spec, method)
    terms = []
    for a, b in ((5, 6), (6, 5)):
        dsv = [0.0] * 8
        dnv = [0] * 8
        dsv[a], dnv[a] = ds, 1
        dsv[b], dnv[b] = -ds, -1
        shifted = _shift_complex(params, dsv[5], dnv[5], dsv[6], dnv[6])
        rb = _calR(shifted, spec, method)
        al = [ident(sk, nk) for sk, nk in zip(params.s, params.n)]
        al[5], al[6] = ident(params.s[a], params.n[a]), ident(params.s[b], params.n[b])
        pot = potential_B_rational(al)
        terms.append(pot * (rb - r0))
    terms.append(r0)
    return _residual(terms)


# ---------------------------------------------------------------------------
# additive one-body form of the rational equation


@dataclass(frozen=True)
class BetaParams:
    """Additive parameters of the symmetric one-body rational equation.

    Invariants: sum(beta) = 2, beta8 = beta7 + 1, C = (beta6 + beta8)/2.
    """

    beta: tuple
    C: complex

    def __post_init__(self):
        beta = tuple(complex(v) for v in self.beta)
        if len(beta) != 8:
            raise DomainError("BetaParams needs exactly 8 entries")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "C", complex(self.C))
        if abs(sum(beta) - 2.0) > 1e-9:
            raise DomainError("beta balancing sum(beta) = 2 violated")
        if abs(beta[7] - beta[6] - 1.0) > 1e-9:
            raise DomainError("beta8 = beta7 + 1 violated")
        if abs(self.C - 0.5 * (beta[5] + beta[7])) > 1e-9:
            raise DomainError("C = (beta6 + beta8)/2 violated")


def map_alpha_to_beta(alpha) -> tuple:
    """Additive parameter change; returns (BetaParams, z) with
    alpha6 = C + z, alpha7 = C - z."""
    a = tuple(complex(v) for v in alpha)
    if len(a) != 8:
        raise DomainError("parameter map needs 8 entries")
    C = 0.5 * (a[5] + a[6])
    z = 0.5 * (a[5] - a[6])
    beta = tuple(1.0 - a[k] - C for k in range(5)) + (
        C + a[7],
        C - a[7] - 1.0,
        C - a[7],
    )
    return BetaParams(beta, C), z


def map_beta_to_alpha(bp: BetaParams, z) -> tuple:
    """Inverse of ``map_alpha_to_beta``."""
    z = complex(z)
    C = bp.C
    alpha8 = bp.beta[5] - C
    return tuple(1.0 - bp.beta[k] - C for k in range(5)) + (
        C + z,
        C - z,
        alpha8,
    )


def residual_n1rat(
    bp: BetaParams, z, psi=None, spec: QuadratureSpec = DEFAULT_SPEC
) -> Residual:
    """Symmetric one-body form of the rational difference equation."""
    z = complex(z)
    if psi is None:
        def psi(w):
            return _i_r_solution(map_beta_to_alpha(bp, w), spec)

    b = np.asarray(bp.beta)
    den_p = 2.0 * z * (2.0 * z + 1.0)
    den_m = 2.0 * z * (2.0 * z - 1.0)
    if min(abs(den_p), abs(den_m)) < _POLE_TOL:
        raise PoleError("shift coefficient pole at z = 0 or +-1/2")
    p0 = psi(z)
    terms = [
        complex(np.prod(b + z)) / den_p * (psi(z + 1.0) - p0),
        complex(np.prod(b - z)) / den_m * (psi(z - 1.0) - p0),
        complex(np.prod([b[k] + b[6] for k in range(6)])) * p0,
    ]
    return _residual(terms)
