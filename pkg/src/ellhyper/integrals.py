"""The hypergeometric integrals of the hierarchy.

Elliptic level: the 8-parameter V-function on the unit torus and the N-body
inner product built from the same density.  Hyperbolic level: the integral
I_h over hyperbolic gamma functions.  Rational level: the plain Mellin-Barnes
integral I_r and its tilde companion.  Complex level: the sum-integral F over
a continuous variable and a discrete (half-)integer index, its rational
residue-sum sibling R, and the complex inner product.

Contour conventions: circle integrals are positively oriented on |x| = 1;
line integrals run up the imaginary axis or along the real axis as each
definition requires.  No automatic contour deformation is performed; domain
violations raise errors instead.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma

from .core import (
    EllipticBase,
    Quasiperiods,
    complex_gamma_arr,
    elliptic_gamma,
    hyperbolic_gamma_arr,
    hyperbolic_gamma_log_arr,
    qpochhammer_inf,
    theta,
)
from .errors import ConvergenceError, DomainError, PinchingError
from .quadrature import (
    IntegralResult,
    QuadratureSpec,
    RationalFunction,
    bilateral_sum,
    circle_integral,
    line_integral,
)

_BAL_TOL = 1e-12
DEFAULT_SPEC = QuadratureSpec()


def _tuple8(values, what):
    vals = tuple(complex(v) for v in values)
    if len(vals) != 8:
        raise DomainError("%s needs exactly 8 parameters" % what)
    return vals


def _check_balance(actual, target, what):
    scale = max(abs(target), 1.0)
    deficit = abs(actual - target)
    if deficit > _BAL_TOL * scale:
        raise DomainError(
            "%s balancing violated: |actual - target| = %.3e (actual %s, target %s)"
            % (what, deficit, actual, target)
        )


# ---------------------------------------------------------------------------
# elliptic level


@dataclass(frozen=True)
class VParams:
    """Eight parameters on the open unit disc plus the elliptic bases.

    ``balanced=False`` skips the product constraint; that mode exists only
    for the inner-product density, which is defined pre-balancing.
    """

    t: tuple
    base: EllipticBase
    balanced: bool = True

    def __post_init__(self):
        object.__setattr__(self, "t", _tuple8(self.t, "VParams"))
        if any(abs(tj) >= 1 for tj in self.t):
            raise DomainError("V-function parameters must satisfy |t_j| < 1")
        if self.balanced:
            prod = np.prod(np.asarray(self.t))
            _check_balance(prod, (self.base.p * self.base.q) ** 2, "V-function")


def _one_body_elliptic(x, ts, base):
    """prod_k Gamma(t_k x^{+-1}) / Gamma(x^{+-2}) on arrays of circle nodes.

    The denominator is rewritten through the reflection identity
    1/(Gamma(z)Gamma(1/z)) = -theta(z;p) theta(z;q) / z with z = x^2, which
    is regular on the contour.
    """
    x = np.asarray(x, dtype=complex)
    ts = np.asarray(ts, dtype=complex)
    args = np.concatenate(
        [np.multiply.outer(ts, x).ravel(), np.multiply.outer(ts, 1.0 / x).ravel()]
    )
    gam = np.asarray(elliptic_gamma(args, base)).reshape(2 * ts.size, x.size)
    num = gam.prod(axis=0)
    z = x * x
    return -num * theta(z, base.p) * theta(z, base.q) / z


def _pair_elliptic(xj, xk, t, base):
    """Gamma(t xj^{+-1} xk^{+-1}) / Gamma(xj^{+-1} xk^{+-1}) coupling factor."""
    w1 = xj * xk
    w2 = xj / xk
    args = np.concatenate(
        [(t * w1).ravel(), (t / w1).ravel(), (t * w2).ravel(), (t / w2).ravel()]
    )
    gam = np.asarray(elliptic_gamma(args, base)).reshape(4, w1.size)
    num = gam.prod(axis=0).reshape(w1.shape)
    den_inv = (
        -theta(w1, base.p) * theta(w1, base.q) / w1
        * (-theta(w2, base.p) * theta(w2, base.q) / w2)
    )
    return num * den_inv


def _torus_mean_2(f, spec, offset=0.0):
    """Mean of f over the 2-torus on tensor-product equispaced nodes."""
    m = spec.circle_nodes
    x = np.exp(2j * np.pi * (np.arange(m) + offset) / m)
    value = complex(np.mean(f(x[:, None], x[None, :])))
    for r in range(1, spec.max_refinements + 1):
        m *= 2
        if m > 4096:
            raise ConvergenceError(
                "2-torus integral did not converge below %d^2 nodes" % m
            )
        x = np.exp(2j * np.pi * (np.arange(m) + offset) / m)
        new = complex(np.mean(f(x[:, None], x[None, :])))
        if abs(new - value) <= spec.tol * max(abs(new), abs(value), 1e-300):
            return IntegralResult(new, abs(new - value), m * m, r)
        value = new
    raise ConvergenceError("2-torus integral did not converge")


def v_function(params: VParams, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """The elliptic hypergeometric V-function (8 balanced parameters)."""
    base = params.base
    pref = complex(qpochhammer_inf(base.p, base.p)) * complex(
        qpochhammer_inf(base.q, base.q)
    )
    res = circle_integral(lambda x: _one_body_elliptic(x, params.t, base), spec)
    return pref * res.value / 2.0


def inner_product_elliptic(
    N: int,
    t,
    ts,
    base: EllipticBase,
    phi=None,
    psi=None,
    spec: QuadratureSpec = DEFAULT_SPEC,
    node_offset: float = 0.0,
) -> complex:
    """<phi, psi> with the elliptic N-body density (N <= 2).

    ``ts`` may have 8 entries (the full density) or 6 (the reduced density
    of the closed-form evaluation); ``t`` is the pairwise coupling, unused
    at N=1.  ``phi``/``psi`` default to 1 and must be vectorized callables
    of the torus variables.  ``node_offset`` shifts the quadrature nodes by
    a fraction of the spacing, which keeps them clear of removable
    singularities at x = +-1 when phi or psi wraps a difference operator.
    """
    if N not in (1, 2):
        raise DomainError("inner products implemented for N in {1, 2}")
    ts = tuple(complex(v) for v in ts)
    t = complex(t)
    if any(abs(v) >= 1 for v in ts) or abs(t) >= 1:
        raise DomainError("inner product requires |t|, |t_j| < 1")
    pref = complex(qpochhammer_inf(base.p, base.p)) * complex(
        qpochhammer_inf(base.q, base.q)
    )

    if N == 1:
        def f(x):
            val = _one_body_elliptic(x, ts, base)
            if phi is not None:
                val = val * phi(x)
            if psi is not None:
                val = val * psi(x)
            return val

        res = circle_integral(f, spec, offset=node_offset)
        return pref * res.value / 2.0

    def f2(x1, x2):
        val = _one_body_elliptic(x1.ravel(), ts, base).reshape(x1.shape) * np.ones_like(
            x2
        )
        val = val * _one_body_elliptic(x2.ravel(), ts, base).reshape(x2.shape)
        val = val * _pair_elliptic(x1, x2, t, base)
        if phi is not None:
            val = val * phi(x1, x2)
        if psi is not None:
            val = val * psi(x1, x2)
        return val

    res = _torus_mean_2(f2, spec, offset=node_offset)
    # (1/4 pi i)^2 per-variable measure with dx/x and the 1/N! symmetry factor
    return pref**2 * res.value / (4.0 * 2.0)


# ---------------------------------------------------------------------------
# hyperbolic level


@dataclass(frozen=True)
class HypParams:
    """Eight parameters with positive real parts summing to 2(w1+w2)."""

    g: tuple
    qp: Quasiperiods

    def __post_init__(self):
        object.__setattr__(self, "g", _tuple8(self.g, "HypParams"))
        if any(gj.real <= 0 for gj in self.g):
            raise DomainError("hyperbolic parameters must have Re(g_j) > 0")
        total = sum(self.g)
        _check_balance(total, 2 * (self.qp.omega1 + self.qp.omega2), "hyperbolic")


def _auto_truncation(f, start, cap=400.0, floor=1e-17):
    """Smallest radius at which |f(i t)| has decayed to ``floor`` relative."""
    probe = np.atleast_1d(f(np.array([0.25j, 1j, -1j, -0.25j])))
    peak = float(np.nanmax(np.abs(probe)))
    peak = max(peak, 1e-300)
    radius = start
    while radius < cap:
        edge = np.atleast_1d(f(np.array([1j * radius, -1j * radius])))
        if max(abs(complex(v)) for v in edge) < floor * peak:
            return radius
        radius *= 1.6
    raise DomainError(
        "integrand has not decayed at |Im z| = %.3g; parameters violate "
        "the decay conditions" % cap
    )


def _hyp_integrand(params: HypParams):
    g = np.asarray(params.g, dtype=complex)
    qp = params.qp
    wbar = qp.omega1 + qp.omega2

    def f(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        args = np.concatenate(
            [
                (g[:, None] + z[None, :]).ravel(),
                (g[:, None] - z[None, :]).ravel(),
                wbar - 2 * z,
                wbar + 2 * z,
            ]
        )
        # sum the factor logs before exponentiating: near-degenerate
        # quasiperiods give individual factors far outside double range
        # while the balanced product stays moderate
        logs = np.asarray(hyperbolic_gamma_log_arr(args, qp)).reshape(18, z.size)
        return np.exp(logs.sum(axis=0))

    return f


def hyperbolic_integral(
    params: HypParams, spec: QuadratureSpec = DEFAULT_SPEC
) -> complex:
    """I_h: the hyperbolic analogue of the V-function (contour up i*R)."""
    qp = params.qp
    f = _hyp_integrand(params)
    radius = _auto_truncation(f, 2.0 * abs(qp.omega1 + qp.omega2))
    res = line_integral(f, spec.with_(line_truncation=radius), axis="imaginary")
    return res.value / (2j * np.sqrt(qp.omega1 * qp.omega2))


# ---------------------------------------------------------------------------
# rational level


@dataclass(frozen=True)
class RatParams:
    """Eight parameters summing to 2, with two distinguished flipped indices.

    ``flipped`` holds 1-based positions whose gamma factors sit reflected in
    the denominator of the integrand; the contour requires Re(alpha_j) > 0
    for every unflipped j.
    """

    alpha: tuple
    flipped: tuple = (4, 5)

    def __post_init__(self):
        object.__setattr__(self, "alpha", _tuple8(self.alpha, "RatParams"))
        a, b = self.flipped
        if not (1 <= a <= 8 and 1 <= b <= 8 and a != b):
            raise DomainError("flipped must be two distinct indices in 1..8")
        _check_balance(sum(self.alpha), 2.0, "rational")
        for j, al in enumerate(self.alpha, start=1):
            if j not in self.flipped and al.real <= 0:
                raise DomainError(
                    "contour requires Re(alpha_%d) > 0 (pole separation)" % j
                )


def _rat_integrand(alpha, flipped):
    alpha = np.asarray(alpha, dtype=complex)
    keep = np.array([j not in flipped for j in range(1, 9)])

    def f(u):
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        log = np.zeros(u.shape, dtype=complex)
        for al in alpha[keep]:
            log += loggamma(al + u) + loggamma(al - u)
        for al in alpha[~keep]:
            log -= loggamma(1 - al + u) + loggamma(1 - al - u)
        log -= loggamma(2 * u) + loggamma(-2 * u)
        return np.exp(log)

    return f


def rational_integral(
    params: RatParams, spec: QuadratureSpec = DEFAULT_SPEC
) -> complex:
    """I_r: the plain hypergeometric (Mellin-Barnes) integral."""
    f = _rat_integrand(params.alpha, params.flipped)
    radius = _auto_truncation(f, 6.0)
    res = line_integral(f, spec.with_(line_truncation=radius), axis="imaginary")
    return res.value / (4j * np.pi)


def rational_integral_tilde(
    params: RatParams, spec: QuadratureSpec = DEFAULT_SPEC
) -> complex:
    """The companion integral of the two-integral identity, including its
    classical-gamma prefactor (normalized form)."""
    if params.flipped != (4, 5):
        raise DomainError("tilde integral is defined for flipped = (4, 5)")
    al = np.asarray(params.alpha, dtype=complex)

    def f(u):
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        log = np.zeros(u.shape, dtype=complex)
        for k in (0, 1, 2, 6, 7):
            log += loggamma(al[k] + u) + loggamma(al[k] - u)
        for k in (3, 4, 5):
            log -= loggamma(1 - al[k] + u) + loggamma(1 - al[k] - u)
        log -= loggamma(2 * u) + loggamma(-2 * u)
        return np.exp(log)

    # gamma counting balances the exponential factors here: the integrand
    # decays only algebraically (|u|^-3), so stretch the contour with sinh
    res = line_integral(
        f, spec.with_(line_truncation=1e7), axis="imaginary", transform="sinh"
    )
    pref = np.exp(
        loggamma(1 - al[5] + al[7])
        + loggamma(1 - al[5] - al[7])
        - loggamma(al[6] + al[7])
        - loggamma(al[6] - al[7])
    )
    return complex(pref) * res.value / (4j * np.pi)


# ---------------------------------------------------------------------------
# complex level


@dataclass(frozen=True)
class ComplexParams:
    """Eight (s_k, n_k) pairs with n_k in Z+nu and a family tag.

    family='F': sum(s) = -4i, sum(n) = 0, Im(s_k) < 0 (contour R).
    family='R': sum(s) = 0, sum(n) = 4 (residue-summable rational terms).
    """

    s: tuple
    n: tuple
    nu: float = 0.0
    family: str = "F"

    def __post_init__(self):
        object.__setattr__(self, "s", _tuple8(self.s, "ComplexParams"))
        ns = tuple(float(v) for v in self.n)
        if len(ns) != 8:
            raise DomainError("ComplexParams needs exactly 8 indices")
        object.__setattr__(self, "n", ns)
        if self.nu not in (0, 0.5):
            raise DomainError("nu must be 0 or 1/2")
        for nk in ns:
            if abs(nk - self.nu - round(nk - self.nu)) > 1e-12:
                raise DomainError("indices must lie in Z + nu")
        if self.family == "F":
            _check_balance(sum(self.s), -4j, "family-F continuous")
            _check_balance(sum(ns) + 0j, 0.0, "family-F discrete")
            if any(sk.imag >= 0 for sk in self.s):
                raise DomainError(
                    "family F requires Im(s_k) < 0 (contour deformation out of scope)"
                )
        elif self.family == "R":
            _check_balance(sum(self.s), 0.0, "family-R continuous")
            _check_balance(sum(ns) + 0j, 4.0, "family-R discrete")
        else:
            raise DomainError("family must be 'F' or 'R'")


def _f_term_factory(s, ns, spec, weight=None):
    """Returns g(n) = integral over real y of the F-type term at index n."""
    s = np.asarray(s, dtype=complex)
    ns = np.asarray(ns, dtype=float)

    def g(n):
        def integrand(y):
            y = np.atleast_1d(np.asarray(y, dtype=complex))
            xs = np.concatenate(
                [(s[:, None] + y[None, :]).ravel(), (s[:, None] - y[None, :]).ravel()]
            )
            ms = np.concatenate(
                [np.repeat(ns + n, y.size), np.repeat(ns - n, y.size)]
            ).reshape(16, y.size)
            gam = complex_gamma_arr(xs.reshape(16, y.size), ms)
            val = (y * y + n * n) * gam.prod(axis=0)
            if weight is not None:
                val = val * weight(y)
            return val

        res = line_integral(
            integrand,
            spec.with_(line_truncation=1e8 * (1.0 + abs(n))),
            transform="sinh",
            scale=max(1.0, abs(n)),
        )
        return res.value

    return g


def complex_F(params: ComplexParams, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """The complex-field analogue of the Euler-Gauss hypergeometric function."""
    if params.family != "F":
        raise DomainError("complex_F requires family-F parameters")
    g = _f_term_factory(params.s, params.n, spec)
    # terms decay like a large negative power of |n| (exponent set by the
    # fixed discrete balancing), so plain shell summation converges
    res = bilateral_sum(g, params.nu, spec)
    return res.value / (8.0 * np.pi)


def _poch_linear_factors(A, m):
    """(A - i y/2 + r)_{r=0..m-1} style data: returns (const, roots, poles).

    The Pochhammer (a)_m with a = A + c*y splits into linear factors in y;
    poles appear for m < 0.
    """
    roots, poles = [], []
    const = 1.0 + 0.0j
    if m >= 0:
        for r in range(m):
            roots.append(-2j * (A + r))
            const *= -0.5j
    else:
        for r in range(1, -m + 1):
            poles.append(-2j * (A - r))
            const /= -0.5j
    return const, roots, poles


def _r_term_rational(s, ns, n):
    """The R-family integrand at index n as an explicit rational function.

    Returns (rf, plus_poles, minus_poles): the '+'-sign factors put their
    poles at Re(y) = -Re(s_k) (left of the upward contour for Re(s_k) > 0),
    the '-'-sign factors mirror them.
    """
    pref = 1.0 + 0.0j
    roots = [1j * n, -1j * n]
    poles = []
    plus_poles, minus_poles = [], []
    for sk, nk in zip(s, ns):
        # (1 - (n_k + i s_k + n + i y)/2)_{n_k + n - 1}
        m = int(round(nk + n - 1))
        A = 1 - (nk + 1j * sk + n) / 2.0
        c, rr, pp = _poch_linear_factors(A, m)
        pref *= c
        roots += rr
        poles += pp
        plus_poles += pp
        # (1 - (n_k + i s_k - n - i y)/2)_{n_k - n - 1}: conjugate sign of y
        m2 = int(round(nk - n - 1))
        A2 = 1 - (nk + 1j * sk - n) / 2.0
        if m2 >= 0:
            for r in range(m2):
                roots.append(2j * (A2 + r))
                pref *= 0.5j
        else:
            for r in range(1, -m2 + 1):
                p = 2j * (A2 - r)
                poles.append(p)
                minus_poles.append(p)
                pref /= 0.5j
    return RationalFunction(pref, roots, poles), plus_poles, minus_poles


def _cluster(points, tol=1e-9):
    clusters = []
    for p in points:
        for i, (c, cnt) in enumerate(clusters):
            if abs(p - c) < tol * max(1.0, abs(c)):
                clusters[i] = ((c * cnt + p) / (cnt + 1), cnt + 1)
                break
        else:
            clusters.append((p, 1))
    return clusters


def _r_term_value(s, ns, n, spec, method):
    rf, plus, minus = _r_term_rational(s, ns, n)
    if not plus or not minus:
        # all poles on one side: the separating contour closes on the empty
        # side and the term vanishes identically
        return 0.0 + 0.0j
    plus_c = _cluster(plus)
    minus_c = _cluster(minus)
    for c, _ in plus_c:
        for c2, _ in minus_c:
            if abs(c - c2) < 1e-8 * max(1.0, abs(c)):
                raise PinchingError(
                    "pole families collide at y = %s (index n = %s)" % (c, n)
                )
    if method == "residues":
        # close to the left of the upward contour: +2 pi i times the
        # '+'-family residues
        total = 0.0 + 0.0j
        all_centers = [c for c, _ in plus_c] + [c for c, _ in minus_c]
        for c, _ in plus_c:
            dists = [abs(c - o) for o in all_centers if abs(c - o) > 1e-8]
            radius = max(0.3 * min(dists), 1e-6) if dists else 0.3
            total += rf.residue_at(c, radius)
        return 2j * np.pi * total
    if method != "quadrature":
        raise ValueError("method must be 'residues' or 'quadrature'")
    for c, _ in plus_c:
        if c.real >= -1e-9:
            raise DomainError(
                "straight-contour quadrature needs all '+'-family poles at "
                "Re(y) < 0; pole at %s (use method='residues')" % c
            )
    for c, _ in minus_c:
        if c.real <= 1e-9:
            raise DomainError(
                "straight-contour quadrature needs all '-'-family poles at "
                "Re(y) > 0; pole at %s (use method='residues')" % c
            )
    res = line_integral(
        rf,
        spec.with_(line_truncation=1e4),
        axis="imaginary",
        transform="sinh",
    )
    return res.value


def complex_R(
    params: ComplexParams,
    spec: QuadratureSpec = DEFAULT_SPEC,
    method: str = "residues",
) -> complex:
    """The rational sum-of-residues sibling of the complex F-function.

    Only finitely many discrete indices contribute: outside a window set by
    the n_k all integrand poles lie on one side of the contour and the term
    vanishes.  ``method='residues'`` sums residues exactly (up to the small
    circle quadrature used to extract them); ``method='quadrature'`` runs
    the straight-line integral and demands proper pole separation.
    """
    if params.family != "R":
        raise DomainError("complex_R requires family-R parameters")
    ns = params.n
    nmin = min(ns)
    # '+' poles need some n_k + n < 1; '-' poles need some n_k - n < 1
    lo, hi = nmin - 1.0, 1.0 - nmin
    total = 0.0 + 0.0j
    n = math.floor(lo - params.nu) + params.nu
    while n <= hi + 1:
        if lo < n < hi:
            total += _r_term_value(params.s, ns, n, spec, method)
        n += 1
    return total / (8.0 * np.pi)


def complex_r_term(params: ComplexParams, n, spec=DEFAULT_SPEC, method="residues"):
    """Single discrete-index term of the R sum-integral (before the 1/8 pi)."""
    return _r_term_value(params.s, params.n, n, spec, method)


# ---------------------------------------------------------------------------
# complex inner product (N <= 2)


def _complex_one_body_log(u, gammas, ns, m):
    """Sum of log Gamma(gamma_l +- u, n_l +- m) over l, vectorized in u."""
    log = np.zeros(np.shape(u), dtype=complex)
    for gl, nl in zip(gammas, ns):
        for sgn in (1.0, -1.0):
            x = gl + sgn * u
            nn = nl + sgn * m
            log += loggamma((nn + 1j * x) / 2.0) - loggamma(1.0 + (nn - 1j * x) / 2.0)
    return log


def _complex_pair_log(u1, m1, u2, m2, gamma, n):
    """log of the pairwise coupling density factor, vectorized."""
    log = np.zeros(np.broadcast(u1, u2).shape, dtype=complex)
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            x = gamma + s1 * u1 + s2 * u2
            nn = n + s1 * m1 + s2 * m2
            log += loggamma((nn + 1j * x) / 2.0) - loggamma(1.0 + (nn - 1j * x) / 2.0)
            # denominator factor with the same sign pattern and gamma = 0
            d = s1 * u1 + s2 * u2
            d = np.where(np.abs(d) < 1e-9, 1e-9, d)
            nd = s1 * m1 + s2 * m2
            log -= loggamma((nd + 1j * d) / 2.0) - loggamma(1.0 + (nd - 1j * d) / 2.0)
    return log


def _u_grid(spec, truncation, scale=1.0, panels=None):
    """Sinh-stretched Gauss-Legendre grid on the real axis with weights."""
    from .quadrature import _GL_NODES, _GL_WEIGHTS

    if panels is None:
        panels = 2 * spec.line_panels
    w_max = float(np.arcsinh(truncation / scale))
    edges = np.linspace(-w_max, w_max, panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    w = (mids[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    dw = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return scale * np.sinh(w), scale * np.cosh(w) * dw


def inner_product_complex(
    N: int,
    gamma,
    n,
    gammas,
    ns,
    nu,
    phi=None,
    psi=None,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """<phi, psi> at the complex level (N <= 2).

    ``gammas``/``ns`` may have 8 entries (full density) or 6 (the reduced
    evaluation identity); ``gamma``, ``n`` are the coupling pair, unused at
    N=1.  Test functions receive (u, m) arrays (or (u1, m1, u2, m2) at N=2)
    and must be vectorized.
    """
    if N not in (1, 2):
        raise DomainError("inner products implemented for N in {1, 2}")
    gammas = tuple(complex(v) for v in gammas)
    ns = tuple(float(v) for v in ns)
    if any(g.imag >= 0 for g in gammas):
        raise DomainError("complex inner product requires Im(gamma_l) < 0")

    if N == 1:
        def g(m):
            def integrand(u):
                u = np.atleast_1d(np.asarray(u, dtype=complex))
                val = (u * u + m * m) * np.exp(
                    _complex_one_body_log(u, gammas, ns, m)
                )
                if phi is not None:
                    val = val * phi(u, m)
                if psi is not None:
                    val = val * psi(u, m)
                return val

            res = line_integral(
                integrand,
                spec.with_(line_truncation=1e8 * (1.0 + abs(m))),
                transform="sinh",
                scale=max(1.0, abs(m)),
            )
            return res.value

        res = bilateral_sum(g, nu, spec)
        return res.value / (8.0 * np.pi)

    gamma = complex(gamma)
    n = float(n)
    if gamma.imag >= 0:
        raise DomainError("complex inner product requires Im(gamma) < 0")
    # a coarse fixed tensor grid suffices for the N=2 tolerance regime and
    # keeps the doubly-indexed sum affordable; one-body rows are cached
    u, du = _u_grid(spec, 1e2, panels=max(4, spec.line_panels // 2))
    U1, U2 = u[:, None], u[None, :]
    W = np.multiply.outer(du, du)
    one_body_cache = {}

    def one_body(m):
        if m not in one_body_cache:
            one_body_cache[m] = (u * u + m * m) * np.exp(
                _complex_one_body_log(u, gammas, ns, m)
            )
        return one_body_cache[m]

    def pair_value(m1, m2):
        val = (
            one_body(m1)[:, None]
            * one_body(m2)[None, :]
            * np.exp(_complex_pair_log(U1, m1, U2, m2, gamma, n))
        )
        if phi is not None:
            val = val * phi(U1, m1, U2, m2)
        if psi is not None:
            val = val * psi(U1, m1, U2, m2)
        return complex(np.sum(val * W))

    # there is no point resolving the index sums beyond the fixed tensor
    # grid's own accuracy, so loosen their tolerance accordingly.  The term
    # function oscillates between lattice points, which rules out integral
    # tail acceleration; each gamma factor scales like |index|^(-1-Im(par)),
    # so index decay is fastest when the Im parts stay small in magnitude
    msum = spec.with_(sum_cutoff=4, tol=max(spec.tol, 1e-6))

    def outer_term(m1):
        inner = bilateral_sum(lambda m2: pair_value(m1, m2), nu, msum)
        return inner.value

    res = bilateral_sum(outer_term, nu, msum)
    return res.value / ((8.0 * np.pi) ** 2 * 2.0)
