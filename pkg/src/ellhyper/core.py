"""Scalar special functions: q-Pochhammer, theta, elliptic / hyperbolic /
complex-field gamma functions, Pochhammer symbol, Dedekind eta.

Everything here is a pure function evaluating in double precision; the
``xprec`` module holds the mpmath twins used for oracle generation.  All
functions accept numpy arrays for their principal argument and broadcast.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma

from .errors import ConvergenceError, DomainError, PoleError

_TAIL = 1e-18          # infinite-product truncation target
_EPS_POLE = 1e-8       # default relative pole-proximity cutoff

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class EllipticBase:
    p: complex
    q: complex

    def __post_init__(self):
        if abs(self.p) >= 1 or abs(self.q) >= 1:
            raise DomainError("elliptic bases must satisfy |p| < 1, |q| < 1")


@dataclass(frozen=True)
class Quasiperiods:
    omega1: complex
    omega2: complex
    allow_degenerate: bool = False  # set by the delta-limit routines

    def __post_init__(self):
        if self.omega1 == 0 or self.omega2 == 0:
            raise DomainError("quasiperiods must be nonzero")
        if not self.allow_degenerate:
            ratio = self.omega1 / self.omega2
            if ratio.real < 0 and abs(ratio.imag) < 1e-14:
                raise DomainError(
                    "omega1/omega2 on the negative real axis requires "
                    "allow_degenerate=True"
                )


@dataclass(frozen=True)
class ComplexIndex:
    """Argument (s, n) of the complex-field gamma function, n in Z + nu."""

    s: complex
    n: float
    nu: float = 0.0

    def __post_init__(self):
        if self.nu not in (0.0, 0.5):
            raise DomainError("nu must be 0 or 1/2")
        if abs((self.n - self.nu) - round(self.n - self.nu)) > 1e-12:
            raise DomainError("n - nu must be an integer")


def qpochhammer_inf(z, p, tail: float = _TAIL):
    """(z; p)_infinity truncated once |z p^k| drops below ``tail``."""
    if abs(p) >= 1:
        raise DomainError("q-Pochhammer requires |p| < 1")
    z = np.asarray(z, dtype=complex)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    if p == 0 or zmax == 0.0:
        acc = 1.0 - z if p == 0 else np.ones_like(z)
        return acc if acc.shape else complex(acc)
    nterms = max(1, int(math.ceil(
        (math.log(tail) - math.log(max(zmax, 1.0))) / math.log(abs(p)))) + 1)
    acc = np.ones_like(z)
    zp = z.copy()
    for _ in range(nterms):
        acc *= 1.0 - zp
        zp *= p
    return acc if acc.shape else complex(acc)


def theta(z, p):
    """Shortened Jacobi theta: (z;p)_inf (p/z;p)_inf.  Quasi-periodic z -> pz."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("theta has an essential singularity at z = 0")
    val = np.asarray(qpochhammer_inf(z, p)) * np.asarray(qpochhammer_inf(p / z, p))
    return val if val.shape else complex(val)


def theta_prod(zs, p):
    """Product of shortened thetas, theta(z1,...,zk; p) convention."""
    out = 1.0 + 0.0j
    for z in zs:
        out = out * theta(z, p)
    return out


def _pq_power_table(p, q, cut):
    """All p^j q^k with |p|^j |q|^k above ``cut``, largest modulus first."""
    lp, lq = math.log(abs(p)), math.log(abs(q))
    lc = math.log(cut)
    jmax = int(lc / lp) + 1
    pows = []
    for j in range(jmax + 1):
        kmax = int((lc - j * lp) / lq) + 1
        pj = p ** j
        for k in range(kmax + 1):
            w = pj * q ** k
            if abs(w) > cut:
                pows.append(w)
    pows.sort(key=abs, reverse=True)
    return pows


def elliptic_gamma(z, base: EllipticBase, eps_pole: float = _EPS_POLE):
    """Standard elliptic gamma function Gamma(z; p, q) by its double product.

    Meromorphic on C^x with poles at z = p^-j q^-k; proximity below
    ``eps_pole`` (relative) raises PoleError carrying the nearest (j, k).
    """
    p, q = base.p, base.q
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("elliptic gamma undefined at z = 0")
    zmax = float(np.max(np.abs(z)))
    zmin = float(np.min(np.abs(z)))
    if p == 0 or q == 0:
        # Gamma(z;0,q) = 1/(z;q)_inf
        b = q if p == 0 else p
        return 1.0 / qpochhammer_inf(z, b)
    if zmax >= 1.0 - eps_pole:
        _elliptic_gamma_pole_check(z, p, q, eps_pole)
    cut = _TAIL / max(zmax, 1.0 / zmin, 1.0)
    acc = np.ones_like(z)
    inv_z = 1.0 / z
    pq = p * q
    for w in _pq_power_table(p, q, cut):
        acc *= (1.0 - pq * w * inv_z) / (1.0 - z * w)
    return acc if acc.shape else complex(acc)


def _elliptic_gamma_pole_check(z, p, q, eps_pole):
    zf = np.atleast_1d(z).ravel()
    lim = np.max(np.abs(zf)) * (1 + eps_pole)
    llim = max(math.log(lim), 0.0)
    jmax = int(llim / -math.log(abs(p))) + 1
    kmax = int(llim / -math.log(abs(q))) + 1
    for j in range(jmax + 1):
        for k in range(kmax + 1):
            w = p ** j * q ** k
            bad = np.abs(zf * w - 1.0) < eps_pole
            if np.any(bad):
                raise PoleError(
                    "z within %g of elliptic gamma pole p^-%d q^-%d"
                    % (eps_pole, j, k),
                    location=(j, k),
                )


def bernoulli22(u, omega1, omega2):
    """Second-order double Bernoulli polynomial B_{2,2}(u | w1, w2)."""
    if omega1 * omega2 == 0:
        raise DomainError("quasiperiods must be nonzero")
    return (u * u - (omega1 + omega2) * u
            + (omega1 ** 2 + omega2 ** 2) / 6.0
            + omega1 * omega2 / 2.0) / (omega1 * omega2)


def _hyper_lattice_check(u, omega1, omega2, eps_pole):
    # solve u = a w1 + b w2 over the reals; degenerate frames skip the check
    det = (omega1.real * omega2.imag - omega1.imag * omega2.real)
    if abs(det) < 1e-12 * abs(omega1) * abs(omega2):
        return
    for uu in np.atleast_1d(u).ravel():
        uu = complex(uu)
        a = (uu.real * omega2.imag - uu.imag * omega2.real) / det
        b = (omega1.real * uu.imag - omega1.imag * uu.real) / det
        scale = max(1.0, abs(uu)) / min(abs(omega1), abs(omega2))
        ra, rb = round(a), round(b)
        if abs(a - ra) < eps_pole * scale and abs(b - rb) < eps_pole * scale:
            if ra <= 0 and rb <= 0:
                raise PoleError("hyperbolic gamma pole at -%d w1 -%d w2"
                                % (-ra, -rb), location=(ra, rb))
            if ra >= 1 and rb >= 1:
                raise PoleError("hyperbolic gamma zero at %d w1 + %d w2"
                                % (ra, rb), location=(ra, rb))


def _product_branch_ok(omega1, omega2):
    im = (omega1 / omega2).imag
    if abs(im) < 1e-10:
        return False
    # both nomes must reach the truncation target in a sane number of terms
    return 2 * math.pi * abs(im) * min(1.0, abs(omega2 / omega1) ** 2) > \
        -math.log(_TAIL) / 20000


def _log_qpochhammer(logz, logq, tail: float = _TAIL):
    """log (z; q)_inf from logs of z and q, overflow-safe for |z| >> 1.

    Any 2*pi*i ambiguity per factor is harmless downstream because callers
    exponentiate the total.
    """
    lz = np.asarray(logz, dtype=complex)
    remax = float(np.max(lz.real)) if lz.size else float(lz.real)
    nterms = max(1, int(math.ceil(
        (math.log(tail) - max(remax, 0.0)) / logq.real)) + 1)
    total = np.zeros_like(lz)
    w = lz.copy()
    for _ in range(nterms):
        big = w.real >= 0
        wneg = np.where(big, -w, w)
        total += np.where(big, w + 1j * np.pi, 0.0) + np.log1p(-np.exp(wneg))
        w = w + logq
    return total


def _hyperbolic_gamma_log_product(u, omega1, omega2):
    if (omega1 / omega2).imag < 0:
        omega1, omega2 = omega2, omega1
    u = np.asarray(u, dtype=complex)
    logq = 2j * cmath.pi * omega1 / omega2
    logqt = -2j * cmath.pi * omega2 / omega1
    b22 = bernoulli22(u, omega1, omega2)
    return (-0.5j * np.pi * b22
            + _log_qpochhammer(2j * np.pi * u / omega1 + logqt, logqt)
            - _log_qpochhammer(2j * np.pi * u / omega2, logq))


def _hyperbolic_gamma_product(u, omega1, omega2):
    return np.exp(_hyperbolic_gamma_log_product(u, omega1, omega2))


class _HyperGammaEngine:
    """Vectorized integral-branch evaluator for one (w1, w2) pair.

    Holds the quadrature grid on the shifted line Im(x) = h together with
    the u-independent part of the integrand, so that whole arrays of
    arguments cost one matrix-vector product per refinement level.
    """

    def __init__(self, omega1, omega2, tol=1e-14):
        wbar = omega1 + omega2
        if wbar.real <= 0:
            raise DomainError("integral branch needs Re(w1 + w2) > 0")
        self.omega1, self.omega2, self.tol = omega1, omega2, tol
        self.h = min(math.pi / (4 * abs(omega1)), math.pi / (4 * abs(omega2)))
        # decay rate is at least Re(wbar)/4 after strip reduction
        self.length = (-math.log(_TAIL) + 5.0) / (0.25 * wbar.real)
        edges = [0.0, self.h]
        while edges[-1] < self.length:
            edges.append(min(edges[-1] * 2, self.length))
        self.edges = np.array(edges)
        self.splits = 2

    def _grid(self, splits):
        mids, halves = [], []
        for a, b in zip(self.edges[:-1], self.edges[1:]):
            sub = np.linspace(a, b, splits + 1)
            mids.append(0.5 * (sub[:-1] + sub[1:]))
            halves.append(np.full(splits, 0.5 * (sub[1] - sub[0])))
        mids = np.concatenate(mids)
        halves = np.concatenate(halves)
        xi = (mids[:, None] + halves[:, None] * _GL_NODES[None, :]).ravel()
        w = (halves[:, None] * _GL_WEIGHTS[None, :]).ravel()
        x = np.concatenate([xi, -xi]) + 1j * self.h
        w = np.concatenate([w, w])
        dens = w / ((1 - np.exp(self.omega1 * x)) * (1 - np.exp(self.omega2 * x)) * x)
        return x, dens

    def _raw(self, u, x, dens):
        out = np.empty(u.shape, dtype=complex)
        step = max(1, 4_000_000 // x.size)
        for i in range(0, u.size, step):
            blk = u[i:i + step]
            out[i:i + step] = np.exp(blk[:, None] * x[None, :]) @ dens
        return out

    def integral(self, u):
        """The contour integral for an array of strip-reduced arguments."""
        u = np.asarray(u, dtype=complex)
        x, dens = self._grid(self.splits)
        val = self._raw(u, x, dens)
        for _ in range(8):
            self.splits *= 2
            x, dens = self._grid(self.splits)
            new = self._raw(u, x, dens)
            diff = np.max(np.abs(new - val) / np.maximum(1.0, np.abs(new)))
            if diff <= self.tol:
                # keep the converged resolution for subsequent calls
                self.splits //= 2
                return new
            val = new
        raise ConvergenceError("hyperbolic gamma integral did not converge")

    def evaluate(self, u):
        """gamma^(2) on an arbitrary u array via strip reduction + integral."""
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        wbar = self.omega1 + self.omega2
        lo, hi = 0.25 * wbar.real, 0.75 * wbar.real
        red = np.empty_like(u)
        fac = np.ones_like(u)
        for i, uu in enumerate(u.ravel()):
            uu = complex(uu)
            f = 1.0 + 0.0j
            guard = 0
            # gamma(u + w1) = 2 sin(pi u / w2) gamma(u)
            while uu.real > hi:
                uu -= self.omega1
                f *= 2 * cmath.sin(cmath.pi * uu / self.omega2)
                guard += 1
                if guard > 100000:
                    raise DomainError("shift reduction failed to terminate")
            while uu.real < lo:
                f /= 2 * cmath.sin(cmath.pi * uu / self.omega2)
                uu += self.omega1
                guard += 1
                if guard > 100000:
                    raise DomainError("shift reduction failed to terminate")
            red.ravel()[i] = uu
            fac.ravel()[i] = f
        core = np.exp(-0.5j * np.pi * bernoulli22(red, self.omega1, self.omega2)
                      - self.integral(red))
        return fac * core


_ENGINES: dict = {}


def _engine(omega1, omega2) -> _HyperGammaEngine:
    key = (complex(omega1), complex(omega2))
    if key not in _ENGINES:
        if len(_ENGINES) > 64:
            _ENGINES.clear()
        _ENGINES[key] = _HyperGammaEngine(*key)
    return _ENGINES[key]


def hyperbolic_gamma(u, qp: Quasiperiods, branch: str = "auto",
                     eps_pole: float = _EPS_POLE):
    """Faddeev modular quantum dilogarithm gamma^(2)(u; w1, w2).

    branch='product' uses the double q-Pochhammer representation (requires
    Im(w1/w2) != 0); branch='integral' the exponentiated contour integral on
    the line Im(x) = h, extended outside its strip of convergence by the
    exact shift relations gamma(u + w_j) = 2 sin(pi u / w_k) gamma(u).
    """
    omega1, omega2 = qp.omega1, qp.omega2
    _hyper_lattice_check(u, omega1, omega2, eps_pole)
    if branch == "auto":
        branch = "product" if _product_branch_ok(omega1, omega2) else "integral"
    if branch == "product":
        if abs((omega1 / omega2).imag) < 1e-12:
            raise DomainError("product branch needs Im(w1/w2) != 0")
        val = np.asarray(_hyperbolic_gamma_product(u, omega1, omega2))
        return val if val.shape else complex(val)
    if branch != "integral":
        raise ValueError("branch must be auto, product, or integral")
    uu = np.asarray(u, dtype=complex)
    val = _engine(omega1, omega2).evaluate(uu)
    return val.reshape(uu.shape) if uu.shape else complex(val[0])


def hyperbolic_gamma_arr(u, qp: Quasiperiods):
    """Vectorized hyperbolic gamma without pole screening (integrand fast path)."""
    if _product_branch_ok(qp.omega1, qp.omega2):
        return np.asarray(_hyperbolic_gamma_product(u, qp.omega1, qp.omega2))
    return _engine(qp.omega1, qp.omega2).evaluate(np.asarray(u, dtype=complex))


def hyperbolic_gamma_log_arr(u, qp: Quasiperiods):
    """log of the hyperbolic gamma, overflow-safe for factor-product integrands.

    Near-degenerate quasiperiod ratios make individual gamma factors
    overflow double precision even though balanced products stay moderate,
    so integrands should sum these logs and exponentiate once.
    """
    if _product_branch_ok(qp.omega1, qp.omega2):
        return np.asarray(
            _hyperbolic_gamma_log_product(u, qp.omega1, qp.omega2)
        )
    return np.log(_engine(qp.omega1, qp.omega2).evaluate(np.asarray(u, dtype=complex)))


def complex_gamma(x, n, nu: float = 0.0, eps_pole: float = _EPS_POLE):
    """Gamma function over the complex field: G(x,n) = Gamma((n+ix)/2) / Gamma(1+(n-ix)/2)."""
    x = np.asarray(x, dtype=complex)
    n = np.asarray(n, dtype=float)
    if not x.shape and not n.shape:
        ComplexIndex(complex(x), float(n), nu)
    num = (n + 1j * x) / 2.0
    den = 1.0 + (n - 1j * x) / 2.0
    if not num.shape:
        _cgamma_pole_check(complex(num), complex(den), eps_pole)
    val = np.exp(loggamma(num) - loggamma(den))
    return val if val.shape else complex(val)


def _cgamma_pole_check(num, den, eps_pole):
    def near_np_int(z):
        r = round(z.real)
        return r <= 0 and abs(z - r) < eps_pole
    if near_np_int(num) and not near_np_int(den):
        raise PoleError("complex gamma pole: (n+ix)/2 near %d" % round(num.real),
                        location=round(num.real))


def complex_gamma_arr(x, n):
    """Vectorized complex gamma without pole screening (integrand fast path)."""
    x = np.asarray(x, dtype=complex)
    return np.exp(loggamma((n + 1j * x) / 2.0) - loggamma(1.0 + (n - 1j * x) / 2.0))


def pochhammer(a, n: int):
    """Standard Pochhammer symbol (a)_n for integer n of either sign."""
    a = complex(a)
    n = int(n)
    if n == 0:
        return 1.0 + 0.0j
    if n > 0:
        out = 1.0 + 0.0j
        for j in range(n):
            out *= a + j
        return out
    out = 1.0 + 0.0j
    for j in range(1, -n + 1):
        f = a - j
        if f == 0:
            raise PoleError("Pochhammer pole: a - %d = 0" % j, location=j)
        out /= f
    return out


def dedekind_eta(tau):
    """eta(tau) from its product form; requires Im(tau) > 0."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise DomainError("eta requires Im(tau) > 0")
    q = cmath.exp(2j * cmath.pi * tau)
    return cmath.exp(1j * cmath.pi * tau / 12.0) * complex(qpochhammer_inf(q, q))


def dedekind_eta_check(tau) -> complex:
    """Residual eta(-1/tau) - sqrt(-i tau) * eta(tau), principal square root."""
    tau = complex(tau)
    return dedekind_eta(-1.0 / tau) - cmath.sqrt(-1j * tau) * dedekind_eta(tau)
