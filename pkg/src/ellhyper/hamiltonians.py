"""Factorized difference Hamiltonians on shift-closed lattices (N <= 2).

Operators act by exact reindexing on geometric (multiplicative level) or
arithmetic (additive level) chains, so no interpolation enters the residuals.
Hermiticity and eigenfunction checks pair the operators with the inner
products from the integrals module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EllipticBase, theta
from .equations import EpsilonParams, Residual, _one_body_coefficients, f1_solution
from .errors import DomainError, PoleError
from .integrals import (
    DEFAULT_SPEC,
    inner_product_complex,
    inner_product_elliptic,
)
from .quadrature import QuadratureSpec

_POLE_TOL = 1e-12


@dataclass(frozen=True)
class VanDiejenParams:
    """Coupling data for the factorized N-body Hamiltonians.

    level='elliptic': ``coupling`` is the multiplicative pair coupling t and
    ``couplings`` the eight t_m; balancing t^(2N-2) prod(t_m) = (pq)^2.
    level='complex': ``coupling``/``coupling_index`` are (gamma, n) and
    ``couplings``/``indices`` the eight (gamma_l, n_l); balancing
    (2N-2)*gamma + sum(gamma_l) = -4i and (2N-2)*n + sum(n_l) = 0.
    ``balanced=False`` skips the balancing check (used by hermiticity, which
    holds without it).
    """

    level: str
    n_bodies: int
    coupling: complex
    couplings: tuple
    base: EllipticBase = None
    coupling_index: int = 0
    indices: tuple = None
    nu: float = 0.0
    balanced: bool = True

    def __post_init__(self):
        if self.level not in ("elliptic", "complex"):
            raise DomainError("level must be 'elliptic' or 'complex'")
        if self.n_bodies not in (1, 2):
            raise DomainError("Hamiltonians implemented for N in {1, 2}")
        cs = tuple(complex(v) for v in self.couplings)
        if len(cs) != 8:
            raise DomainError("need exactly 8 couplings")
        object.__setattr__(self, "couplings", cs)
        object.__setattr__(self, "coupling", complex(self.coupling))
        n = self.n_bodies
        if self.level == "elliptic":
            if self.base is None:
                raise DomainError("elliptic level needs an EllipticBase")
            if self.balanced:
                target = (self.base.p * self.base.q) ** 2
                got = self.coupling ** (2 * n - 2) * np.prod(np.asarray(cs))
                if abs(got - target) > 1e-12 * abs(target):
                    raise DomainError("elliptic balancing violated")
        else:
            if self.indices is None or len(self.indices) != 8:
                raise DomainError("complex level needs 8 indices")
            ns = tuple(float(v) for v in self.indices)
            object.__setattr__(self, "indices", ns)
            for nk in ns:
                if abs(nk - self.nu - round(nk - self.nu)) > 1e-12:
                    raise DomainError("indices must lie in Z + nu")
            if self.balanced:
                got = (2 * n - 2) * self.coupling + sum(cs)
                if abs(got - (-4j)) > 1e-12:
                    raise DomainError("complex continuous balancing violated")
                gotn = (2 * n - 2) * self.coupling_index + sum(ns)
                if abs(gotn) > 1e-12:
                    raise DomainError("complex discrete balancing violated")


@dataclass
class LatticeWavefunction:
    """Values on a shift-closed chain (or chain product at N=2).

    level='elliptic': site k holds z0 * q^k, the q-shift is k -> k+1.
    level='complex': site k holds (u0 - i*k, m0 + k), the (u-i, m+1) shift
    is k -> k+1.  ``valid`` marks sites whose value is meaningful; operator
    application invalidates boundary sites instead of wrapping.
    """

    level: str
    n_bodies: int
    anchor: tuple
    values: np.ndarray
    valid: np.ndarray

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def axis_sites(self):
        """Per-axis site coordinates.

        Elliptic anchor: (z0, q) at N=1 or ((z0a, z0b), q) at N=2; axis j
        holds z0j * q^k.  Complex anchor: (u0, m0) or ((u0a, m0a), (u0b,
        m0b)); axis j holds (u0j - i*k, m0j + k).  Distinct per-axis origins
        keep the pair coefficients away from their z_j = z_k poles.
        """
        k = np.arange(self.size)
        if self.level == "elliptic":
            z0, q = self.anchor
            if self.n_bodies == 1:
                return [z0 * q**k]
            return [z0[0] * q**k, z0[1] * q**k]
        if self.n_bodies == 1:
            u0, m0 = self.anchor
            return [(u0 - 1j * k, m0 + k)]
        return [(u0 - 1j * k, m0 + k) for u0, m0 in self.anchor]


def lattice_from_function(level, anchor, size, n_bodies, f) -> LatticeWavefunction:
    """Sample ``f`` on the chain (pair of chains at N=2)."""
    if n_bodies not in (1, 2):
        raise DomainError("lattices implemented for N in {1, 2}")
    if size < 3:
        raise DomainError("need at least 3 sites for one interior point")
    shape = (size,) * n_bodies
    values = np.empty(shape, dtype=complex)
    valid = np.ones(shape, dtype=bool)
    wf = LatticeWavefunction(level, n_bodies, anchor, values, valid)
    axes = wf.axis_sites()
    if level == "elliptic":
        if n_bodies == 1:
            values[:] = [f(zk) for zk in axes[0]]
        else:
            z1, z2 = axes
            for a in range(size):
                for b in range(size):
                    values[a, b] = f(z1[a], z2[b])
    else:
        if n_bodies == 1:
            u, m = axes[0]
            values[:] = [f(u[k], m[k]) for k in range(size)]
        else:
            (u1, m1), (u2, m2) = axes
            for a in range(size):
                for b in range(size):
                    values[a, b] = f(u1[a], m1[a], u2[b], m2[b])
    return wf


def _theta_ratio(num, den, p):
    nv = 1.0 + 0.0j
    for z in num:
        nv *= complex(theta(z, p))
    dv = 1.0 + 0.0j
    for z in den:
        dv *= complex(theta(z, p))
    if abs(dv) < _POLE_TOL * max(abs(nv), 1.0):
        raise PoleError("theta zero in a Hamiltonian coefficient")
    return nv / dv


def elliptic_coefficient(params: VanDiejenParams, zj, others) -> complex:
    """One-body times pair coefficient of the elliptic Hamiltonian at z_j."""
    p, q = params.base.p, params.base.q
    num = [tm * zj for tm in params.couplings]
    den = [zj * zj, q * zj * zj]
    t = params.coupling
    for zk in others:
        num += [t * zj * zk, t * zj / zk]
        den += [zj * zk, zj / zk]
    return _theta_ratio(num, den, p)


def apply_vandiejen_elliptic(
    params: VanDiejenParams, psi: LatticeWavefunction
) -> LatticeWavefunction:
    """Factorized elliptic Hamiltonian sum_j A_j(z)(T_j - 1) + A_j(1/z)(T_j^-1 - 1)."""
    if params.level != "elliptic" or psi.level != "elliptic":
        raise DomainError("elliptic operator needs elliptic params and lattice")
    if params.n_bodies != psi.n_bodies:
        raise DomainError("particle number mismatch")
    axes = psi.axis_sites()
    out = np.zeros_like(psi.values)
    valid = np.zeros_like(psi.valid)
    n = psi.size
    if psi.n_bodies == 1:
        z = axes[0]
        for k in range(1, n - 1):
            a_plus = elliptic_coefficient(params, z[k], ())
            a_minus = elliptic_coefficient(params, 1.0 / z[k], ())
            out[k] = a_plus * (psi.values[k + 1] - psi.values[k]) + a_minus * (
                psi.values[k - 1] - psi.values[k]
            )
            valid[k] = psi.valid[k - 1] and psi.valid[k] and psi.valid[k + 1]
        return LatticeWavefunction("elliptic", 1, psi.anchor, out, valid)
    z1, z2 = axes
    for a in range(1, n - 1):
        for b in range(1, n - 1):
            v = 0.0 + 0.0j
            for j in (0, 1):
                za, zb = (z1[a], z2[b]) if j == 0 else (z2[b], z1[a])
                shift = (1, 0) if j == 0 else (0, 1)
                a_plus = elliptic_coefficient(params, za, (zb,))
                a_minus = elliptic_coefficient(params, 1.0 / za, (1.0 / zb,))
                v += a_plus * (
                    psi.values[a + shift[0], b + shift[1]] - psi.values[a, b]
                )
                v += a_minus * (
                    psi.values[a - shift[0], b - shift[1]] - psi.values[a, b]
                )
            out[a, b] = v
            valid[a, b] = psi.valid[a - 1 : a + 2, b - 1 : b + 2].all()
    return LatticeWavefunction("elliptic", 2, psi.anchor, out, valid)


def _rational_z(u, m):
    return (1j * u + m) / 2.0


def _betas8(params: VanDiejenParams):
    return tuple(
        _rational_z(g, nk) for g, nk in zip(params.couplings, params.indices)
    )


def rational_coefficient(params: VanDiejenParams, zj, others) -> complex:
    """One-body times pair coefficient of the additive-level Hamiltonian."""
    beta = _rational_z(params.coupling, params.coupling_index)
    num = 1.0 + 0.0j
    den = 2.0 * zj * (2.0 * zj + 1.0)
    # compare |den| with the product of its factors' scales so that mere
    # degree mismatch against the numerator never looks like a pole
    den_scale = (1.0 + abs(2.0 * zj)) ** 2
    for bl in _betas8(params):
        num *= bl + zj
    for zk in others:
        num *= (beta + zj + zk) * (beta + zj - zk)
        den *= (zj + zk) * (zj - zk)
        den_scale *= (1.0 + abs(zj) + abs(zk)) ** 2
    if abs(den) < _POLE_TOL * den_scale:
        raise PoleError("vanishing denominator in a Hamiltonian coefficient")
    return num / den


def apply_vandiejen_complex(
    params: VanDiejenParams, psi: LatticeWavefunction
) -> LatticeWavefunction:
    """Difference-recurrence Hamiltonian on the (u, m) chain."""
    if params.level != "complex" or psi.level != "complex":
        raise DomainError("complex operator needs complex params and lattice")
    if params.n_bodies != psi.n_bodies:
        raise DomainError("particle number mismatch")
    axes = psi.axis_sites()
    out = np.zeros_like(psi.values)
    valid = np.zeros_like(psi.valid)
    n = psi.size
    if psi.n_bodies == 1:
        u, m = axes[0]
        zs = _rational_z(u, m)
        for k in range(1, n - 1):
            b_plus = rational_coefficient(params, zs[k], ())
            b_minus = rational_coefficient(params, -zs[k], ())
            out[k] = b_plus * (psi.values[k + 1] - psi.values[k]) + b_minus * (
                psi.values[k - 1] - psi.values[k]
            )
            valid[k] = psi.valid[k - 1] and psi.valid[k] and psi.valid[k + 1]
        return LatticeWavefunction("complex", 1, psi.anchor, out, valid)
    za1 = _rational_z(*axes[0])
    za2 = _rational_z(*axes[1])
    for a in range(1, n - 1):
        for b in range(1, n - 1):
            v = 0.0 + 0.0j
            for j in (0, 1):
                za, zb = (za1[a], za2[b]) if j == 0 else (za2[b], za1[a])
                shift = (1, 0) if j == 0 else (0, 1)
                b_plus = rational_coefficient(params, za, (zb,))
                b_minus = rational_coefficient(params, -za, (-zb,))
                v += b_plus * (
                    psi.values[a + shift[0], b + shift[1]] - psi.values[a, b]
                )
                v += b_minus * (
                    psi.values[a - shift[0], b - shift[1]] - psi.values[a, b]
                )
            out[a, b] = v
            valid[a, b] = psi.valid[a - 1 : a + 2, b - 1 : b + 2].all()
    return LatticeWavefunction("complex", 2, psi.anchor, out, valid)


def apply_ruijsenaars_complex(
    coupling, psi: LatticeWavefunction
) -> LatticeWavefunction:
    """Key additive-level Ruijsenaars operator sum_j prod_{k!=j}
    (coupling + z_j - z_k)/(z_j - z_k) T_j."""
    if psi.level != "complex":
        raise DomainError("operator defined on the complex-level lattice")
    coupling = complex(coupling)
    out = np.zeros_like(psi.values)
    valid = np.zeros_like(psi.valid)
    n = psi.size
    if psi.n_bodies == 1:
        out[:-1] = psi.values[1:]
        valid[:-1] = psi.valid[1:]
        return LatticeWavefunction("complex", 1, psi.anchor, out, valid)
    axes = psi.axis_sites()
    za1 = _rational_z(*axes[0])
    za2 = _rational_z(*axes[1])
    for a in range(n - 1):
        for b in range(n - 1):
            d1 = za1[a] - za2[b]
            d2 = za2[b] - za1[a]
            if min(abs(d1), abs(d2)) < _POLE_TOL:
                raise PoleError("coincident lattice coordinates")
            c1 = (coupling + d1) / d1
            c2 = (coupling + d2) / d2
            out[a, b] = c1 * psi.values[a + 1, b] + c2 * psi.values[a, b + 1]
            valid[a, b] = psi.valid[a + 1, b] and psi.valid[a, b + 1]
    return LatticeWavefunction("complex", 2, psi.anchor, out, valid)


def eigencheck_n1(
    ep: EpsilonParams, spec: QuadratureSpec = DEFAULT_SPEC, zs=None
) -> Residual:
    """Worst-case eigenvalue residual of the one-body operator on the
    explicit solution, sampled at several points."""
    if zs is None:
        zs = (1.1 * np.exp(0.7j), 0.95 * np.exp(-0.4j), 1.05 * np.exp(2.1j))
    q, p = ep.base.q, ep.base.p
    psi = f1_solution(ep, spec)
    lam = None
    worst = None
    for z in zs:
        a_plus, a_minus, lam_theta = _one_body_coefficients(ep.eps, z, q, p)
        lam = -lam_theta
        p0 = psi(z)
        lhs = a_plus * (psi(q * z) - p0) + a_minus * (psi(z / q) - p0)
        r = Residual(lhs - lam * p0, max(abs(lhs), abs(lam * p0)))
        if worst is None or r.relative > worst.relative:
            worst = r
    return worst


def _elliptic_operator_callable(params: VanDiejenParams, psi):
    """Pointwise form of the elliptic Hamiltonian acting on a callable."""
    q = params.base.q
    n = params.n_bodies
    if n == 1:
        def h_psi(x):
            x = np.asarray(x, dtype=complex)
            out = np.empty(x.shape, dtype=complex)
            flat = x.ravel()
            res = []
            for xv in flat:
                a_plus = elliptic_coefficient(params, xv, ())
                a_minus = elliptic_coefficient(params, 1.0 / xv, ())
                res.append(
                    a_plus * (psi(q * xv) - psi(xv))
                    + a_minus * (psi(xv / q) - psi(xv))
                )
            out.ravel()[:] = res
            return out

        return h_psi

    def h_psi2(x1, x2):
        X1, X2 = np.broadcast_arrays(np.asarray(x1), np.asarray(x2))
        out = np.empty(X1.shape, dtype=complex)
        flat = out.ravel()
        for i, (a, c) in enumerate(zip(X1.ravel(), X2.ravel())):
            a = complex(a)
            c = complex(c)
            v = 0.0 + 0.0j
            p0 = psi(a, c)
            for za, zc, shifted in (
                (a, c, lambda: psi(q * a, c)),
                (c, a, lambda: psi(a, q * c)),
            ):
                v += elliptic_coefficient(params, za, (zc,)) * (shifted() - p0)
            for za, zc, shifted in (
                (a, c, lambda: psi(a / q, c)),
                (c, a, lambda: psi(a, c / q)),
            ):
                v += elliptic_coefficient(params, 1.0 / za, (1.0 / zc,)) * (
                    shifted() - p0
                )
            flat[i] = v
        return out

    return h_psi2


def _complex_operator_callable(params: VanDiejenParams, psi):
    """Pointwise form of the additive-level Hamiltonian acting on a callable."""
    n = params.n_bodies
    if n == 1:
        def h_psi(u, m):
            u = np.asarray(u, dtype=complex)
            out = np.empty(u.shape, dtype=complex)
            flat = u.ravel()
            res = []
            for uv in flat:
                z = _rational_z(uv, m)
                b_plus = rational_coefficient(params, z, ())
                b_minus = rational_coefficient(params, -z, ())
                p0 = psi(uv, m)
                res.append(
                    b_plus * (psi(uv - 1j, m + 1) - p0)
                    + b_minus * (psi(uv + 1j, m - 1) - p0)
                )
            out.ravel()[:] = res
            return out

        return h_psi

    def h_psi2(u1, m1, u2, m2):
        U1, U2 = np.broadcast_arrays(np.asarray(u1), np.asarray(u2))
        out = np.empty(U1.shape, dtype=complex)
        flat = out.ravel()
        for i, (a, c) in enumerate(zip(U1.ravel(), U2.ravel())):
            a = complex(a)
            c = complex(c)
            z1 = _rational_z(a, m1)
            z2 = _rational_z(c, m2)
            p0 = psi(a, m1, c, m2)
            v = rational_coefficient(params, z1, (z2,)) * (
                psi(a - 1j, m1 + 1, c, m2) - p0
            )
            v += rational_coefficient(params, -z1, (-z2,)) * (
                psi(a + 1j, m1 - 1, c, m2) - p0
            )
            v += rational_coefficient(params, z2, (z1,)) * (
                psi(a, m1, c - 1j, m2 + 1) - p0
            )
            v += rational_coefficient(params, -z2, (-z1,)) * (
                psi(a, m1, c + 1j, m2 - 1) - p0
            )
            flat[i] = v
        return out

    return h_psi2


def hermiticity_check(
    params: VanDiejenParams,
    phi,
    psi,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> Residual:
    """Relative defect of <phi, H psi> = <H phi, psi> in the natural inner
    product of the level.

    At the elliptic level the test functions should be holomorphic in the
    annulus |q| <= |x| <= 1/|q| (symmetric Laurent polynomials are ideal).
    At the rational complex level the contour-shift argument behind
    hermiticity picks up residues at the lattice points where the shift
    coefficients are singular, namely (u, m) = (0, +-1) and (+-i, 0) for
    n_bodies = 1.  Test functions must vanish at those points, for example
    through a factor ((iu + m)**2 - 1) * ((iu - m)**2 - 1), and must be
    regular in the strip |Im u| <= 1 for every m with enough decay in
    (u, m) to dominate the growth of the density and coefficients.
    """
    n = params.n_bodies
    if params.level == "elliptic":
        q = params.base.q
        if abs(params.coupling) >= abs(q) or any(
            abs(tj) >= abs(q) for tj in params.couplings
        ):
            raise DomainError("hermiticity requires |t|, |t_j| < |q|")
        # half-spacing node offset: the operator wrappers have removable
        # singularities at x = +-1 that plain nodes would hit exactly
        lhs = inner_product_elliptic(
            n, params.coupling, params.couplings, params.base,
            phi=phi, psi=_elliptic_operator_callable(params, psi), spec=spec,
            node_offset=0.5,
        )
        rhs = inner_product_elliptic(
            n, params.coupling, params.couplings, params.base,
            phi=_elliptic_operator_callable(params, phi), psi=psi, spec=spec,
            node_offset=0.5,
        )
    else:
        if any(g.imag >= -1 for g in params.couplings) or (
            n == 2 and params.coupling.imag >= -1
        ):
            raise DomainError("hermiticity requires Im couplings < -1")
        lhs = inner_product_complex(
            n, params.coupling, params.coupling_index, params.couplings,
            params.indices, params.nu,
            phi=phi, psi=_complex_operator_callable(params, psi), spec=spec,
        )
        rhs = inner_product_complex(
            n, params.coupling, params.coupling_index, params.couplings,
            params.indices, params.nu,
            phi=_complex_operator_callable(params, phi), psi=psi, spec=spec,
        )
    return Residual(lhs - rhs, max(abs(lhs), abs(rhs)))
