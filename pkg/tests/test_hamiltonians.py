"""Factorized difference Hamiltonians: lattices, operators, hermiticity."""

import numpy as np
import pytest

from ellhyper.core import EllipticBase
from ellhyper.equations import map_t_to_epsilon
from ellhyper.errors import DomainError, PoleError
from ellhyper.hamiltonians import (
    LatticeWavefunction,
    VanDiejenParams,
    apply_ruijsenaars_complex,
    apply_vandiejen_complex,
    apply_vandiejen_elliptic,
    eigencheck_n1,
    elliptic_coefficient,
    hermiticity_check,
    lattice_from_function,
    rational_coefficient,
)
from ellhyper.integrals import DEFAULT_SPEC

BASE = EllipticBase(0.15, 0.2)


def _balanced_elliptic(seed, n_bodies=1, coupling=0.0, mag=0.3):
    rng = np.random.default_rng(seed)
    t = (mag * np.exp(2j * np.pi * rng.random(8))).astype(complex)
    t[7] = (BASE.p * BASE.q) ** 2 / (
        complex(coupling) ** (2 * n_bodies - 2) * np.prod(t[:7])
    )
    return VanDiejenParams(
        "elliptic", n_bodies, coupling, tuple(t), base=BASE
    )


def _complex_hermiticity_params():
    rng = np.random.default_rng(11)
    rng.uniform(-np.pi, np.pi, 8)
    gs = tuple((0.1 * rng.standard_normal(8)) - 1.2j)
    ns = (1.0, -1.0, 0.0, 2.0, -1.0, 0.0, 1.0, -2.0)
    return VanDiejenParams(
        "complex", 1, 0.0, gs, indices=ns, balanced=False
    )


class TestParams:
    def test_bad_level(self):
        with pytest.raises(DomainError):
            VanDiejenParams("hyperbolic", 1, 0.0, (0.1,) * 8, base=BASE)

    def test_bad_body_count(self):
        with pytest.raises(DomainError):
            VanDiejenParams("elliptic", 3, 0.0, (0.1,) * 8, base=BASE)

    def test_wrong_coupling_count(self):
        with pytest.raises(DomainError):
            VanDiejenParams("elliptic", 1, 0.0, (0.1,) * 7, base=BASE)

    def test_elliptic_balance_enforced(self):
        with pytest.raises(DomainError):
            VanDiejenParams("elliptic", 1, 0.0, (0.1,) * 8, base=BASE)

    def test_complex_balance_enforced(self):
        with pytest.raises(DomainError):
            VanDiejenParams(
                "complex", 1, 0.0, (-0.4j,) * 8, indices=(0,) * 8
            )

    def test_complex_balanced_ok(self):
        VanDiejenParams(
            "complex", 1, 0.0, (-0.5j,) * 8, indices=(1, -1, 0, 0, 2, -2, 3, -3)
        )

    def test_indices_must_sit_on_nu_shifted_lattice(self):
        with pytest.raises(DomainError):
            VanDiejenParams(
                "complex", 1, 0.0, (-0.5j,) * 8,
                indices=(0.3,) * 8, balanced=False,
            )


class TestLattice:
    def test_sampling_matches_sites(self):
        f = lambda z: z + 1.0 / z
        wf = lattice_from_function("elliptic", (1.1 + 0.2j, BASE.q), 6, 1, f)
        z = wf.axis_sites()[0]
        assert np.allclose(wf.values, [f(zk) for zk in z])

    def test_complex_chain_spacing(self):
        wf = lattice_from_function(
            "complex", (0.4, 0.5), 5, 1, lambda u, m: 1.0
        )
        u, m = wf.axis_sites()[0]
        assert np.allclose(np.diff(u), -1j)
        assert np.allclose(np.diff(m), 1.0)

    def test_minimum_size(self):
        with pytest.raises(DomainError):
            lattice_from_function(
                "elliptic", (1.0, BASE.q), 2, 1, lambda z: 1.0
            )

    def test_operator_marks_boundary_invalid(self):
        wf = lattice_from_function(
            "complex", (0.4, 0.0), 5, 1, lambda u, m: 1.0 / (u * u + 4.0)
        )
        par = VanDiejenParams(
            "complex", 1, 0.0, (-0.5j,) * 8,
            indices=(0,) * 8, balanced=False,
        )
        out = apply_vandiejen_complex(par, wf)
        assert not out.valid[0] and not out.valid[-1]
        assert out.valid[1:-1].all()


class TestEllipticOperator:
    def test_constant_annihilated_n1(self):
        par = _balanced_elliptic(1)
        wf = lattice_from_function(
            "elliptic", (1.07 * np.exp(0.9j), BASE.q), 7, 1, lambda z: 2.5
        )
        out = apply_vandiejen_elliptic(par, wf)
        assert np.abs(out.values[out.valid]).max() == 0.0

    def test_constant_annihilated_n2(self):
        par = _balanced_elliptic(2, n_bodies=2, coupling=0.2, mag=0.25)
        wf = lattice_from_function(
            "elliptic",
            ((1.07 * np.exp(0.9j), 0.93 * np.exp(-0.5j)), BASE.q),
            5, 2, lambda z1, z2: -1.3,
        )
        out = apply_vandiejen_elliptic(par, wf)
        assert np.abs(out.values[out.valid]).max() == 0.0

    def test_coefficient_elliptic_in_p_n1(self):
        # the balancing condition makes the coefficient invariant under
        # scaling its argument by the second base
        par = _balanced_elliptic(7)
        z = 1.07 * np.exp(0.9j)
        a0 = elliptic_coefficient(par, z, ())
        a1 = elliptic_coefficient(par, BASE.p * z, ())
        assert a1 == pytest.approx(a0, rel=1e-12)

    def test_coefficient_elliptic_in_p_n2(self):
        par = _balanced_elliptic(8, n_bodies=2, coupling=0.2 * np.exp(0.3j),
                                 mag=0.25)
        z = 1.07 * np.exp(0.9j)
        w = 0.93 * np.exp(-0.5j)
        a0 = elliptic_coefficient(par, z, (w,))
        a1 = elliptic_coefficient(par, BASE.p * z, (w,))
        assert a1 == pytest.approx(a0, rel=1e-10)

    def test_coefficient_pole(self):
        par = _balanced_elliptic(1)
        with pytest.raises(PoleError):
            elliptic_coefficient(par, 1.0 + 0.0j, ())

    def test_explicit_eigenfunction(self):
        rng = np.random.default_rng(3)
        mag = np.array([0.62] * 5 + [0.12, 0.12, 0.0])
        t = (mag * np.exp(2j * np.pi * rng.random(8))).astype(complex)
        t[7] = (BASE.p * BASE.q) ** 2 / np.prod(t[:7])
        ep, _ = map_t_to_epsilon(tuple(t), BASE)
        assert eigencheck_n1(ep).relative < 1e-7


class TestComplexOperator:
    PAR = VanDiejenParams(
        "complex", 1, 0.0,
        (-1.5j, -1.2j, -1.8j, -1.4j, -1.6j, -1.3j, -1.7j, -1.1j),
        indices=(1, -1, 0, 2, -1, 0, 1, -2), balanced=False,
    )

    def test_constant_annihilated_n1(self):
        wf = lattice_from_function(
            "complex", (0.3, 0.0), 7, 1, lambda u, m: 1.0
        )
        out = apply_vandiejen_complex(self.PAR, wf)
        assert np.abs(out.values[out.valid]).max() == 0.0

    def test_constant_annihilated_n2(self):
        par = VanDiejenParams(
            "complex", 2, -1.5j,
            self.PAR.couplings, indices=self.PAR.indices,
            coupling_index=1, balanced=False,
        )
        wf = lattice_from_function(
            "complex", ((0.3, 0.0), (0.9, 0.5)), 5, 2,
            lambda u1, m1, u2, m2: 1.0,
        )
        out = apply_vandiejen_complex(par, wf)
        assert np.abs(out.values[out.valid]).max() == 0.0

    def test_coefficient_pole_at_origin(self):
        with pytest.raises(PoleError):
            rational_coefficient(self.PAR, 0.0 + 0.0j, ())

    def test_no_spurious_pole_at_large_argument(self):
        # the numerator has higher degree than the denominator, so the
        # value grows; that must not be misread as a pole
        v = rational_coefficient(self.PAR, 40.0 + 3.0j, ())
        assert np.isfinite(v)

    def test_lattice_matches_pointwise_form(self):
        from ellhyper.hamiltonians import _complex_operator_callable

        f = lambda u, m: 1.0 / ((u * u + 4.0) * (m * m + 2.0))
        wf = lattice_from_function("complex", (0.3, 0.0), 7, 1, f)
        out = apply_vandiejen_complex(self.PAR, wf)
        h = _complex_operator_callable(self.PAR, f)
        u, m = wf.axis_sites()[0]
        for k in (1, 3, 5):
            assert out.values[k] == pytest.approx(
                complex(h(np.array([u[k]]), m[k])[0]), rel=1e-12
            )


class TestRuijsenaars:
    def test_n1_is_plain_shift(self):
        f = lambda u, m: np.sin(0.3 * u) + m
        wf = lattice_from_function("complex", (0.3, 0.0), 6, 1, f)
        out = apply_ruijsenaars_complex(0.7 - 0.2j, wf)
        assert np.allclose(out.values[:-1], wf.values[1:])
        assert not out.valid[-1]

    def test_zero_coupling_is_shift_sum(self):
        f = lambda u1, m1, u2, m2: np.sin(0.3 * u1) + m2 + np.cos(0.2 * u2) * m1
        wf = lattice_from_function(
            "complex", ((0.3, 0.0), (0.9, 0.5)), 6, 2, f
        )
        out = apply_ruijsenaars_complex(0.0, wf)
        expect = wf.values[1:, :-1] + wf.values[:-1, 1:]
        assert np.allclose(out.values[:-1, :-1], expect)

    def test_coincident_coordinates_raise(self):
        wf = lattice_from_function(
            "complex", ((0.3, 0.0), (0.3, 0.0)), 5, 2,
            lambda u1, m1, u2, m2: 1.0,
        )
        with pytest.raises(PoleError):
            apply_ruijsenaars_complex(0.4, wf)


class TestHermiticity:
    def test_elliptic_n1(self):
        rng = np.random.default_rng(5)
        t = tuple((0.1 * np.exp(2j * np.pi * rng.random(8))).astype(complex))
        par = VanDiejenParams(
            "elliptic", 1, 0.08, t, base=BASE, balanced=False
        )
        phi = lambda x: x + 1.0 / x
        psi = lambda x: (x + 1.0 / x) ** 2 - 0.5
        r = hermiticity_check(par, phi, psi)
        assert r.relative < 1e-8

    def test_elliptic_domain(self):
        rng = np.random.default_rng(5)
        t = tuple((0.3 * np.exp(2j * np.pi * rng.random(8))).astype(complex))
        par = VanDiejenParams(
            "elliptic", 1, 0.08, t, base=BASE, balanced=False
        )
        with pytest.raises(DomainError):
            hermiticity_check(par, lambda x: x, lambda x: x)

    def test_complex_n1(self):
        par = _complex_hermiticity_params()

        def vanish(u, m):
            return ((1j * u + m) ** 2 - 1.0) * ((1j * u - m) ** 2 - 1.0)

        def phi(u, m):
            return vanish(u, m) / ((u * u + 4.0) ** 8 * (m * m + 2.0) ** 8)

        def psi(u, m):
            return vanish(u, m) / ((u * u + 9.0) ** 8 * (m * m + 3.0) ** 8)

        r = hermiticity_check(par, phi, psi)
        assert r.relative < 1e-6

    def test_complex_domain(self):
        par = VanDiejenParams(
            "complex", 1, 0.0, (-0.5j,) * 8,
            indices=(0,) * 8, balanced=False,
        )
        with pytest.raises(DomainError):
            hermiticity_check(par, lambda u, m: 1.0, lambda u, m: 1.0)
