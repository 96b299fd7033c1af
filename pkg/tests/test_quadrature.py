"""Quadrature engine: circle/line integrals, bilateral sums, residue sums."""

import numpy as np
import pytest

from ellhyper.quadrature import (
    IntegralResult,
    QuadratureSpec,
    RationalFunction,
    bilateral_sum,
    circle_integral,
    line_integral,
    residue_sum_rational,
)
from ellhyper.errors import ConvergenceError, DivergenceError, PinchingError

SPEC = QuadratureSpec()


class TestSpecValidation:
    def test_power_of_two(self):
        with pytest.raises(ValueError):
            QuadratureSpec(circle_nodes=100)

    def test_minimum_nodes(self):
        with pytest.raises(ValueError):
            QuadratureSpec(circle_nodes=32)

    def test_with_override(self):
        s = SPEC.with_(tol=1e-9)
        assert s.tol == 1e-9 and s.circle_nodes == SPEC.circle_nodes


class TestCircleIntegral:
    def test_constant(self):
        res = circle_integral(lambda x: np.ones_like(x), SPEC)
        assert res.value == pytest.approx(1.0, abs=1e-14)

    def test_power_orthogonality(self):
        for m in (1, -1, 3, -5):
            res = circle_integral(lambda x, m=m: x**m, SPEC)
            assert abs(res.value) < 1e-13

    def test_geometric(self):
        res = circle_integral(lambda x: 1.0 / (1 - 0.5 * x), SPEC)
        assert res.value == pytest.approx(1.0, abs=1e-12)

    def test_geometric_error_decay(self):
        # trapezoid on the circle: error drops by >= 10x per node doubling
        f = lambda x: 1.0 / (1 - 0.8 * x)
        errs = []
        for m in (64, 128, 256):
            nodes = np.exp(2j * np.pi * np.arange(m) / m)
            errs.append(abs(np.mean(f(nodes)) - 1.0))
        assert errs[1] < errs[0] / 10 and errs[2] < errs[1] / 10


class TestLineIntegral:
    def test_gaussian(self):
        res = line_integral(lambda y: np.exp(-(y**2)), SPEC, scale=1.0)
        assert res.value == pytest.approx(np.sqrt(np.pi), rel=1e-12)

    def test_odd_integrand(self):
        res = line_integral(lambda y: y * np.exp(-(y**2)), SPEC)
        assert abs(res.value) < 1e-13

    def test_lorentzian_sinh(self):
        res = line_integral(lambda y: 1.0 / (1 + y**2), SPEC.with_(line_truncation=1e12),
                            transform="sinh")
        assert res.value == pytest.approx(np.pi, rel=1e-11)

    def test_imaginary_axis(self):
        # int of exp(z^2) dz up the imaginary axis = i sqrt(pi)
        res = line_integral(lambda z: np.exp(z**2), SPEC, axis="imaginary")
        assert res.value == pytest.approx(1j * np.sqrt(np.pi), rel=1e-12)

    def test_truncation_detected(self):
        from ellhyper.errors import TruncationError

        with pytest.raises(TruncationError):
            line_integral(lambda y: 1.0 / (1 + y**2), SPEC)


class TestBilateralSum:
    def test_geometric(self):
        res = bilateral_sum(lambda n: 2.0 ** (-abs(n)), 0, SPEC)
        assert res.value == pytest.approx(3.0, rel=1e-12)

    def test_zero(self):
        res = bilateral_sum(lambda n: 0.0, 0, SPEC)
        assert res.value == 0

    def test_mittag_leffler(self):
        res = bilateral_sum(lambda n: 1.0 / (n**2 + 1), 0, SPEC, tail_correction=True)
        assert res.value == pytest.approx(np.pi / np.tanh(np.pi), rel=1e-10)

    def test_half_offset(self):
        # sum over Z+1/2 of 1/(n^2+1) = pi tanh(pi)
        res = bilateral_sum(lambda n: 1.0 / (n**2 + 1), 0.5, SPEC, tail_correction=True)
        assert res.value == pytest.approx(np.pi * np.tanh(np.pi), rel=1e-10)

    def test_reflection_invariance(self):
        g = lambda n: np.exp(-0.3 * abs(n)) * (1 + 0.1 * n)
        a = bilateral_sum(g, 0, SPEC).value
        b = bilateral_sum(lambda n: g(-n), 0, SPEC).value
        assert a == pytest.approx(b, rel=1e-12)

    def test_divergence(self):
        with pytest.raises(DivergenceError):
            bilateral_sum(lambda n: float(n) ** 2 + 1.0, 0, SPEC)


class TestResidueSum:
    def test_lorentzian_left(self):
        rf = RationalFunction(1.0, [], [1j, -1j])
        assert residue_sum_rational(rf, "left") == pytest.approx(np.pi, rel=1e-10)

    def test_lorentzian_right(self):
        rf = RationalFunction(1.0, [], [1j, -1j])
        assert residue_sum_rational(rf, "right") == pytest.approx(np.pi, rel=1e-10)

    def test_no_poles_on_side(self):
        rf = RationalFunction(2.0, [], [1j - 0.2, 2j + 0.4])
        assert residue_sum_rational(rf, "right") == 0

    def test_pinching(self):
        rf = RationalFunction(1.0, [], [0.5, 1j])
        with pytest.raises(PinchingError):
            residue_sum_rational(rf, "left")

    def test_double_pole(self):
        # f = 1/(y^2+1)^2, closing left: residue at i of order 2 gives pi/2
        rf = RationalFunction(1.0, [], [1j, 1j, -1j, -1j])
        assert residue_sum_rational(rf, "left") == pytest.approx(np.pi / 2, rel=1e-8)

    def test_matches_quadrature(self):
        rf = RationalFunction(1.3, [0.5 + 0.2j], [1j, -1.5j, 2j - 0.3, -2j + 0.8])
        direct = line_integral(rf, SPEC.with_(line_truncation=1e8), transform="sinh")
        via_res = residue_sum_rational(rf, "left")
        assert via_res == pytest.approx(direct.value, rel=1e-10)

    def test_imaginary_contour(self):
        # up the imaginary axis, single pole at -1 to the left of travel
        rf = RationalFunction(1.0, [], [-1.0, 1.0])
        got = residue_sum_rational(rf, "left", contour="imag")
        # residue of 1/((y+1)(y-1)) at y=-1 is -1/2: integral = 2 pi i (-1/2)
        assert got == pytest.approx(-1j * np.pi, rel=1e-10)


class TestResultShape:
    def test_fields(self):
        res = circle_integral(lambda x: 1.0 / (1 - 0.3 * x), SPEC)
        assert isinstance(res, IntegralResult)
        assert res.err_estimate >= 0 and res.nodes_used >= 64 and res.refinements >= 1

    def test_convergence_error_carries_values(self):
        # force failure with an absurdly tight tolerance and no refinement room
        f = lambda x: 1.0 / (1 - 0.99 * x)
        with pytest.raises(ConvergenceError) as exc:
            circle_integral(f, QuadratureSpec(tol=1e-16, max_refinements=1))
        assert exc.value.last_values is not None
