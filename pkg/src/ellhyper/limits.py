"""Degeneration limits between the function levels, with measured orders.

Every check evaluates a degenerating quantity along a decreasing parameter
sweep, strips the stated prefactor, and compares with the limit target.
Two slopes are fitted by least squares on log-log data: the error order
(informational; the displayed leading terms carry polynomial or log-type
corrections whose measured order is reported as found) and, where the
prefactor is a pure power of the sweep parameter, the divergence exponent,
which must match the stated power within 5 percent.  Points where the
quadrature leaves its reliable regime make the sweep end early and are
reported as "regime unreachable at this precision" rather than raised.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma

from .core import (
    EllipticBase,
    Quasiperiods,
    bernoulli22,
    complex_gamma,
    hyperbolic_gamma,
    pochhammer,
    theta,
)
from .equations import Residual
from .errors import (
    ConvergenceError,
    DivergenceError,
    DomainError,
    PinchingError,
    PoleError,
    TruncationError,
)
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
    v_function,
)
from .quadrature import QuadratureSpec

_DEFAULT_SWEEP = (0.2, 0.1, 0.05, 0.025)
_DELTA_SWEEP = (0.1, 0.05, 0.025, 0.0125, 0.00625)
_QUAD_FAILURES = (
    ConvergenceError,
    DivergenceError,
    PinchingError,
    PoleError,
    TruncationError,
    DomainError,
    OverflowError,
)
_NODE_CAP = 2048
_PANEL_CAP = 64


@dataclass(frozen=True)
class LimitSweep:
    """A degeneration experiment over a decreasing positive parameter.

    ``lhs(v)`` is the raw degenerating quantity (prefactor included),
    ``prefactor(v)`` the stated leading factor to strip, and ``rhs(v)`` the
    limit target.  ``expected_order`` is the stated power of the sweep
    parameter inside the prefactor (the real part of the exponent for a
    complex power); pass ``nan`` when the prefactor is not a pure power
    (exponential factors), which skips the exponent gate.
    """

    values: tuple
    lhs: object
    rhs: object
    expected_order: float
    prefactor: object = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 3:
            raise DomainError("a limit sweep needs at least 3 points")
        if any(v <= 0 for v in vals):
            raise DomainError("sweep values must be positive")
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise DomainError("sweep values must be strictly decreasing")
        object.__setattr__(self, "values", vals)
        if self.prefactor is None:
            object.__setattr__(self, "prefactor", lambda v: 1.0)


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of a limit sweep.

    ``values``/``errors`` cover the reachable points only; ``reachable`` is
    False when fewer than 3 points survived, and ``smallest_reliable``
    records the last parameter value that evaluated cleanly.
    ``fitted_exponent`` is the log-log slope of the raw magnitude and is
    gated against ``expected_order`` when the latter is finite;
    ``error_order`` is the measured convergence order of the residuals.
    """

    values: tuple
    errors: tuple
    expected_order: float
    fitted_exponent: float
    error_order: float
    reachable: bool
    smallest_reliable: float
    message: str = ""

    @property
    def monotone_tail(self) -> bool:
        tail = self.errors[-3:]
        return len(tail) == 3 and tail[0] > tail[1] > tail[2]

    @property
    def exponent_ok(self) -> bool:
        if not self.reachable:
            return False
        if math.isnan(self.expected_order):
            return True
        return abs(self.fitted_exponent - self.expected_order) <= 0.05 * max(
            abs(self.expected_order), 1.0
        )

    @property
    def ok(self) -> bool:
        return self.reachable and self.monotone_tail and self.exponent_ok


def _fit_slope(xs, ys):
    return float(np.polyfit(np.log(np.asarray(xs)), np.log(np.asarray(ys)), 1)[0])


def run_sweep(sweep: LimitSweep, workers: int = 4) -> ConvergenceReport:
    """Evaluate all sweep points concurrently and fit both slopes."""

    def point(v):
        try:
            raw = complex(sweep.lhs(v))
            target = complex(sweep.rhs(v))
            pref = complex(sweep.prefactor(v))
        except _QUAD_FAILURES as exc:
            return None, None, str(exc)
        if not np.isfinite([raw.real, raw.imag]).all():
            return None, None, "non-finite value"
        err = abs(raw / pref - target) / max(abs(target), 1e-300)
        return err, abs(raw), ""

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(point, sweep.values))
    values, errors, mags = [], [], []
    message = ""
    for v, (err, mag, note) in zip(sweep.values, results):
        if err is None:
            message = (
                "regime unreachable at this precision below %g (%s)" % (v, note)
            )
            break
        values.append(v)
        errors.append(err)
        mags.append(mag)
    reachable = len(values) >= 3
    if reachable:
        # fit the divergence exponent on the tail, where the limit's own
        # corrections contaminate the raw magnitude least
        fitted_exponent = _fit_slope(values[-3:], mags[-3:])
        error_order = _fit_slope(values, errors) if min(errors) > 0 else math.inf
    else:
        fitted_exponent = math.nan
        error_order = math.nan
    return ConvergenceReport(
        values=tuple(values),
        errors=tuple(errors),
        expected_order=sweep.expected_order,
        fitted_exponent=fitted_exponent,
        error_order=error_order,
        reachable=reachable,
        smallest_reliable=values[-1] if values else math.nan,
        message=message,
    )


def _scaled_spec(spec: QuadratureSpec, v: float, v0: float) -> QuadratureSpec:
    """Grow node counts like 1/v relative to the first sweep point, capped."""
    factor = max(1.0, v0 / v)
    nodes = spec.circle_nodes
    while nodes < min(_NODE_CAP, spec.circle_nodes * factor):
        nodes *= 2
    panels = int(min(_PANEL_CAP, math.ceil(spec.line_panels * factor)))
    return spec.with_(circle_nodes=nodes, line_panels=panels)


# ---------------------------------------------------------------------------
# theta and gamma asymptotics


def _nome(exponent) -> complex:
    q = cmath.exp(exponent)
    if abs(q) >= 1:
        raise DomainError("theta nome must lie inside the unit disc")
    return q


def check_theta_modular(u, omega1, omega2) -> Residual:
    """Residual of the modular transformation rule for the short theta.

    theta(e^(-2*pi*i*u/w1); e^(-2*pi*i*w2/w1)) equals
    e^(pi*i*B22(u)) * theta(e^(2*pi*i*u/w2); e^(2*pi*i*w1/w2)) with the
    second-order Bernoulli polynomial B22(u; w1, w2) in the exponent.
    """
    u = complex(u)
    omega1 = complex(omega1)
    omega2 = complex(omega2)
    p_left = _nome(-2j * cmath.pi * omega2 / omega1)
    p_right = _nome(2j * cmath.pi * omega1 / omega2)
    lhs = complex(theta(cmath.exp(-2j * cmath.pi * u / omega1), p_left))
    rhs = cmath.exp(1j * cmath.pi * bernoulli22(u, omega1, omega2)) * complex(
        theta(cmath.exp(2j * cmath.pi * u / omega2), p_right)
    )
    return Residual(lhs - rhs, max(abs(lhs), abs(rhs), 1e-300))


def check_theta_small_v(u, omega1, v_values=_DEFAULT_SWEEP) -> ConvergenceReport:
    """theta(e^(-2*pi*v*u); e^(-2*pi*v*w1)) * e^(pi/(6*w1*v)) -> 2 sin(pi*u/w1).

    The prefactor is exponential, so no power exponent is gated; the
    leading corrections come from the Bernoulli polynomial expansion and
    are linear in v (measured order close to 1).
    """
    u = complex(u)
    omega1 = complex(omega1)
    target = 2.0 * cmath.sin(cmath.pi * u / omega1)

    def lhs(v):
        q = _nome(-2.0 * cmath.pi * v * omega1)
        return complex(theta(cmath.exp(-2.0 * cmath.pi * v * u), q))

    def prefactor(v):
        return cmath.exp(-cmath.pi / (6.0 * omega1 * v))

    sweep = LimitSweep(v_values, lhs, lambda v: target, math.nan, prefactor)
    return run_sweep(sweep)


def check_gamma2_rational_limit(
    x, omega1_values=_DEFAULT_SWEEP, omega2=1.0
) -> ConvergenceReport:
    """gamma2(w1*x; w1, w2) -> Gamma(x)/sqrt(2*pi) * (w2/(2*pi*w1))^(1/2 - x).

    The raw magnitude diverges like w1^(Re x - 1/2); the gated exponent is
    that power.  The residual order measures quadratic (the linear
    correction cancels in this combination).
    """
    x = complex(x)
    omega2 = complex(omega2)
    target = complex(_gamma(x))

    def lhs(w1):
        qp = Quasiperiods(w1, omega2)
        return complex(hyperbolic_gamma(w1 * x, qp))

    def prefactor(w1):
        return (omega2 / (2.0 * cmath.pi * w1)) ** (0.5 - x) / math.sqrt(
            2.0 * math.pi
        )

    sweep = LimitSweep(
        omega1_values, lhs, lambda v: target, x.real - 0.5, prefactor
    )
    return run_sweep(sweep)


def _delta_quasiperiods(delta: float, which: str) -> Quasiperiods:
    if not 0.0 < delta <= 0.3:
        raise DomainError("delta limits are defined for delta in (0, 0.3]")
    root = (1j + delta) if which == "gam2lim2" else (1.0 + 1j * delta)
    return Quasiperiods(root * root, 1.0)


def check_gamma2_delta_limit(
    x, n, delta_values=_DELTA_SWEEP, which: str = "gam2lim2"
) -> ConvergenceReport:
    """The two singular gamma2 limits as the quasiperiod ratio degenerates.

    which='gam2lim2' (sqrt(w1/w2) = i + delta):
    gamma2(i*sqrt(w1*w2)*(n + x*delta)) tends to
    e^(pi*i*n^2/2) * (4*pi*delta)^(i*x - 1) * bold-Gamma(x, n); the gated
    power is Re(i*x - 1).  which='limit2' (sqrt(w1/w2) = 1 + i*delta):
    the target is e^(-pi*i*(n-1)^2/2) * (4*pi*delta)^(n-1) times the
    Pochhammer factor (1 - (n + i*x)/2)_(n-1); gated power n - 1.

    The residual order is reported as measured: the displayed power-of-
    (4*pi*delta) prefactor leaves corrections of size delta*log(1/delta),
    so the measured order sits below 1 on practical sweeps.
    """
    if which not in ("gam2lim2", "limit2"):
        raise DomainError("which must be 'gam2lim2' or 'limit2'")
    x = complex(x)
    n = int(n)
    if which == "gam2lim2":
        target = complex(complex_gamma(x, n))
        power = -x.imag - 1.0
    else:
        target = complex(pochhammer(1.0 - (n + 1j * x) / 2.0, n - 1))
        power = float(n - 1)

    def lhs(delta):
        qp = _delta_quasiperiods(delta, which)
        root = 1j + delta if which == "gam2lim2" else 1.0 + 1j * delta
        arg = (1j if which == "gam2lim2" else 1.0) * root * (n + x * delta)
        return complex(hyperbolic_gamma(arg, qp))

    def prefactor(delta):
        if which == "gam2lim2":
            return cmath.exp(0.5j * cmath.pi * n * n) * (
                4.0 * cmath.pi * delta
            ) ** (1j * x - 1.0)
        return cmath.exp(-0.5j * cmath.pi * (n - 1) ** 2) * (
            4.0 * cmath.pi * delta
        ) ** (n - 1.0)

    sweep = LimitSweep(delta_values, lhs, lambda v: target, power, prefactor)
    return run_sweep(sweep)


# ---------------------------------------------------------------------------
# integral degenerations


def check_V_to_Ih(
    g, omega1, omega2, v_values=_DEFAULT_SWEEP, spec: QuadratureSpec = DEFAULT_SPEC
) -> ConvergenceReport:
    """V(t; p, q) -> e^((5*pi/12v)(1/w1 + 1/w2)) * I_h(g; w1, w2).

    Under t_a = e^(-2*pi*v*g_a), p = e^(-2*pi*v*w1), q = e^(-2*pi*v*w2)
    the sum rule for g turns into the elliptic balancing automatically.
    The prefactor is exponential in 1/v, so no power is gated.  The nomes
    approach 1 as v shrinks; the circle node count grows like 1/v up to a
    hard cap and the report carries the smallest reliable v.
    """
    g = tuple(complex(v) for v in g)
    omega1 = complex(omega1)
    omega2 = complex(omega2)
    qp = Quasiperiods(omega1, omega2)
    target = complex(hyperbolic_integral(HypParams(g, qp), spec))
    v0 = float(v_values[0])

    def lhs(v):
        base = EllipticBase(
            cmath.exp(-2.0 * cmath.pi * v * omega1),
            cmath.exp(-2.0 * cmath.pi * v * omega2),
        )
        t = tuple(cmath.exp(-2.0 * cmath.pi * v * ga) for ga in g)
        return complex(v_function(VParams(t, base), _scaled_spec(spec, v, v0)))

    def prefactor(v):
        return cmath.exp(
            (5.0 * cmath.pi / (12.0 * v)) * (1.0 / omega1 + 1.0 / omega2)
        )

    sweep = LimitSweep(v_values, lhs, lambda v: target, math.nan, prefactor)
    return run_sweep(sweep)


def check_Ih_to_Ir(
    alpha,
    omega1_values=_DEFAULT_SWEEP,
    omega2=1.0,
    flipped=(4, 5),
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ConvergenceReport:
    """I_h with g_j = w1*alpha_j (plus a w2 shift on the flipped pair)
    -> ((1/2*pi) * sqrt(w2/w1))^5 * I_r(alpha) as w1 -> 0; gated power -5/2."""
    rat = RatParams(alpha, flipped)
    omega2 = complex(omega2)
    target = complex(rational_integral(rat, spec))

    def lhs(w1):
        g = [w1 * aj for aj in rat.alpha]
        for j in rat.flipped:
            g[j - 1] = g[j - 1] + omega2
        qp = Quasiperiods(w1, omega2)
        return complex(hyperbolic_integral(HypParams(tuple(g), qp), spec))

    def prefactor(w1):
        return ((omega2 / w1) ** 0.5 / (2.0 * cmath.pi)) ** 5

    sweep = LimitSweep(omega1_values, lhs, lambda v: target, -2.5, prefactor)
    return run_sweep(sweep)


def _delta_hyp_params(params: ComplexParams, delta: float, which: str):
    qp = _delta_quasiperiods(delta, which)
    root = (1j + delta) if which == "gam2lim2" else (1.0 + 1j * delta)
    unit = 1j * root if which == "gam2lim2" else root
    g = [unit * (nk + sk * delta) for sk, nk in zip(params.s, params.n)]
    # the discrete sum rules are the delta -> 0 limit of the hyperbolic
    # balancing, which they miss at O(delta^2); spread the defect evenly so
    # the integral's exact constraint holds at every sweep point
    defect = 2.0 * (qp.omega1 + qp.omega2) - sum(g)
    g = tuple(gk + defect / 8.0 for gk in g)
    if any(gk.real <= 0 for gk in g):
        raise PinchingError("Re(g_j) <= 0 under the delta parametrization")
    return HypParams(g, qp)


def check_Ih_to_F(
    params: ComplexParams,
    delta_values=_DEFAULT_SWEEP,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ConvergenceReport:
    """I_h -> (4*pi*delta)^(-5) * F(s, n) with sqrt(w1/w2) = i + delta.

    Gated power -5.  Admissibility is narrow: Re(g_j) > 0 forces every n_j
    to vanish and every s_j to sit on the negative imaginary axis, so the
    nu = 1/2 family (whose indices cannot all vanish) comes back as an
    unreachable report rather than an error.
    """
    if params.family != "F":
        raise DomainError("check_Ih_to_F needs family-F parameters")
    target = complex(complex_F(params, spec))

    def lhs(delta):
        hyp = _delta_hyp_params(params, delta, "gam2lim2")
        return complex(hyperbolic_integral(hyp, spec))

    def prefactor(delta):
        return (4.0 * cmath.pi * delta) ** -5

    sweep = LimitSweep(delta_values, lhs, lambda v: target, -5.0, prefactor)
    return run_sweep(sweep)


def check_Ih_to_R(
    params: ComplexParams,
    delta_values=_DEFAULT_SWEEP,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ConvergenceReport:
    """I_h -> i * (4*pi*delta)^(-5) * R(s, n) with sqrt(w1/w2) = 1 + i*delta.

    Gated power -5.  Slots with n_j = 0 keep Re(g_j) of size delta, so the
    contour pinches early; the all-half-integer nu = 1/2 family is the
    robust corpus here.
    """
    if params.family != "R":
        raise DomainError("check_Ih_to_R needs family-R parameters")
    target = complex(complex_R(params, spec))

    def lhs(delta):
        hyp = _delta_hyp_params(params, delta, "limit2")
        return complex(hyperbolic_integral(hyp, spec))

    def prefactor(delta):
        return 1j * (4.0 * cmath.pi * delta) ** -5

    sweep = LimitSweep(delta_values, lhs, lambda v: target, -5.0, prefactor)
    return run_sweep(sweep)
