"""Extended-precision twins of the scalar special functions.

Every function here mirrors one in :mod:`ellhyper.core` but runs in mpmath
arbitrary precision.  They exist for oracle generation and for the
``--precision extended`` verification mode; the working precision is set per
call through the ``dps`` argument (default 40 digits, always >= 30).
"""

from __future__ import annotations

import mpmath as mp

DEFAULT_DPS = 40


def _workdps(dps):
    if dps < 30:
        raise ValueError("extended mode requires at least 30 digits")
    return mp.workdps(dps)


def qpochhammer_inf(z, p, dps: int = DEFAULT_DPS):
    """(z;p)_inf by direct truncated product."""
    with _workdps(dps):
        z, p = mp.mpmathify(z), mp.mpmathify(p)
        if abs(p) >= 1:
            raise ValueError("|p| must be < 1")
        acc = mp.mpf(1)
        zp = z
        tail = mp.mpf(10) ** (-(dps + 5))
        for _ in range(100000):
            acc *= 1 - zp
            zp *= p
            if abs(zp) < tail:
                break
        return acc


def theta(z, p, dps: int = DEFAULT_DPS):
    """theta(z;p) = (z;p)_inf (p/z;p)_inf."""
    with _workdps(dps):
        z, p = mp.mpmathify(z), mp.mpmathify(p)
        return qpochhammer_inf(z, p, dps) * qpochhammer_inf(p / z, p, dps)


def elliptic_gamma(z, p, q, dps: int = DEFAULT_DPS):
    """Gamma(z;p,q) by the truncated double product."""
    with _workdps(dps):
        z, p, q = mp.mpmathify(z), mp.mpmathify(p), mp.mpmathify(q)
        tail = mp.mpf(10) ** (-(dps + 5))
        bound = max(abs(z), 1 / abs(z))
        acc = mp.mpf(1)
        j = 0
        pj = mp.mpf(1)
        while abs(pj) * bound >= tail:
            k = 0
            qk = mp.mpf(1)
            while abs(pj * qk) * bound >= tail:
                w = pj * qk
                acc *= (1 - p * q * w / z) / (1 - z * w)
                qk *= q
                k += 1
            pj *= p
            j += 1
        return acc


def bernoulli22(u, omega1, omega2, dps: int = DEFAULT_DPS):
    with _workdps(dps):
        u = mp.mpmathify(u)
        w1, w2 = mp.mpmathify(omega1), mp.mpmathify(omega2)
        num = u * u - (w1 + w2) * u + (w1 * w1 + w2 * w2) / 6 + w1 * w2 / 2
        return num / (w1 * w2)


def hyperbolic_gamma(u, omega1, omega2, dps: int = DEFAULT_DPS):
    """gamma^(2)(u; omega1, omega2).

    Uses the double-product representation when Im(omega1/omega2) != 0 and
    the exponentiated contour integral on the line Im(x) = h otherwise.
    """
    with _workdps(dps):
        u = mp.mpmathify(u)
        w1, w2 = mp.mpmathify(omega1), mp.mpmathify(omega2)
        pref = mp.exp(-mp.pi * 1j / 2 * bernoulli22(u, w1, w2, dps))
        ratio = w1 / w2
        if abs(mp.im(ratio)) > mp.mpf(10) ** (-dps // 2):
            if mp.im(ratio) < 0:
                w1, w2 = w2, w1
            qt = mp.exp(-2j * mp.pi * w2 / w1)
            q = mp.exp(2j * mp.pi * w1 / w2)
            num = qpochhammer_inf(qt * mp.exp(2j * mp.pi * u / w1), qt, dps)
            den = qpochhammer_inf(mp.exp(2j * mp.pi * u / w2), q, dps)
            return pref * num / den
        if not (0 < mp.re(u) < mp.re(w1 + w2)):
            raise ValueError("integral branch needs 0 < Re(u) < Re(omega1+omega2)")
        h = min(mp.pi / (4 * abs(w1)), mp.pi / (4 * abs(w2)))

        def f(t):
            x = t + 1j * h
            return mp.exp(u * x) / ((1 - mp.exp(w1 * x)) * (1 - mp.exp(w2 * x)) * x)

        val = mp.quad(f, [-mp.inf, 0, mp.inf])
        return pref * mp.exp(-val)


def complex_gamma(x, n, dps: int = DEFAULT_DPS):
    """Gamma(x,n) = Gamma((n+ix)/2) / Gamma(1+(n-ix)/2)."""
    with _workdps(dps):
        x = mp.mpmathify(x)
        n = mp.mpmathify(n)
        return mp.gamma((n + 1j * x) / 2) / mp.gamma(1 + (n - 1j * x) / 2)


def pochhammer(a, n: int, dps: int = DEFAULT_DPS):
    with _workdps(dps):
        a = mp.mpmathify(a)
        acc = mp.mpf(1)
        if n >= 0:
            for k in range(n):
                acc *= a + k
            return acc
        for k in range(1, -n + 1):
            acc /= a - k
        return acc


def dedekind_eta(tau, dps: int = DEFAULT_DPS):
    with _workdps(dps):
        tau = mp.mpmathify(tau)
        if mp.im(tau) <= 0:
            raise ValueError("Im(tau) must be positive")
        q = mp.exp(2j * mp.pi * tau)
        return mp.exp(mp.pi * 1j * tau / 12) * qpochhammer_inf(q, q, dps)


def circle_integral(f, nodes: int = 512, dps: int = DEFAULT_DPS):
    """(1/2 pi i) * contour integral of f(x) dx/x on the unit circle, trapezoid rule."""
    with _workdps(dps):
        total = mp.mpf(0)
        for k in range(nodes):
            total += f(mp.exp(2j * mp.pi * mp.mpf(k) / nodes))
        return total / nodes
