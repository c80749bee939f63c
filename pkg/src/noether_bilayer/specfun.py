"""Modified Bessel functions of the second kind, orders 0 and 1.

Two evaluation branches are used:

* ``t <= 2``: ascending power series with the logarithmic term.
* ``t > 2``: Steed's continued fraction (Temme's form) which yields K0 and K1
  together, accurate to a few ulps for any argument.

Arguments larger than ``UNDERFLOW_T`` underflow to zero; the ``underflow``
flag on :class:`BesselEval` records this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

EULER_GAMMA = 0.57721566490153286061
SERIES_MAX_T = 2.0
UNDERFLOW_T = 745.0

_EPS = 1e-17
_MAXIT = 10_000

MethodTag = Literal["series", "continued_fraction", "asymptotic"]


class BesselDomainError(ValueError):
    """Raised for non-positive (or non-finite) arguments."""


@dataclass(frozen=True)
class BesselEval:
    argument: float
    value: float
    method_tag: MethodTag
    underflow: bool = False


def _check(t: float) -> float:
    t = float(t)
    if not (t > 0.0) or math.isinf(t):
        raise BesselDomainError(f"argument must be positive and finite, got {t!r}")
    return t


def _series(t: float) -> tuple[float, float]:
    # K0 = -(ln(t/2) + gamma) I0 + sum_k H_k y^k / (k!)^2,  y = t^2/4
    # K1 = 1/t + ln(t/2) I1 - (t/4) sum_k (psi(k+1) + psi(k+2)) y^k / (k!(k+1)!)
    y = 0.25 * t * t
    lg = math.log(0.5 * t)

    i0 = 1.0
    s0 = 0.0
    term = 1.0
    harmonic = 0.0
    k = 0
    while True:
        k += 1
        term *= y / (k * k)
        harmonic += 1.0 / k
        i0 += term
        s0 += harmonic * term
        if term < _EPS * i0 and harmonic * term < _EPS * abs(s0):
            break
        if k > _MAXIT:
            raise RuntimeError("K0 series did not converge")
    k0 = -(lg + EULER_GAMMA) * i0 + s0

    # term_k = y^k / (k! (k+1)!)
    term = 1.0
    h_k = 0.0          # H_k
    h_k1 = 1.0         # H_{k+1}
    i1 = 1.0
    s1 = (h_k + h_k1 - 2.0 * EULER_GAMMA) * term
    k = 0
    while True:
        k += 1
        term *= y / (k * (k + 1))
        h_k += 1.0 / k
        h_k1 += 1.0 / (k + 1)
        i1 += term
        d = (h_k + h_k1 - 2.0 * EULER_GAMMA) * term
        s1 += d
        if term < _EPS * i1 and abs(d) < _EPS * abs(s1):
            break
        if k > _MAXIT:
            raise RuntimeError("K1 series did not converge")
    i1 *= 0.5 * t
    k1 = 1.0 / t + lg * i1 - 0.25 * t * s1
    return k0, k1


def _continued_fraction(t: float) -> tuple[float, float]:
    # Steed's algorithm for CF2 with nu = 0 (Numerical Recipes, bessik).
    b = 2.0 * (1.0 + t)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:
        raise RuntimeError(f"continued fraction did not converge at t={t}")
    h *= a1
    k0 = math.sqrt(math.pi / (2.0 * t)) * math.exp(-t) / s
    k1 = k0 * (t + 0.5 - h) / t
    return k0, k1


def _k0k1(t: float) -> tuple[float, float, MethodTag, bool]:
    if t <= SERIES_MAX_T:
        k0, k1 = _series(t)
        return k0, k1, "series", False
    if t >= UNDERFLOW_T:
        return 0.0, 0.0, "asymptotic", True
    k0, k1 = _continued_fraction(t)
    return k0, k1, "continued_fraction", False


def bessel_k0_eval(t: float) -> BesselEval:
    t = _check(t)
    k0, _, tag, uf = _k0k1(t)
    return BesselEval(t, k0, tag, uf)


def bessel_k1_eval(t: float) -> BesselEval:
    t = _check(t)
    _, k1, tag, uf = _k0k1(t)
    return BesselEval(t, k1, tag, uf)


def bessel_k0(t: float) -> float:
    """K0(t) for t > 0."""
    return _k0k1(_check(t))[0]


def bessel_k1(t: float) -> float:
    """K1(t) for t > 0."""
    return _k0k1(_check(t))[1]


def bessel_k0_k1(t: float) -> tuple[float, float]:
    """Both K0(t) and K1(t) from a single evaluation."""
    k0, k1, _, _ = _k0k1(_check(t))
    return k0, k1


def bessel_k1_deriv(t: float) -> float:
    """dK1/dt via the recurrence K1' = -K0 - K1/t."""
    k0, k1 = bessel_k0_k1(t)
    return -k0 - k1 / t


def bessel_k1_deriv2(t: float) -> float:
    """d^2K1/dt^2 = K1 + K0/t + 2 K1/t^2, from the modified Bessel equation."""
    k0, k1 = bessel_k0_k1(t)
    return k1 + k0 / t + 2.0 * k1 / (t * t)
