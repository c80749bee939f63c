"""Gauge profiles, the frequency function and the reduced canonical system.

The reduced radial equations in ``(r, u, v)`` are rescaled to
``q = u, p = v, t = V r`` with ``phi(t) = Phi(r) / V``, giving the linear
Hamiltonian system

    q' = p + phi q,    p' = -q - phi p,    H = (p^2 + q^2)/2 + phi p q.

Both ``q`` and ``p`` then obey time-dependent oscillator equations with
squared frequencies ``1 - phi' - phi^2`` and ``1 + phi' - phi^2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .specfun import bessel_k0_k1

ScalarFn = Callable[[float], float]

BESSEL_T_MIN = 1e-8


class ModelDomainError(ValueError):
    """Evaluation outside the domain where a profile is defined."""


class ProfileValidationError(ValueError):
    """Invalid profile or map parameters."""


@dataclass(frozen=True)
class GaugeProfile:
    """The rescaled gauge function ``phi(t)`` with its first two derivatives.

    ``phi_ddot`` is only needed for the third-order determining equation and
    for the time derivative of the gauge function; it may be ``None`` for
    profiles where those checks are not wanted.
    """

    phi: ScalarFn
    phi_dot: ScalarFn
    n: int
    label: str
    t_min: float
    phi_ddot: ScalarFn | None = None

    def check_t(self, t: float) -> float:
        t = float(t)
        if not t >= self.t_min or math.isnan(t):
            raise ModelDomainError(
                f"t={t!r} is below t_min={self.t_min!r} of profile {self.label!r}"
            )
        return t

    def negated(self) -> "GaugeProfile":
        """The profile with the sign of phi reversed."""
        ddot = self.phi_ddot
        return GaugeProfile(
            phi=lambda t: -self.phi(t),
            phi_dot=lambda t: -self.phi_dot(t),
            n=-self.n,
            label=f"-{self.label}",
            t_min=self.t_min,
            phi_ddot=None if ddot is None else (lambda t: -ddot(t)),
        )


@dataclass(frozen=True)
class RadialMap:
    V: float
    n: int
    allow_even_n: bool = False

    def __post_init__(self):
        if not self.V > 0:
            raise ProfileValidationError(f"bias potential V must be positive, got {self.V}")
        if self.n == 0:
            raise ProfileValidationError("n = 0 gives no vortex; A(r) is undefined")
        if self.n % 2 == 0 and not self.allow_even_n:
            raise ProfileValidationError(
                f"n must be odd for a single-valued spinor, got {self.n}"
            )


@dataclass(frozen=True)
class PhaseState:
    t: float
    q: float
    p: float

    def qdot(self, profile: GaugeProfile) -> float:
        return self.p + profile.phi(profile.check_t(self.t)) * self.q


def phi_bessel(n: int, allow_even_n: bool = False) -> GaugeProfile:
    """The profile ``phi(t) = (n/2) K1(t)``."""
    n = int(n)
    if n % 2 == 0:
        if not allow_even_n:
            raise ProfileValidationError(
                f"n must be odd (pass allow_even_n=True to override), got {n}"
            )
        warnings.warn(f"using even vorticity n={n}", stacklevel=2)
    half_n = 0.5 * n

    def phi(t):
        return half_n * bessel_k0_k1(t)[1]

    def phi_dot(t):
        k0, k1 = bessel_k0_k1(t)
        return -half_n * (k0 + k1 / t)

    def phi_ddot(t):
        k0, k1 = bessel_k0_k1(t)
        return half_n * (k1 + k0 / t + 2.0 * k1 / (t * t))

    return GaugeProfile(phi, phi_dot, n, f"bessel_n{n}", BESSEL_T_MIN, phi_ddot)


def phi_zero() -> GaugeProfile:
    """Vanishing gauge field: the model reduces to the unit-frequency oscillator."""

    def zero(t):
        return 0.0

    return GaugeProfile(zero, zero, 0, "zero", 0.0, zero)


def profile_from_config(kind: str, n: int, allow_even_n: bool = False) -> GaugeProfile:
    if kind == "bessel":
        return phi_bessel(n, allow_even_n=allow_even_n)
    if kind == "zero":
        return phi_zero()
    raise ProfileValidationError(f"unknown profile kind {kind!r}")


def omega_squared(profile: GaugeProfile, t: float) -> float:
    t = profile.check_t(t)
    phi = profile.phi(t)
    return 1.0 - profile.phi_dot(t) - phi * phi


def omega_squared_dot(profile: GaugeProfile, t: float) -> float:
    """d(omega^2)/dt = -phi'' - 2 phi phi'."""
    t = profile.check_t(t)
    if profile.phi_ddot is None:
        raise ProfileValidationError(f"profile {profile.label!r} has no second derivative")
    return -profile.phi_ddot(t) - 2.0 * profile.phi(t) * profile.phi_dot(t)


def partner_omega_squared(profile: GaugeProfile, t: float) -> float:
    t = profile.check_t(t)
    phi = profile.phi(t)
    return 1.0 + profile.phi_dot(t) - phi * phi


def reduced_rhs(profile: GaugeProfile, s: PhaseState) -> tuple[float, float]:
    t = profile.check_t(s.t)
    phi = profile.phi(t)
    return s.p + phi * s.q, -s.q - phi * s.p


def reduced_vector_field(profile: GaugeProfile) -> Callable[[float, np.ndarray], np.ndarray]:
    """``f(t, y)`` for ``y = (q, p)``, suitable for :func:`integrate.solve_ivp`."""
    phi_fn = profile.phi
    t_min = profile.t_min

    def rhs(t, y):
        if t < t_min:
            raise ModelDomainError(f"t={t!r} is below t_min={t_min!r}")
        phi = phi_fn(t)
        q, p = y
        return np.array([p + phi * q, -q - phi * p])

    return rhs


def hamiltonian(profile: GaugeProfile, s: PhaseState) -> float:
    t = profile.check_t(s.t)
    return 0.5 * (s.p * s.p + s.q * s.q) + profile.phi(t) * s.p * s.q


def lagrangian(profile: GaugeProfile, q: float, qdot: float, t: float) -> float:
    t = profile.check_t(t)
    phi = profile.phi(t)
    return 0.5 * qdot * qdot - 0.5 * (1.0 - phi * phi) * q * q - phi * q * qdot


def standard_lagrangian(profile: GaugeProfile, q: float, qdot: float, t: float) -> float:
    return 0.5 * qdot * qdot - 0.5 * omega_squared(profile, t) * q * q


def radial_to_scaled(rmap: RadialMap, r: float, u: float, v: float) -> PhaseState:
    if not r > 0:
        raise ModelDomainError(f"radius must be positive, got {r}")
    return PhaseState(t=rmap.V * r, q=u, p=v)


def scaled_to_radial(rmap: RadialMap, s: PhaseState) -> tuple[float, float, float]:
    return s.t / rmap.V, s.q, s.p


def radial_Phi(profile: GaugeProfile, rmap: RadialMap, r: float) -> float:
    """The unscaled gauge coupling ``Phi(r) = V phi(V r)``."""
    if not r > 0:
        raise ModelDomainError(f"radius must be positive, got {r}")
    return rmap.V * profile.phi(profile.check_t(rmap.V * r))


def gauge_A(profile: GaugeProfile, rmap: RadialMap, r: float) -> float:
    """Recover the gauge field ``A(r) = 1/2 - (V r / n) phi(V r)``."""
    if not r > 0:
        raise ModelDomainError(f"radius must be positive, got {r}")
    if rmap.n == 0:
        raise ProfileValidationError("n = 0 is invalid")
    t = profile.check_t(rmap.V * r)
    return 0.5 - t * profile.phi(t) / rmap.n


@dataclass(frozen=True)
class AsymptoteReport:
    small_t_deviation: float
    large_t_magnitude: float
    small_tol: float
    large_tol: float

    @property
    def small_ok(self) -> bool:
        return self.small_t_deviation <= self.small_tol

    @property
    def large_ok(self) -> bool:
        return self.large_t_magnitude <= self.large_tol

    @property
    def passed(self) -> bool:
        return self.small_ok and self.large_ok


def _validated_grid(grid: Sequence[float], name: str) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.size == 0:
        raise ProfileValidationError(f"{name} grid is empty")
    if np.any(g <= 0) or np.any(np.diff(g) <= 0):
        raise ProfileValidationError(f"{name} grid must be positive and strictly increasing")
    return g


def asymptote_check(
    profile: GaugeProfile,
    n: int,
    t_small_grid: Sequence[float],
    t_large_grid: Sequence[float],
    small_tol: float = 1e-4,
    large_tol: float = 1e-11,
) -> AsymptoteReport:
    """Check ``t phi(t) -> n/2`` on the small grid and ``t phi(t) -> 0`` on the large one.

    The tolerances are artifact choices; the asymptotes carry no stated rate.
    """
    small = _validated_grid(t_small_grid, "small-t")
    large = _validated_grid(t_large_grid, "large-t")
    dev = max(abs(t * profile.phi(profile.check_t(t)) - 0.5 * n) for t in small)
    mag = max(abs(t * profile.phi(profile.check_t(t))) for t in large)
    return AsymptoteReport(dev, mag, small_tol, large_tol)
