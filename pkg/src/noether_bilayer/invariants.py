"""Fundamental solution pair, Pinney superposition and the Noether invariants.

Everything here is built from the pair ``(g1, g2)`` of solutions of
``g'' + omega^2(t) g = 0`` started at ``t0`` from ``(1, 0)`` and ``(0, 1)``.
Time derivatives of quadratic expressions in ``g1, g2`` are formed
analytically using ``g'' = -omega^2 g``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .integrate import Tolerances, Trajectory, quadrature, solve_ivp
from .model import (
    GaugeProfile,
    PhaseState,
    lagrangian,
    omega_squared,
    omega_squared_dot,
)

DEFAULT_T0 = 1e-2
DEFAULT_T_END = 50.0
QUADRATURE_FLOOR = 1e-3
RADICAND_GRID = 1000
INVARIANT_NAMES = ("I1", "I2", "I3", "I4", "I5", "I_EL", "W", "I_total")


class InvariantDomainError(ValueError):
    """Evaluation outside the window or where a construction is undefined."""


@dataclass(frozen=True, eq=False)
class FundamentalPair:
    profile: GaugeProfile
    t0: float
    trajectory: Trajectory

    @property
    def t_end(self) -> float:
        return self.trajectory.t_end

    @property
    def window(self) -> tuple[float, float]:
        return self.t0, self.t_end

    def check_t(self, t: float) -> float:
        t = float(t)
        if not self.t0 <= t <= self.t_end:
            raise InvariantDomainError(f"t={t!r} outside window [{self.t0}, {self.t_end}]")
        return t

    def values(self, t: float) -> np.ndarray:
        """``(g1, g1', g2, g2')`` at ``t``."""
        return self.trajectory.state(self.check_t(t))

    def g1(self, t: float) -> float:
        return float(self.values(t)[0])

    def g1_dot(self, t: float) -> float:
        return float(self.values(t)[1])

    def g2(self, t: float) -> float:
        return float(self.values(t)[2])

    def g2_dot(self, t: float) -> float:
        return float(self.values(t)[3])

    def max_abs_g(self) -> float:
        return float(np.max(np.abs(self.trajectory.states[:, [0, 2]])))


def fundamental_pair(
    profile: GaugeProfile,
    t0: float = DEFAULT_T0,
    t_end: float = DEFAULT_T_END,
    tol: Tolerances | None = None,
) -> FundamentalPair:
    """Co-integrate both solutions as one 4-dimensional system."""
    t0 = profile.check_t(t0)
    if not t_end > t0:
        raise ValueError(f"t_end must exceed t0 (got t0={t0}, t_end={t_end})")
    phi, phi_dot = profile.phi, profile.phi_dot

    def rhs(t, y):
        p = phi(t)
        w2 = 1.0 - phi_dot(t) - p * p
        return np.array([y[1], -w2 * y[0], y[3], -w2 * y[2]])

    traj = solve_ivp(rhs, t0, [1.0, 0.0, 0.0, 1.0], t_end, tol)
    return FundamentalPair(profile, t0, traj)


def wronskian(pair: FundamentalPair, t: float) -> float:
    g1, d1, g2, d2 = pair.values(t)
    return g1 * d2 - g2 * d1


def tdho_residual(pair: FundamentalPair, t: float) -> tuple[float, float]:
    """``g'' + omega^2 g`` for g1 and g2, with ``g''`` from the interpolant's derivative."""
    t = pair.check_t(t)
    y = pair.trajectory.state(t)
    dy = pair.trajectory.derivative(t)
    w2 = omega_squared(pair.profile, t)
    return dy[1] + w2 * y[0], dy[3] + w2 * y[2]


def _first_small_g1(pair: FundamentalPair, t: float, floor: float) -> float | None:
    traj = pair.trajectory
    i_end = int(np.searchsorted(traj.t_grid, t, side="right"))
    nodes = list(traj.t_grid[:i_end])
    if nodes[-1] < t:
        nodes.append(t)
    prev = None
    for tn in nodes:
        g = pair.g1(tn)
        if abs(g) < floor:
            return tn
        if prev is not None and (prev[1] > 0) != (g > 0):
            lo, hi = prev[0], tn
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if (pair.g1(mid) > 0) == (prev[1] > 0):
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
        prev = (tn, g)
    return None


def g2_by_quadrature(
    pair: FundamentalPair, t: float, floor: float = QUADRATURE_FLOOR, tol: float = 1e-13
) -> float:
    """Second solution from reduction of order, ``g1(t) * integral_{t0}^{t} ds / g1(s)^2``."""
    t = pair.check_t(t)
    bad = _first_small_g1(pair, t, floor)
    if bad is not None:
        raise InvariantDomainError(
            f"g1 reaches |g1| < {floor} at t = {bad!r} inside [{pair.t0}, {t}]"
        )
    if t == pair.t0:
        return 0.0

    def integrand(s):
        return pair.g1(s) ** -2

    # integrate node-interval by node-interval: the interpolant is only C1 at nodes
    grid = pair.trajectory.t_grid
    inner = grid[(grid > pair.t0) & (grid < t)]
    edges = np.concatenate([[pair.t0], inner, [t]])
    per = tol / max(1, len(edges) - 1)
    total = math.fsum(quadrature(integrand, a, b, per) for a, b in zip(edges[:-1], edges[1:]))
    return pair.g1(t) * total


@dataclass(frozen=True)
class PinneyCoefficients:
    c3: float
    c4: float
    c5: float

    @property
    def kappa(self) -> float:
        return self.c3 * self.c5 - self.c4 * self.c4

    def validate(self, pair: FundamentalPair, n_points: int = RADICAND_GRID) -> "PinneyCoefficients":
        """Reject coefficients whose radicand is not positive across the window."""
        if not self.c3 > 0:
            raise InvariantDomainError(f"c3 must be positive for a real rho, got {self.c3}")
        for t in np.linspace(pair.t0, pair.t_end, n_points):
            r = _radicand(pair, self, t)
            if not r > 0:
                raise InvariantDomainError(f"radicand {r!r} is not positive at t = {t!r}")
        return self


@dataclass(frozen=True)
class NoetherCoefficients:
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0
    c5: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.as_tuple()):
            raise ValueError("coefficients must be finite")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.c1, self.c2, self.c3, self.c4, self.c5)

    @property
    def pinney(self) -> PinneyCoefficients:
        return PinneyCoefficients(self.c3, self.c4, self.c5)

    @classmethod
    def basis(cls, index: int) -> "NoetherCoefficients":
        if index not in (1, 2, 3, 4, 5):
            raise ValueError(f"basis index must be in 1..5, got {index}")
        c = [0.0] * 5
        c[index - 1] = 1.0
        return cls(*c)


def _radicand(pair, c, t):
    g1, _, g2, _ = pair.values(t)
    return c.c3 * g1 * g1 + 2.0 * c.c4 * g1 * g2 + c.c5 * g2 * g2


def _t_parts(pair: FundamentalPair, c3, c4, c5, t):
    """``T, T', T'', T'''`` with all derivatives from ``g'' = -omega^2 g``."""
    g1, d1, g2, d2 = pair.values(t)
    w2 = omega_squared(pair.profile, t)
    T = c3 * g1 * g1 + 2.0 * c4 * g1 * g2 + c5 * g2 * g2
    Td = 2.0 * (c3 * g1 * d1 + c4 * (g1 * d2 + g2 * d1) + c5 * g2 * d2)
    # sum of c * (derivative products) appearing in T''
    dd = c3 * d1 * d1 + 2.0 * c4 * d1 * d2 + c5 * d2 * d2
    Tdd = 2.0 * dd - 2.0 * w2 * T
    if pair.profile.phi_ddot is None:
        Tddd = math.nan
    else:
        # d/dt(2 dd) = -2 omega^2 T'  and  d/dt(-2 omega^2 T) = -2 (omega^2)' T - 2 omega^2 T'
        Tddd = -4.0 * w2 * Td - 2.0 * omega_squared_dot(pair.profile, t) * T
    return T, Td, Tdd, Tddd


def T_solution(pair: FundamentalPair, c: PinneyCoefficients, t: float) -> tuple[float, float, float]:
    T, Td, Tdd, _ = _t_parts(pair, c.c3, c.c4, c.c5, pair.check_t(t))
    return T, Td, Tdd


def third_order_residual(profile: GaugeProfile, pair: FundamentalPair,
                         c: PinneyCoefficients, t: float) -> float:
    """``T''' + 4 omega^2 T' + 2 (omega^2)' T``."""
    t = pair.check_t(t)
    T, Td, _, Tddd = _t_parts(pair, c.c3, c.c4, c.c5, t)
    return Tddd + 4.0 * omega_squared(profile, t) * Td + 2.0 * omega_squared_dot(profile, t) * T


def _rho_parts(pair, c, t):
    T, Td, Tdd, _ = _t_parts(pair, c.c3, c.c4, c.c5, t)
    if not T > 0:
        raise InvariantDomainError(f"Pinney radicand {T!r} is not positive at t = {t!r}")
    rho = math.sqrt(T)
    rho_d = Td / (2.0 * rho)
    rho_dd = (0.5 * Tdd - rho_d * rho_d) / rho
    return rho, rho_d, rho_dd


def pinney_rho(pair: FundamentalPair, c: PinneyCoefficients, t: float) -> float:
    return _rho_parts(pair, c, pair.check_t(t))[0]


def pinney_rho_dot(pair: FundamentalPair, c: PinneyCoefficients, t: float) -> float:
    return _rho_parts(pair, c, pair.check_t(t))[1]


def pinney_residual(pair: FundamentalPair, c: PinneyCoefficients, t: float) -> float:
    """``rho'' + omega^2 rho - kappa / rho^3``; vanishes only for a unit Wronskian."""
    t = pair.check_t(t)
    rho, _, rho_dd = _rho_parts(pair, c, t)
    return rho_dd + omega_squared(pair.profile, t) * rho - c.kappa / rho**3


def pinney_scale(pair: FundamentalPair, c: PinneyCoefficients, t: float) -> float:
    """Magnitude against which :func:`pinney_residual` is judged."""
    t = pair.check_t(t)
    rho = pinney_rho(pair, c, t)
    return max(1.0, abs(omega_squared(pair.profile, t)) * rho, abs(c.kappa) / rho**3)


def _g_parts(pair, c1, c2, t):
    g1, d1, g2, d2 = pair.values(t)
    return c1 * g1 + c2 * g2, c1 * d1 + c2 * d2


@dataclass(frozen=True, eq=False)
class GaugeFunction:
    """``F(q, t)`` of a Noether symmetry with both analytic partial derivatives (``F0 = 0``)."""

    profile: GaugeProfile
    pair: FundamentalPair
    coefficients: NoetherCoefficients

    def _parts(self, t):
        c = self.coefficients
        prof = self.profile
        t = self.pair.check_t(t)
        T, Td, Tdd, Tddd = _t_parts(self.pair, c.c3, c.c4, c.c5, t)
        g, gd = _g_parts(self.pair, c.c1, c.c2, t)
        return t, T, Td, Tdd, Tddd, g, gd, prof.phi(t), prof.phi_dot(t)

    def __call__(self, q: float, t: float) -> float:
        _, T, Td, Tdd, _, g, gd, phi, phid = self._parts(t)
        return (0.5 * Tdd - phi * Td - phid * T) * 0.5 * q * q - (gd - phi * g) * q

    def d_q(self, q: float, t: float) -> float:
        _, T, Td, Tdd, _, g, gd, phi, phid = self._parts(t)
        return (0.5 * Tdd - phi * Td - phid * T) * q - (gd - phi * g)

    def d_t(self, q: float, t: float) -> float:
        t, T, Td, Tdd, Tddd, g, gd, phi, phid = self._parts(t)
        phidd = self.profile.phi_ddot(t)
        gdd = -omega_squared(self.profile, t) * g
        quad = 0.5 * Tddd - 2.0 * phid * Td - phi * Tdd - phidd * T
        return quad * 0.5 * q * q - (gdd - phid * g - phi * gd) * q


def gauge_function_F(profile: GaugeProfile, pair: FundamentalPair, c: NoetherCoefficients,
                     q: float, t: float) -> float:
    return GaugeFunction(profile, pair, c)(q, t)


def _qdot(profile, s: PhaseState):
    return s.p + profile.phi(s.t) * s.q


def invariant_I(pair: FundamentalPair, index: int, profile: GaugeProfile, s: PhaseState) -> float:
    """The basis invariant ``I_index`` at phase point ``s``."""
    g1, d1, g2, d2 = pair.values(s.t)
    q = s.q
    qd = _qdot(profile, s)
    if index == 1:
        return g1 * qd - d1 * q
    if index == 2:
        return g2 * qd - d2 * q
    if index == 3:
        return 0.5 * (g1 * qd - d1 * q) ** 2
    if index == 4:
        return g1 * g2 * qd * qd - (g1 * d2 + g2 * d1) * q * qd + d1 * d2 * q * q
    if index == 5:
        return 0.5 * (g2 * qd - d2 * q) ** 2
    raise ValueError(f"invariant index must be in 1..5, got {index}")


def noether_invariant(profile: GaugeProfile, pair: FundamentalPair, c: NoetherCoefficients,
                      s: PhaseState) -> float:
    """The composite invariant built from ``T`` and ``g`` of the coefficient set."""
    t = pair.check_t(s.t)
    T, Td, Tdd, _ = _t_parts(pair, c.c3, c.c4, c.c5, t)
    g, gd = _g_parts(pair, c.c1, c.c2, t)
    q = s.q
    qd = _qdot(profile, s)
    w2 = omega_squared(profile, t)
    return (0.5 * T * qd * qd - 0.5 * Td * q * qd + (Tdd + 2.0 * w2 * T) * 0.25 * q * q
            + g * qd - gd * q)


def ermakov_lewis(pair: FundamentalPair, c: PinneyCoefficients, profile: GaugeProfile,
                  s: PhaseState) -> float:
    t = pair.check_t(s.t)
    rho, rho_d, _ = _rho_parts(pair, c, t)
    q = s.q
    qd = _qdot(profile, s)
    return 0.5 * (rho * qd - rho_d * q) ** 2 + 0.5 * c.kappa * (q / rho) ** 2


def wronskian_part(pair: FundamentalPair, c: NoetherCoefficients, profile: GaugeProfile,
                   s: PhaseState) -> float:
    t = pair.check_t(s.t)
    g, gd = _g_parts(pair, c.c1, c.c2, t)
    return g * _qdot(profile, s) - gd * s.q


def _partials(fn, q, t, h=1e-6):
    """Value and (d_q, d_t) of ``fn``, analytic when the object provides them."""
    if hasattr(fn, "d_q") and hasattr(fn, "d_t"):
        return fn(q, t), fn.d_q(q, t), fn.d_t(q, t)
    hq = h * max(1.0, abs(q))
    ht = h * max(1.0, abs(t))
    return (
        fn(q, t),
        (fn(q + hq, t) - fn(q - hq, t)) / (2 * hq),
        (fn(q, t + ht) - fn(q, t - ht)) / (2 * ht),
    )


def invariance_condition_residual(
    profile: GaugeProfile,
    tau: Callable[[float, float], float],
    eta: Callable[[float, float], float],
    F: Callable[[float, float], float],
    q: float,
    qdot: float,
    t: float,
) -> float:
    """Left minus right side of the quasi-invariance condition of the action.

    ``tau``, ``eta`` and ``F`` are callables of ``(q, t)``; if they expose
    ``d_q`` and ``d_t`` methods those are used, otherwise central differences.
    """
    t = profile.check_t(t)
    phi = profile.phi(t)
    phid = profile.phi_dot(t)
    L = lagrangian(profile, q, qdot, t)
    L_t = phi * phid * q * q - phid * q * qdot
    L_q = -(1.0 - phi * phi) * q - phi * qdot
    L_qd = qdot - phi * q

    tau_v, tau_q, tau_t = _partials(tau, q, t)
    eta_v, eta_q, eta_t = _partials(eta, q, t)
    _, F_q, F_t = _partials(F, q, t)
    tau_dot = tau_t + qdot * tau_q
    eta_dot = eta_t + qdot * eta_q
    F_dot = F_t + qdot * F_q
    return tau_v * L_t + eta_v * L_q + (eta_dot - tau_dot * qdot) * L_qd + tau_dot * L - F_dot


@dataclass
class InvariantReport:
    coefficients: NoetherCoefficients
    grid: np.ndarray
    series: dict[str, np.ndarray]
    tolerance: float
    el_route: str = "rho"

    @property
    def drift(self) -> dict[str, float]:
        out = {}
        for name, vals in self.series.items():
            ref = vals[0]
            out[name] = float(np.max(np.abs(vals - ref)) / max(1.0, abs(ref)))
        return out

    @property
    def passed(self) -> bool:
        return bool(all(d <= self.tolerance for d in self.drift.values()))

    def to_dict(self) -> dict:
        drift = self.drift
        return {
            "coefficients": dict(zip(("c1", "c2", "c3", "c4", "c5"), self.coefficients.as_tuple())),
            "grid": [float(t) for t in self.grid],
            "series": {k: [float(v) for v in vals] for k, vals in self.series.items()},
            "drift": drift,
            "tolerance": self.tolerance,
            "ermakov_lewis_route": self.el_route,
            "pass": {k: bool(d <= self.tolerance) for k, d in drift.items()},
            "passed": self.passed,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=kw.pop("indent", 2), **kw)


def drift_report(
    profile: GaugeProfile,
    pair: FundamentalPair,
    trajectory: Trajectory,
    c: NoetherCoefficients,
    grid: Sequence[float],
    tolerance: float = 1e-7,
) -> InvariantReport:
    """Evaluate every invariant along ``trajectory`` (states ``(q, p)``) on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid is empty")
    lo = max(pair.t0, trajectory.t0)
    hi = min(pair.t_end, trajectory.t_end)
    if grid.min() < lo or grid.max() > hi:
        raise InvariantDomainError(f"grid must lie inside [{lo}, {hi}]")

    pc = c.pinney
    el_route = "rho"
    try:
        if pc.c3 > 0:
            pc.validate(pair)
        else:
            el_route = "quadratic"
    except InvariantDomainError:
        el_route = "quadratic"

    series = {name: np.empty(grid.size) for name in INVARIANT_NAMES}
    for k, t in enumerate(grid):
        q, p = trajectory.state(t)
        s = PhaseState(float(t), float(q), float(p))
        basis = [invariant_I(pair, i, profile, s) for i in range(1, 6)]
        for i, v in enumerate(basis):
            series[f"I{i + 1}"][k] = v
        if el_route == "rho":
            series["I_EL"][k] = ermakov_lewis(pair, pc, profile, s)
        else:
            series["I_EL"][k] = pc.c3 * basis[2] + pc.c4 * basis[3] + pc.c5 * basis[4]
        series["W"][k] = wronskian_part(pair, c, profile, s)
        series["I_total"][k] = noether_invariant(profile, pair, c, s)
    return InvariantReport(c, grid, series, tolerance, el_route)
