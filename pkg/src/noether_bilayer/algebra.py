"""Symmetry generators as vector fields on (q, t), their commutators, and
canonical Poisson brackets of the invariants."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .invariants import (
    FundamentalPair,
    NoetherCoefficients,
    _g_parts,
    _t_parts,
    invariant_I,
)
from .model import GaugeProfile, PhaseState

COMMUTATOR_TOL = 1e-6
POISSON_TOL = 1e-6

# [G_i, G_j] = sum_k C[(i, j)][k-1] G_k.  Note [G2, G4] = -G2: with unit Wronskian
# G2(eta_4) - G4(eta_2) = g2 (g1 g2' - g2 g1') = g2, mirroring [G1, G4] = G1.
CommutatorTable = dict[tuple[int, int], tuple[int, ...]]
COMMUTATOR_TABLE: CommutatorTable = {
    (1, 2): (0, 0, 0, 0, 0),
    (1, 3): (0, 0, 0, 0, 0),
    (1, 4): (1, 0, 0, 0, 0),
    (1, 5): (0, 1, 0, 0, 0),
    (2, 3): (-1, 0, 0, 0, 0),
    (2, 4): (0, -1, 0, 0, 0),
    (2, 5): (0, 0, 0, 0, 0),
    (3, 4): (0, 0, 2, 0, 0),
    (3, 5): (0, 0, 0, 1, 0),
    (4, 5): (0, 0, 0, 0, 2),
}


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FieldComponent:
    """A scalar function of ``(q, t)`` together with its two partial derivatives."""

    value: Callable[[float, float], float]
    d_q: Callable[[float, float], float]
    d_t: Callable[[float, float], float]

    def __call__(self, q: float, t: float) -> float:
        return self.value(q, t)


@dataclass(frozen=True, eq=False)
class GeneratorField:
    """``tau d/dt + eta d/dq``; ``index`` is 1..5 for basis fields, else a label."""

    index: int | str
    tau: FieldComponent
    eta: FieldComponent

    def __call__(self, q: float, t: float) -> tuple[float, float]:
        return self.tau(q, t), self.eta(q, t)

    def apply(self, fn: FieldComponent, q: float, t: float) -> float:
        """Directional derivative of ``fn`` along this field."""
        return self.tau(q, t) * fn.d_t(q, t) + self.eta(q, t) * fn.d_q(q, t)


def noether_generator(pair: FundamentalPair, c: NoetherCoefficients, index: int | str = "composite"
                      ) -> GeneratorField:
    """``T d/dt + (T' q / 2 - g) d/dq`` for the coefficient set ``c``."""

    def parts(t):
        t = pair.check_t(t)
        T, Td, Tdd, _ = _t_parts(pair, c.c3, c.c4, c.c5, t)
        g, gd = _g_parts(pair, c.c1, c.c2, t)
        return T, Td, Tdd, g, gd

    tau = FieldComponent(
        value=lambda q, t: parts(t)[0],
        d_q=lambda q, t: 0.0,
        d_t=lambda q, t: parts(t)[1],
    )

    def eta_val(q, t):
        _, Td, _, g, _ = parts(t)
        return 0.5 * Td * q - g

    def eta_t(q, t):
        _, _, Tdd, _, gd = parts(t)
        return 0.5 * Tdd * q - gd

    eta = FieldComponent(eta_val, lambda q, t: 0.5 * parts(t)[1], eta_t)
    return GeneratorField(index, tau, eta)


def generator(pair: FundamentalPair, index: int) -> GeneratorField:
    if index not in (1, 2, 3, 4, 5):
        raise AlgebraError(f"generator index must be in 1..5, got {index}")
    return noether_generator(pair, NoetherCoefficients.basis(index), index)


def lie_bracket(Ga: GeneratorField, Gb: GeneratorField, q: float, t: float) -> tuple[float, float]:
    """Components ``(tau, eta)`` of ``[Ga, Gb]`` at ``(q, t)``."""
    tau = Ga.apply(Gb.tau, q, t) - Gb.apply(Ga.tau, q, t)
    eta = Ga.apply(Gb.eta, q, t) - Gb.apply(Ga.eta, q, t)
    return tau, eta


def _numeric_component(fn: Callable[[float, float], float], h: float) -> FieldComponent:
    def d_q(q, t):
        hq = h * max(1.0, abs(q))
        return (fn(q + hq, t) - fn(q - hq, t)) / (2 * hq)

    def d_t(q, t):
        ht = h * max(1.0, abs(t))
        return (fn(q, t + ht) - fn(q, t - ht)) / (2 * ht)

    return FieldComponent(fn, d_q, d_t)


def bracket_field(Ga: GeneratorField, Gb: GeneratorField, h: float = 1e-5) -> GeneratorField:
    """``[Ga, Gb]`` as a field; its partials come from central differences."""
    tau = _numeric_component(lambda q, t: lie_bracket(Ga, Gb, q, t)[0], h)
    eta = _numeric_component(lambda q, t: lie_bracket(Ga, Gb, q, t)[1], h)
    return GeneratorField(f"[{Ga.index},{Gb.index}]", tau, eta)


@dataclass
class RelationResult:
    relation: str
    max_deviation: float
    max_scaled_deviation: float
    samples: int
    tolerance: float
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_scaled_deviation <= self.tolerance)

    def to_dict(self) -> dict:
        d = {
            "relation": self.relation,
            "max_deviation": float(self.max_deviation),
            "max_scaled_deviation": float(self.max_scaled_deviation),
            "samples": self.samples,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        d.update(self.extra)
        return d


@dataclass
class VerificationReport:
    name: str
    relations: list[RelationResult]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.relations)

    @property
    def max_scaled_deviation(self) -> float:
        return max(r.max_scaled_deviation for r in self.relations)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "relations": [r.to_dict() for r in self.relations],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _combine(gens: Sequence[GeneratorField], coeffs: Iterable[float], q, t) -> np.ndarray:
    out = np.zeros(2)
    for c, G in zip(coeffs, gens):
        if c:
            out += c * np.array(G(q, t))
    return out


def _sorted_points(points) -> list[tuple[float, ...]]:
    pts = [tuple(float(x) for x in p) for p in points]
    if not pts:
        raise AlgebraError("at least one sample point is required")
    return sorted(pts)


def structure_constants(pair: FundamentalPair, i: int, j: int,
                        sample_points: Sequence[tuple[float, float]]) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of ``[G_i, G_j]`` in the basis ``G1..G5`` and the fit residual."""
    gens = [generator(pair, k) for k in range(1, 6)]
    rows, rhs = [], []
    for q, t in _sorted_points(sample_points):
        cols = np.array([G(q, t) for G in gens]).T  # 2 x 5
        rows.extend(cols)
        rhs.extend(lie_bracket(gens[i - 1], gens[j - 1], q, t))
    A = np.array(rows)
    b = np.array(rhs)
    # equilibrate rows and columns: field amplitudes differ by orders of magnitude
    row = np.maximum(np.max(np.abs(A), axis=1), np.abs(b))
    row[row == 0] = 1.0
    As = A / row[:, None]
    col = np.linalg.norm(As, axis=0)
    col[col == 0] = 1.0
    x, *_ = np.linalg.lstsq(As / col, b / row, rcond=None)
    x = x / col
    resid = float(np.max(np.abs(A @ x - b))) if b.size else 0.0
    return x, resid


def verify_commutator_table(
    pair: FundamentalPair,
    sample_points: Sequence[tuple[float, float]],
    tol: float = COMMUTATOR_TOL,
    table: CommutatorTable | None = None,
) -> VerificationReport:
    """Check all ten commutators of the basis generators at ``(q, t)`` sample points.

    Deviations are judged against ``1 + max|g|^2`` over the window. Each
    relation also carries the least-squares structure constants, raw and
    rounded to integers.
    """
    pts = _sorted_points(sample_points)
    gens = [generator(pair, k) for k in range(1, 6)]
    scale = 1.0 + pair.max_abs_g() ** 2
    results = []
    table = COMMUTATOR_TABLE if table is None else table
    for (i, j), expected in table.items():
        dev = 0.0
        for q, t in pts:
            got = np.array(lie_bracket(gens[i - 1], gens[j - 1], q, t))
            want = _combine(gens, expected, q, t)
            dev = max(dev, float(np.max(np.abs(got - want))))
        extra = {"expected": list(expected)}
        if len(pts) >= 3:
            raw, resid = structure_constants(pair, i, j, pts)
            extra.update(
                structure_constants_raw=[float(x) for x in raw],
                structure_constants_rounded=[int(round(x)) for x in raw],
                structure_constants_match=[int(round(x)) for x in raw] == list(expected),
                max_round_off=float(np.max(np.abs(raw - np.round(raw)))),
                fit_residual=resid,
            )
        results.append(RelationResult(f"[G{i},G{j}]", dev, dev / scale, len(pts), tol, extra))
    return VerificationReport("commutators", results, tol)


@dataclass(frozen=True, eq=False)
class PhaseFunction:
    evaluator: Callable[[float, float, float], float]
    label: str

    def __call__(self, q: float, p: float, t: float) -> float:
        return self.evaluator(q, p, t)


def canonical_momentum(profile: GaugeProfile, q: float, qdot: float, t: float) -> float:
    return qdot - profile.phi(profile.check_t(t)) * q


def qdot_of(profile: GaugeProfile, q: float, p: float, t: float) -> float:
    return p + profile.phi(profile.check_t(t)) * q


def _gradient(A: PhaseFunction, q, p, t, step):
    h = step * max(1.0, abs(q), abs(p))
    dq = (A(q + h, p, t) - A(q - h, p, t)) / (2 * h)
    dp = (A(q, p + h, t) - A(q, p - h, t)) / (2 * h)
    for v in (dq, dp):
        if not np.isfinite(v):
            raise AlgebraError(f"non-finite derivative of {A.label} at (q={q}, p={p}, t={t})")
    return dq, dp


def poisson_bracket(A: PhaseFunction, B: PhaseFunction, q: float, p: float, t: float,
                    step: float = 1e-6) -> float:
    """Canonical bracket ``{A, B}`` by central differences in ``q`` and ``p``."""
    aq, ap = _gradient(A, q, p, t, step)
    bq, bp = _gradient(B, q, p, t, step)
    return aq * bp - ap * bq


def invariant_phase_function(pair: FundamentalPair, profile: GaugeProfile, index: int) -> PhaseFunction:
    return PhaseFunction(
        lambda q, p, t: invariant_I(pair, index, profile, PhaseState(t, q, p)), f"I{index}"
    )


# (A, B, rhs) with rhs a function of (I1, I2)
POISSON_TABLE: tuple[tuple[int, int, str, Callable[[float, float], float]], ...] = (
    (1, 2, "1", lambda a, b: 1.0),
    (1, 4, "I1", lambda a, b: a),
    (3, 2, "I1", lambda a, b: a),
    (1, 5, "I2", lambda a, b: b),
    (4, 2, "I2", lambda a, b: b),
    (1, 3, "0", lambda a, b: 0.0),
    (2, 5, "0", lambda a, b: 0.0),
    (3, 4, "I1^2", lambda a, b: a * a),
    (3, 5, "I1*I2", lambda a, b: a * b),
    (4, 5, "I2^2", lambda a, b: b * b),
)


def verify_poisson_table(
    pair: FundamentalPair,
    profile: GaugeProfile,
    sample_points: Sequence[tuple[float, float, float]],
    tol: float = POISSON_TOL,
    step: float = 1e-6,
) -> VerificationReport:
    """Check the ten brackets among ``I1..I5`` at ``(q, p, t)`` sample points.

    A deviation is scaled by ``1 + |grad A| |grad B|``, the natural size of the bracket.
    """
    pts = _sorted_points(sample_points)
    funcs = {k: invariant_phase_function(pair, profile, k) for k in range(1, 6)}
    results = []
    for a, b, label, rhs in POISSON_TABLE:
        dev = 0.0
        scaled = 0.0
        for q, p, t in pts:
            got = poisson_bracket(funcs[a], funcs[b], q, p, t, step)
            want = rhs(funcs[1](q, p, t), funcs[2](q, p, t))
            ga = np.hypot(*_gradient(funcs[a], q, p, t, step))
            gb = np.hypot(*_gradient(funcs[b], q, p, t, step))
            d = abs(got - want)
            dev = max(dev, d)
            scaled = max(scaled, d / (1.0 + ga * gb))
        results.append(RelationResult(f"{{I{a},I{b}}} = {label}", dev, scaled, len(pts), tol))
    return VerificationReport("poisson_brackets", results, tol)


def default_sample_points(pair: FundamentalPair, count: int, rng: np.random.Generator,
                          with_p: bool = False):
    """Uniform points in ``[-2, 2]`` x ``[t0 + 0.1, 0.8 t_end]`` (and ``p`` in ``[-2, 2]``)."""
    lo = pair.t0 + 0.1
    hi = 0.8 * pair.t_end
    if not hi > lo:
        lo, hi = pair.t0, pair.t_end
    q = rng.uniform(-2.0, 2.0, count)
    t = rng.uniform(lo, hi, count)
    if with_p:
        p = rng.uniform(-2.0, 2.0, count)
        return list(zip(q, p, t))
    return list(zip(q, t))
