"""Adaptive Dormand-Prince 5(4) integrator with dense output, and adaptive quadrature."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

RHS = Callable[[float, np.ndarray], np.ndarray]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12

# Butcher tableau of the Dormand-Prince pair; the 7th stage is the FSAL stage.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th and the embedded 4th order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

# Free 4th-order continuous extension: y(t + s h) = y + h K^T (P @ [s, s^2, s^3, s^4]).
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ORDER = 5


class IntegrationError(RuntimeError):
    """The solver could not continue; ``last_t`` is the last accepted time."""

    def __init__(self, message: str, last_t: float):
        super().__init__(f"{message} (last good t = {last_t!r})")
        self.last_t = last_t


class QuadratureError(RuntimeError):
    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message}: estimate={estimate!r}, error bound={error_bound!r}")
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class Tolerances:
    """Step-control settings; ``None`` step fields select the automatic choice."""

    rel: float = DEFAULT_RTOL
    abs: float = DEFAULT_ATOL
    max_step: float | None = None
    initial_step: float | None = None

    def __post_init__(self):
        if not self.rel >= 1e-14:
            raise ValueError(f"rel tolerance must be >= 1e-14, got {self.rel}")
        if not self.abs >= 1e-16:
            raise ValueError(f"abs tolerance must be >= 1e-16, got {self.abs}")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ValueError("initial_step must be positive")


@dataclass
class SolverStats:
    steps_accepted: int = 0
    steps_rejected: int = 0
    rhs_evals: int = 0


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted nodes of a solve plus the piecewise quartic interpolant between them."""

    t_grid: np.ndarray
    states: np.ndarray
    _coeffs: np.ndarray = field(repr=False)  # (n_steps, dim, 4), already scaled by h
    stats: SolverStats

    @property
    def t0(self) -> float:
        return float(self.t_grid[0])

    @property
    def t_end(self) -> float:
        return float(self.t_grid[-1])

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def _locate(self, t: float) -> tuple[int, float, float]:
        if not self.t0 <= t <= self.t_end:
            raise ValueError(f"t={t!r} outside trajectory window [{self.t0}, {self.t_end}]")
        i = int(np.searchsorted(self.t_grid, t, side="right")) - 1
        i = min(i, len(self.t_grid) - 2)
        h = self.t_grid[i + 1] - self.t_grid[i]
        return i, (t - self.t_grid[i]) / h, h

    def state(self, t: float) -> np.ndarray:
        t = float(t)
        i, s, _ = self._locate(t)
        if s == 0.0:
            return self.states[i].copy()
        if s == 1.0:
            return self.states[i + 1].copy()
        return self.states[i] + self._coeffs[i] @ np.array([s, s * s, s**3, s**4])

    def derivative(self, t: float) -> np.ndarray:
        """Time derivative of the interpolating polynomial."""
        i, s, h = self._locate(float(t))
        return self._coeffs[i] @ np.array([1.0, 2 * s, 3 * s * s, 4 * s**3]) / h

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.state(t)
        return np.array([self.state(ti) for ti in np.asarray(t, dtype=float)])

    def to_csv(self, path, names: Sequence[str] | None = None, t=None) -> None:
        """Write ``t`` plus state columns with 17 significant digits."""
        if names is None:
            names = [f"y{k}" for k in range(self.dim)]
        ts = self.t_grid if t is None else np.asarray(t, dtype=float)
        write_csv(path, ["t", *names], [[ti, *self.state(ti)] for ti in ts])


def format_float(x: float) -> str:
    return "%.17g" % x


def write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(float(x)) for x in row])


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _initial_step(rhs, t0, y0, f0, direction_span, rtol, atol, order) -> float:
    scale = atol + np.abs(y0) * rtol
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    f1 = np.asarray(rhs(t0 + h0, y0 + h0 * f0), dtype=float)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1, direction_span)


def solve_ivp(
    rhs: RHS,
    t0: float,
    y0: Sequence[float],
    t_end: float,
    tol: Tolerances | None = None,
    max_steps: int = 1_000_000,
) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t_end`` with local error control.

    Raises
    ------
    IntegrationError
        On a NaN/inf from ``rhs``, step-size underflow, or exhausting ``max_steps``.
    """
    tol = tol or Tolerances()
    t0 = float(t0)
    t_end = float(t_end)
    if not t_end > t0:
        raise ValueError(f"t_end must exceed t0 (got t0={t0}, t_end={t_end})")
    y = np.array(y0, dtype=float)
    if y.ndim != 1 or not np.all(np.isfinite(y)):
        raise ValueError("y0 must be a finite 1-d state vector")

    stats = SolverStats()
    rtol, atol = tol.rel, tol.abs
    span = t_end - t0
    max_step = tol.max_step if tol.max_step is not None else span / 10

    def f(t, yy):
        stats.rhs_evals += 1
        out = np.asarray(rhs(t, yy), dtype=float)
        if not np.all(np.isfinite(out)):
            raise IntegrationError(f"non-finite derivative at t={t!r}", last_t=t_cur)
        return out

    t_cur = t0
    fy = f(t0, y)
    if tol.initial_step is not None:
        h = min(tol.initial_step, max_step, span)
    else:
        h = min(_initial_step(f, t0, y, fy, span, rtol, atol, _ORDER), max_step)

    ts = [t0]
    ys = [y.copy()]
    coeffs = []
    K = np.empty((7, y.size))
    rejected_last = False

    while t_cur < t_end:
        if stats.steps_accepted + stats.steps_rejected >= max_steps:
            raise IntegrationError("step budget exhausted", last_t=t_cur)
        h_min = 10 * np.spacing(abs(t_cur) + abs(h))
        if h < h_min:
            raise IntegrationError(f"step size underflow (h={h:.3e})", last_t=t_cur)
        last = t_cur + h >= t_end
        t_new = t_end if last else t_cur + h
        h_eff = t_new - t_cur

        K[0] = fy
        for s in range(1, 7):
            dy = h_eff * (np.dot(_A[s], K[:s]))
            K[s] = f(t_cur + _C[s] * h_eff, y + dy)
        y_new = y + h_eff * (_B @ K)

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(h_eff * (_E @ K) / scale)

        if err <= 1.0:
            coeffs.append(h_eff * (K.T @ _P))
            t_cur = t_new
            y = y_new
            fy = K[6].copy()
            ts.append(t_cur)
            ys.append(y.copy())
            stats.steps_accepted += 1
            factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err ** (-1 / _ORDER))
            if rejected_last:
                factor = min(factor, 1.0)
            rejected_last = False
            h = min(h_eff * factor, max_step)
        else:
            stats.steps_rejected += 1
            rejected_last = True
            h = h_eff * max(_MIN_FACTOR, _SAFETY * err ** (-1 / _ORDER))

    return Trajectory(np.array(ts), np.array(ys), np.array(coeffs), stats)


# Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5]] = _WG[:3]
_GWEIGHTS[[9, 11, 13]] = _WG[2::-1]
_GWEIGHTS[7] = _WG[3]


def _gk15(f, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = np.array([f(mid + half * x) for x in _NODES], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(f"non-finite integrand on [{a}, {b}]", math.nan, math.inf)
    k = half * (_KWEIGHTS @ vals)
    g = half * (_GWEIGHTS @ vals)
    return k, abs(k - g)


def quadrature(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
               max_intervals: int = 2000) -> float:
    """Globally adaptive Gauss-Kronrod (7, 15) quadrature of ``f`` over ``[a, b]``.

    The interval with the largest error estimate is bisected until the summed
    estimate falls below ``tol``.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    intervals = [(a, b, *_gk15(f, a, b))]
    while True:
        total = math.fsum(iv[2] for iv in intervals)
        err = math.fsum(iv[3] for iv in intervals)
        if err <= tol:
            return total
        if len(intervals) >= max_intervals:
            raise QuadratureError("quadrature budget exhausted", total, err)
        j = max(range(len(intervals)), key=lambda k: intervals[k][3])
        lo, hi, _, _ = intervals.pop(j)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise QuadratureError("interval cannot be bisected further", total, err)
        intervals.append((lo, mid, *_gk15(f, lo, mid)))
        intervals.append((mid, hi, *_gk15(f, mid, hi)))
